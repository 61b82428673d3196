#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "evoquery/cli.hpp"
#include "evoquery/errors.hpp"

namespace {

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

evoquery::RunConfig load_config_or_fail(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("EVOQUERY_CONFIG")) {
            path = env;
        }
    }
    if (path.empty()) {
        throw evoquery::ConfigError(
            "no config file given (use --config or set EVOQUERY_CONFIG)");
    }
    return evoquery::RunConfig::load(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evoquery - offline subject search with evolutionary query synthesis"};
    app.require_subcommand(1);

    std::string config_path;
    int workers = default_workers();
    app.add_option("--config", config_path,
                   "run config file (default: $EVOQUERY_CONFIG)");
    app.add_option("--workers", workers, "worker threads for evaluation")
        ->check(CLI::PositiveNumber);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "normalize a corpus and write an index snapshot");
    std::string ingest_corpus, ingest_out, ingest_stopwords, ingest_stemmer;
    ingest_cmd->add_option("--corpus", ingest_corpus, "corpus.jsonl path")->required();
    ingest_cmd->add_option("--out", ingest_out, "output directory")->required();
    ingest_cmd->add_option("--stopwords", ingest_stopwords, "stopword list, one lemma per line");
    ingest_cmd->add_option("--stemmer", ingest_stemmer, "suffix-strip rule table (TSV)");

    // search
    auto* search_cmd = app.add_subcommand("search", "run one query against a corpus");
    std::string search_corpus, search_stopwords, search_stemmer;
    std::vector<std::string> search_terms;
    int search_budget = 10;
    search_cmd->add_option("--corpus", search_corpus, "corpus.jsonl path")->required();
    search_cmd->add_option("--stopwords", search_stopwords, "stopword list");
    search_cmd->add_option("--stemmer", search_stemmer, "suffix-strip rule table");
    search_cmd->add_option("-P,--budget", search_budget, "result budget");
    search_cmd->add_option("terms", search_terms, "query terms")->required();

    // evolve
    auto* evolve_cmd = app.add_subcommand("evolve", "run the full evolutionary search pipeline");
    std::string evolve_out;
    std::optional<std::uint64_t> evolve_seed;
    std::optional<int> opt_pop_size, opt_keywords, opt_budget, opt_max_gen, opt_final, opt_top_k;
    std::optional<double> opt_mutation, opt_epsilon;
    std::optional<bool> opt_adapt;
    evolve_cmd->add_option("--out-dir", evolve_out, "run directory (overrides config out_dir)");
    evolve_cmd->add_option("--seed", evolve_seed, "rng seed (overrides config)");
    evolve_cmd->add_option("--pop-size", opt_pop_size, "population size N");
    evolve_cmd->add_option("--keywords", opt_keywords, "keywords per query m");
    evolve_cmd->add_option("--budget", opt_budget, "per-query result budget P");
    evolve_cmd->add_option("--max-generations", opt_max_gen, "generation cap");
    evolve_cmd->add_option("--final-count", opt_final, "final result list length");
    evolve_cmd->add_option("--top-k", opt_top_k, "documents combined into the ka pattern");
    evolve_cmd->add_option("--mutation-rate", opt_mutation, "per-child mutation probability");
    evolve_cmd->add_option("--epsilon", opt_epsilon, "fitness stddev stability threshold");
    evolve_cmd->add_flag("--adapt-patterns,!--no-adapt-patterns", opt_adapt,
                         "rebuild k-patterns each generation");

    // rank
    auto* rank_cmd = app.add_subcommand("rank", "rebuild pattern rankings for a finished run");
    std::string rank_run_dir;
    rank_cmd->add_option("--run-dir", rank_run_dir, "run directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score a run's rankings against qrels");
    std::string eval_run_dir, eval_qrels, eval_topic, eval_discount;
    eval_cmd->add_option("--run-dir", eval_run_dir, "run directory")->required();
    eval_cmd->add_option("--qrels", eval_qrels, "qrels.tsv (overrides config)");
    eval_cmd->add_option("--topic", eval_topic, "qrels topic id");
    eval_cmd->add_option("--discount", eval_discount, "standard | paper-one-based");

    // report
    auto* report_cmd = app.add_subcommand("report", "print a human-readable run summary");
    std::string report_run_dir;
    report_cmd->add_option("--run-dir", report_run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest_cmd) {
            evoquery::cmd_ingest(ingest_corpus, ingest_out, ingest_stopwords, ingest_stemmer,
                                 std::cout);
        } else if (*search_cmd) {
            evoquery::cmd_search(search_corpus, search_stopwords, search_stemmer, search_terms,
                                 search_budget, std::cout);
        } else if (*evolve_cmd) {
            evoquery::RunConfig cfg = load_config_or_fail(config_path);
            if (!evolve_out.empty()) cfg.out_dir = evolve_out;
            if (evolve_seed.has_value()) cfg.seed = *evolve_seed;
            if (opt_pop_size) cfg.ga.pop_size = *opt_pop_size;
            if (opt_keywords) cfg.ga.keywords_per_query = *opt_keywords;
            if (opt_budget) cfg.ga.result_budget = *opt_budget;
            if (opt_max_gen) cfg.ga.max_generations = *opt_max_gen;
            if (opt_final) cfg.ga.final_result_count = *opt_final;
            if (opt_top_k) cfg.pattern_top_k = *opt_top_k;
            if (opt_mutation) cfg.ga.mutation_rate = *opt_mutation;
            if (opt_epsilon) cfg.ga.stability_epsilon = *opt_epsilon;
            if (opt_adapt) cfg.ga.adapt_patterns = *opt_adapt;
            evoquery::cmd_evolve(cfg, workers, std::cout, std::cerr);
        } else if (*rank_cmd) {
            evoquery::RunConfig cfg = load_config_or_fail(config_path);
            evoquery::cmd_rank(cfg, rank_run_dir, std::cout);
        } else if (*eval_cmd) {
            evoquery::RunConfig cfg = load_config_or_fail(config_path);
            if (!eval_discount.empty()) {
                cfg.discount = evoquery::parse_discount_mode(eval_discount);
            }
            evoquery::cmd_eval(cfg, eval_run_dir, eval_qrels, eval_topic, std::cout);
        } else if (*report_cmd) {
            evoquery::cmd_report(report_run_dir, std::cout);
        }
    } catch (const evoquery::ConfigError& e) {
        std::cerr << "evoquery: config error: " << e.what() << "\n";
        return 2;
    } catch (const evoquery::DataError& e) {
        std::cerr << "evoquery: data error: " << e.what() << "\n";
        return 3;
    } catch (const evoquery::BackendError& e) {
        std::cerr << "evoquery: backend error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "evoquery: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
