#include "evoquery/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Rethrows submodule failures with the pipeline stage in the message so a
// failing run names where it died.
template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(stage) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(stage) + ": " + e.what());
    } catch (const BackendError& e) {
        throw BackendError(std::string(stage) + ": " + e.what());
    }
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw ConfigError("unknown key \"" + key + "\" in " + where);
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) {
        return {};
    }
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

FMode parse_f_mode(const std::string& s) {
    if (s == "linear") return FMode::Linear;
    if (s == "reciprocal") return FMode::Reciprocal;
    throw ConfigError("unknown f_mode: \"" + s + "\" (expected linear|reciprocal)");
}

std::string to_string(FMode mode) {
    return mode == FMode::Linear ? "linear" : "reciprocal";
}

OutbreedingDistance parse_outbreeding(const std::string& s) {
    if (s == "fitness") return OutbreedingDistance::Fitness;
    if (s == "hamming") return OutbreedingDistance::Hamming;
    throw ConfigError("unknown outbreeding distance: \"" + s + "\" (expected fitness|hamming)");
}

std::string to_string(OutbreedingDistance d) {
    return d == OutbreedingDistance::Fitness ? "fitness" : "hamming";
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("malformed config file: " + path.string());
    }
    check_keys(j, path.string(),
               {"corpus", "q0", "qrels", "synonyms", "authority", "rules", "labeled",
                "stopwords", "stemmer", "out_dir", "backend", "topic", "seed", "ga", "weights",
                "filter", "patterns", "metrics"});

    RunConfig cfg;
    std::filesystem::path base = std::filesystem::absolute(path).parent_path();
    auto path_of = [&](const char* key) {
        return resolve(base, j.value(key, std::string{}));
    };
    cfg.corpus = path_of("corpus");
    cfg.q0 = path_of("q0");
    cfg.qrels = path_of("qrels");
    cfg.synonyms = path_of("synonyms");
    cfg.authority = path_of("authority");
    cfg.rules = path_of("rules");
    cfg.labeled = path_of("labeled");
    cfg.stopwords = path_of("stopwords");
    cfg.stemmer = path_of("stemmer");
    cfg.out_dir = path_of("out_dir");
    cfg.backend = j.value("backend", std::string("offline"));
    cfg.topic = j.value("topic", std::string{});
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
            throw ConfigError("seed must be an integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("ga")) {
        const json& ga = j["ga"];
        check_keys(ga, "ga",
                   {"pop_size", "keywords_per_query", "result_budget", "final_result_count",
                    "mutation_rate", "stability_epsilon", "max_generations", "f_mode",
                    "outbreeding", "adapt_patterns"});
        cfg.ga.pop_size = ga.value("pop_size", cfg.ga.pop_size);
        cfg.ga.keywords_per_query = ga.value("keywords_per_query", cfg.ga.keywords_per_query);
        cfg.ga.result_budget = ga.value("result_budget", cfg.ga.result_budget);
        cfg.ga.final_result_count = ga.value("final_result_count", cfg.ga.final_result_count);
        cfg.ga.mutation_rate = ga.value("mutation_rate", cfg.ga.mutation_rate);
        cfg.ga.stability_epsilon = ga.value("stability_epsilon", cfg.ga.stability_epsilon);
        cfg.ga.max_generations = ga.value("max_generations", cfg.ga.max_generations);
        if (ga.contains("f_mode")) {
            cfg.ga.f_mode = parse_f_mode(ga["f_mode"].get<std::string>());
        }
        if (ga.contains("outbreeding")) {
            cfg.ga.outbreeding = parse_outbreeding(ga["outbreeding"].get<std::string>());
        }
        cfg.ga.adapt_patterns = ga.value("adapt_patterns", cfg.ga.adapt_patterns);
    }

    if (j.contains("weights")) {
        const json& w = j["weights"];
        check_keys(w, "weights", {"alpha_f", "alpha_p", "alpha_s", "alpha_a", "pattern_blend"});
        cfg.weights.alpha_f = w.value("alpha_f", cfg.weights.alpha_f);
        cfg.weights.alpha_p = w.value("alpha_p", cfg.weights.alpha_p);
        cfg.weights.alpha_s = w.value("alpha_s", cfg.weights.alpha_s);
        cfg.weights.alpha_a = w.value("alpha_a", cfg.weights.alpha_a);
        if (w.contains("pattern_blend")) {
            if (!w["pattern_blend"].is_object()) {
                throw ConfigError("weights.pattern_blend must be an object");
            }
            cfg.weights.pattern_blend.clear();
            for (const auto& [label, weight] : w["pattern_blend"].items()) {
                cfg.weights.pattern_blend[parse_pattern_label(label)] = weight.get<double>();
            }
        }
    }

    if (j.contains("filter")) {
        check_keys(j["filter"], "filter", {"classifier_threshold"});
        cfg.classifier_threshold = j["filter"].value("classifier_threshold", 0.6);
    }
    if (j.contains("patterns")) {
        check_keys(j["patterns"], "patterns", {"top_k"});
        cfg.pattern_top_k = j["patterns"].value("top_k", 5);
    }
    if (j.contains("metrics")) {
        check_keys(j["metrics"], "metrics", {"discount"});
        if (j["metrics"].contains("discount")) {
            cfg.discount = parse_discount_mode(j["metrics"]["discount"].get<std::string>());
        }
    }
    return cfg;
}

void RunConfig::validate_paths(bool need_corpus, bool need_q0) const {
    auto require = [](const std::filesystem::path& p, const char* what, bool required) {
        if (p.empty()) {
            if (required) {
                throw ConfigError(std::string("config is missing required path: ") + what);
            }
            return;
        }
        if (!std::filesystem::exists(p)) {
            throw ConfigError(std::string(what) + " path does not exist: " + p.string());
        }
    };
    require(corpus, "corpus", need_corpus);
    require(q0, "q0", need_q0);
    require(qrels, "qrels", false);
    require(synonyms, "synonyms", false);
    require(authority, "authority", false);
    require(rules, "rules", false);
    require(labeled, "labeled", false);
    require(stopwords, "stopwords", false);
    require(stemmer, "stemmer", false);
}

ordered_json RunConfig::snapshot() const {
    ordered_json j;
    j["corpus"] = corpus.string();
    j["q0"] = q0.string();
    j["qrels"] = qrels.string();
    j["synonyms"] = synonyms.string();
    j["authority"] = authority.string();
    j["rules"] = rules.string();
    j["labeled"] = labeled.string();
    j["stopwords"] = stopwords.string();
    j["stemmer"] = stemmer.string();
    j["out_dir"] = out_dir.string();
    j["backend"] = backend;
    j["topic"] = topic;
    if (seed.has_value()) {
        j["seed"] = *seed;
    }
    ordered_json ga;
    ga["pop_size"] = this->ga.pop_size;
    ga["keywords_per_query"] = this->ga.keywords_per_query;
    ga["result_budget"] = this->ga.result_budget;
    ga["final_result_count"] = this->ga.final_result_count;
    ga["mutation_rate"] = this->ga.mutation_rate;
    ga["stability_epsilon"] = this->ga.stability_epsilon;
    ga["max_generations"] = this->ga.max_generations;
    ga["f_mode"] = to_string(this->ga.f_mode);
    ga["outbreeding"] = to_string(this->ga.outbreeding);
    ga["adapt_patterns"] = this->ga.adapt_patterns;
    j["ga"] = std::move(ga);
    ordered_json w;
    w["alpha_f"] = weights.alpha_f;
    w["alpha_p"] = weights.alpha_p;
    w["alpha_s"] = weights.alpha_s;
    w["alpha_a"] = weights.alpha_a;
    ordered_json blend;
    for (const auto& [label, weight] : weights.pattern_blend) {
        blend[evoquery::to_string(label)] = weight;
    }
    w["pattern_blend"] = std::move(blend);
    j["weights"] = std::move(w);
    j["filter"]["classifier_threshold"] = classifier_threshold;
    j["patterns"]["top_k"] = pattern_top_k;
    j["metrics"]["discount"] = evoquery::to_string(discount);
    return j;
}

namespace {

std::map<std::string, std::vector<TokenText>> load_labeled(const std::filesystem::path& path,
                                                           const NormConfig& norm) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open labeled training set: " + path.string());
    }
    std::map<std::string, std::vector<TokenText>> labeled;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("category") || !j.contains("body")) {
            throw DataError("labeled set line " + std::to_string(line_no) +
                            ": expected {\"category\": ..., \"body\": ...}");
        }
        labeled[j["category"].get<std::string>()].push_back(
            normalize(j["body"].get<std::string>(), norm));
    }
    return labeled;
}

}  // namespace

PipelineBundle load_pipeline(const RunConfig& cfg, std::ostream* log) {
    PipelineBundle bundle;
    bundle.norm = with_stage("load-normalization", [&] {
        return load_norm_config(cfg.stopwords, cfg.stemmer);
    });
    bundle.corpus = with_stage("ingest-corpus", [&] { return ingest(cfg.corpus, bundle.norm); });
    bundle.index = with_stage("build-index", [&] { return VectorIndex::build(bundle.corpus); });
    bundle.q0 = with_stage("load-key-concepts",
                           [&] { return KeyConceptSet::load(cfg.q0, bundle.norm); });
    if (!cfg.synonyms.empty()) {
        bundle.synonyms = with_stage("load-synonyms", [&] {
            return SynonymDictionary::load(cfg.synonyms, /*symmetric_closure=*/true,
                                           bundle.norm);
        });
    }
    if (!cfg.authority.empty()) {
        bundle.authority = with_stage("load-authority", [&] {
            return AuthorityDictionary::load(cfg.authority, bundle.norm);
        });
    }
    if (!cfg.rules.empty()) {
        bundle.filter.rules = with_stage("load-rules", [&] { return load_rules(cfg.rules); });
    }
    if (!cfg.labeled.empty()) {
        bundle.filter.classifier = with_stage("train-classifier", [&] {
            return CentroidClassifier::train(load_labeled(cfg.labeled, bundle.norm),
                                             bundle.index, cfg.classifier_threshold);
        });
    }
    if (log != nullptr && bundle.corpus.size() < 2) {
        (*log) << "warning: corpus has a single document; idf weights are all zero\n";
    }
    return bundle;
}

void cmd_ingest(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
                const std::filesystem::path& stopwords, const std::filesystem::path& stemmer,
                std::ostream& out) {
    NormConfig norm = with_stage("load-normalization",
                                 [&] { return load_norm_config(stopwords, stemmer); });
    Corpus corpus = with_stage("ingest-corpus", [&] { return ingest(corpus_path, norm); });
    VectorIndex index = with_stage("build-index", [&] { return VectorIndex::build(corpus); });
    with_stage("write-index", [&] {
        index.save(out_dir / "index.json");
        ordered_json manifest;
        manifest["n_docs"] = corpus.size();
        manifest["vocab_size"] = index.vocab_size();
        manifest["norm_config_hash"] = to_hex(corpus.manifest().norm_config_hash);
        manifest["created_at"] = corpus.manifest().created_at;
        write_file_atomic(out_dir / "corpus_manifest.json", manifest.dump(2) + "\n");
        return 0;
    });
    out << "ingested " << corpus.size() << " documents, " << index.vocab_size()
        << " terms -> " << (out_dir / "index.json").string() << "\n";
}

void cmd_search(const std::filesystem::path& corpus_path,
                const std::filesystem::path& stopwords, const std::filesystem::path& stemmer,
                const std::vector<std::string>& terms, int budget, std::ostream& out) {
    NormConfig norm = with_stage("load-normalization",
                                 [&] { return load_norm_config(stopwords, stemmer); });
    Corpus corpus = with_stage("ingest-corpus", [&] { return ingest(corpus_path, norm); });
    VectorIndex index = with_stage("build-index", [&] { return VectorIndex::build(corpus); });

    TokenText joined = normalize(
        std::accumulate(terms.begin(), terms.end(), std::string{},
                        [](std::string acc, const std::string& t) {
                            return acc.empty() ? t : std::move(acc) + " " + t;
                        }),
        norm);
    std::vector<std::string> keywords;
    for (const auto& token : joined.tokens) {
        if (std::find(keywords.begin(), keywords.end(), token) == keywords.end()) {
            keywords.push_back(token);
        }
    }
    if (keywords.empty()) {
        throw ConfigError("search: query normalizes to no keywords");
    }
    Query query{0, std::move(keywords)};
    OfflineBackend backend(corpus, index);
    auto results = with_stage("execute", [&] { return execute(query, backend, budget); });
    out << "rank\tdoc_id\tscore\ttitle\n";
    out.precision(6);
    for (const auto& r : results) {
        out << r.rank << '\t' << r.doc_id << '\t' << r.backend_score << '\t'
            << corpus.at(r.doc_id).title << '\n';
    }
}

namespace {

ordered_json patterns_to_json(const KPatternSet& patterns, int top_k,
                              const std::map<PatternLabel, double>& blend) {
    ordered_json j;
    j["top_k"] = top_k;
    ordered_json blend_json;
    for (const auto& [label, weight] : blend) {
        blend_json[to_string(label)] = weight;
    }
    j["blend"] = std::move(blend_json);
    ordered_json present = ordered_json::array();
    for (auto label : patterns.present()) {
        present.push_back(to_string(label));
    }
    j["present"] = std::move(present);
    for (auto label : kAllPatternLabels) {
        if (patterns.has(label)) {
            j[to_string(label)] = {{"provenance", patterns.get(label)->provenance}};
        }
    }
    return j;
}

void write_pattern_rankings(const SimilarityMatrix& matrix,
                            const std::filesystem::path& run_dir) {
    for (auto label : matrix.labels) {
        PatternRanking ranking = rank_by(matrix, label);
        std::ostringstream tsv;
        tsv.precision(17);
        tsv << "rank\tdoc_id\tscore\n";
        for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
            tsv << (i + 1) << '\t' << ranking.entries[i].first << '\t'
                << ranking.entries[i].second << '\n';
        }
        write_file_atomic(run_dir / ("ranking_" + to_string(label) + ".tsv"), tsv.str());
    }
}

}  // namespace

std::filesystem::path cmd_evolve(const RunConfig& cfg, int workers, std::ostream& out,
                                 std::ostream& log) {
    cfg.validate_paths();
    if (!cfg.seed.has_value()) {
        throw ConfigError("evolve requires an explicit seed (config \"seed\" or --seed)");
    }
    if (cfg.out_dir.empty()) {
        throw ConfigError("evolve requires an output directory (config \"out_dir\" or --out-dir)");
    }
    if (cfg.backend != "offline") {
        // External adapters are registered by embedding applications; the
        // stock binary ships none.
        throw BackendError("no external adapter registered: " + cfg.backend);
    }

    PipelineBundle bundle = load_pipeline(cfg, &log);
    OfflineBackend backend(bundle.corpus, bundle.index);
    EvolveInputs inputs{bundle.corpus, bundle.index,     backend,
                        bundle.q0,     bundle.synonyms,  bundle.authority,
                        bundle.filter, cfg.pattern_top_k, workers,
                        &log};
    RunOutputs outputs = with_stage("evolve", [&] {
        return run_evolution_with_context(inputs, cfg.ga, cfg.weights, *cfg.seed,
                                          cfg.snapshot());
    });

    with_stage("persist-run", [&] {
        persist_run(outputs.record, cfg.out_dir);
        outputs.final_context.matrix.save_tsv(cfg.out_dir / "matrix.tsv");
        write_file_atomic(cfg.out_dir / "patterns.json",
                          patterns_to_json(outputs.final_context.patterns, cfg.pattern_top_k,
                                           cfg.weights.pattern_blend)
                                  .dump(2) +
                              "\n");
        write_pattern_rankings(outputs.final_context.matrix, cfg.out_dir);
        std::ostringstream excluded;
        for (const auto& e : outputs.final_context.rule_excluded) {
            ordered_json j;
            j["doc_id"] = e.doc_id;
            j["rule_ids"] = e.rule_ids;
            excluded << j.dump() << '\n';
        }
        for (const auto& e : outputs.final_context.classifier_excluded) {
            ordered_json j;
            j["doc_id"] = e.doc_id;
            j["category"] = e.category;
            j["score"] = e.score;
            excluded << j.dump() << '\n';
        }
        write_file_atomic(cfg.out_dir / "excluded.jsonl", excluded.str());
        return 0;
    });

    const auto& stats = outputs.record.generations;
    out << "run " << outputs.record.run_id << ": " << stats.size() << " generation(s), "
        << outputs.record.results.size() << " final results -> " << cfg.out_dir.string()
        << "\n";
    if (!stats.empty()) {
        out << "mean fitness " << stats.front().mean_fitness << " -> "
            << stats.back().mean_fitness << ", final stddev " << stats.back().stddev_fitness
            << "\n";
    }
    return cfg.out_dir;
}

void cmd_rank(const RunConfig& cfg, const std::filesystem::path& run_dir, std::ostream& out) {
    cfg.validate_paths();
    RunRecord record = with_stage("load-run", [&] { return load_run(run_dir); });
    if (record.results.empty()) {
        throw DataError("run has no results to rank: " + run_dir.string());
    }
    PipelineBundle bundle = load_pipeline(cfg, nullptr);

    // Merged-rating order reconstructed from the persisted provenance.
    std::vector<const RankedResult*> rows;
    rows.reserve(record.results.size());
    for (const auto& r : record.results) {
        rows.push_back(&r);
    }
    std::sort(rows.begin(), rows.end(), [](const RankedResult* a, const RankedResult* b) {
        if (a->best_rank != b->best_rank) {
            return a->best_rank < b->best_rank;
        }
        if (a->hit_count != b->hit_count) {
            return a->hit_count > b->hit_count;
        }
        return a->doc_id < b->doc_id;
    });
    std::vector<std::string> ordered;
    ordered.reserve(rows.size());
    for (const auto* r : rows) {
        ordered.push_back(r->doc_id);
    }

    KPatternSet patterns = with_stage("build-patterns", [&] {
        return build_kpatterns(ordered, bundle.corpus, bundle.q0, bundle.authority, bundle.index,
                               cfg.pattern_top_k);
    });
    SimilarityMatrix matrix = with_stage("similarity-matrix", [&] {
        return similarity_matrix(ordered, bundle.corpus, patterns, bundle.index);
    });
    with_stage("write-rankings", [&] {
        matrix.save_tsv(run_dir / "matrix.tsv");
        write_file_atomic(run_dir / "patterns.json",
                          patterns_to_json(patterns, cfg.pattern_top_k,
                                           cfg.weights.pattern_blend)
                                  .dump(2) +
                              "\n");
        write_pattern_rankings(matrix, run_dir);
        return 0;
    });
    out << "ranked " << ordered.size() << " documents against " << matrix.labels.size()
        << " pattern(s) -> " << (run_dir / "matrix.tsv").string() << "\n";
}

void cmd_eval(const RunConfig& cfg, const std::filesystem::path& run_dir,
              const std::filesystem::path& qrels_override, const std::string& topic_override,
              std::ostream& out) {
    std::filesystem::path qrels_path = qrels_override.empty() ? cfg.qrels : qrels_override;
    if (qrels_path.empty()) {
        throw ConfigError("eval needs a qrels file (config \"qrels\" or --qrels)");
    }
    std::vector<std::string> warnings;
    RelevanceJudgments judgments =
        with_stage("load-qrels", [&] { return load_qrels(qrels_path, &warnings); });
    for (const auto& w : warnings) {
        out << "warning: " << w << "\n";
    }

    std::string topic = !topic_override.empty() ? topic_override : cfg.topic;
    if (topic.empty()) {
        auto topics = judgments.topics();
        if (topics.size() != 1) {
            throw ConfigError("qrels contains " + std::to_string(topics.size()) +
                              " topics; pick one with --topic");
        }
        topic = *topics.begin();
    }

    SimilarityMatrix matrix = with_stage("load-matrix", [&] {
        return SimilarityMatrix::load_tsv(run_dir / "matrix.tsv");
    });
    RunRecord record = with_stage("load-run", [&] { return load_run(run_dir); });

    std::map<std::string, PatternRanking> rankings;
    for (auto label : matrix.labels) {
        rankings.emplace(to_string(label), rank_by(matrix, label));
    }
    PatternRanking final_ranking;
    final_ranking.mode = "final";
    for (const auto& r : record.results) {
        final_ranking.entries.emplace_back(r.doc_id, r.weight);
    }
    rankings.emplace("final", std::move(final_ranking));

    EvalReport report = with_stage("evaluate", [&] {
        return evaluate_patterns(rankings, judgments, topic, cfg.discount);
    });
    with_stage("write-report", [&] {
        write_file_atomic(run_dir / "eval.json", report_to_json(report).dump(2) + "\n");
        write_file_atomic(run_dir / "eval.txt", report_to_text(report));
        write_file_atomic(run_dir / "dcg_curve.tsv", report_curve_tsv(report));
        return 0;
    });
    out << report_to_text(report);
}

void cmd_report(const std::filesystem::path& run_dir, std::ostream& out) {
    RunRecord record = with_stage("load-run", [&] { return load_run(run_dir); });
    out << "run " << record.run_id << "  (seed " << record.seed << ")\n\n";
    out << "generation      mean    stddev      best  best query\n";
    out << std::fixed;
    for (const auto& g : record.generations) {
        out << std::setw(10) << g.generation << std::setprecision(4) << std::setw(10)
            << g.mean_fitness << std::setw(10) << g.stddev_fitness << std::setw(10)
            << g.best_fitness << "  ";
        for (std::size_t i = 0; i < g.best_query.size(); ++i) {
            out << (i > 0 ? " " : "") << g.best_query[i];
        }
        out << '\n';
    }
    out << "\nfinal results: " << record.results.size() << "\n";
    std::size_t show = std::min<std::size_t>(record.results.size(), 10);
    for (std::size_t i = 0; i < show; ++i) {
        const auto& r = record.results[i];
        out << std::setw(10) << r.rank << "  " << std::setprecision(4) << r.weight << "  "
            << r.doc_id << '\n';
    }
    std::filesystem::path eval_path = run_dir / "eval.json";
    if (std::filesystem::exists(eval_path)) {
        json eval = json::parse(read_file(eval_path), nullptr, false);
        if (!eval.is_discarded()) {
            out << "\nranking quality (topic " << eval.value("topic_id", std::string{})
                << ", discount " << eval.value("discount", std::string{}) << ")\n";
            out << "ranking         DCG      NDCG\n";
            for (const auto& name : eval["order_by_ndcg"]) {
                const auto& e = eval["rankings"][name.get<std::string>()];
                out << std::left << std::setw(10) << name.get<std::string>() << std::right
                    << std::setprecision(4) << std::setw(10) << e["dcg"].get<double>()
                    << std::setw(10) << e["ndcg"].get<double>() << '\n';
            }
        }
    } else {
        out << "\n(no eval.json yet; run `evoquery eval` with a qrels file)\n";
    }
}

}  // namespace evoquery
