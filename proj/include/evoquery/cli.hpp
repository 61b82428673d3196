#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoquery/evolve.hpp"
#include "evoquery/metrics.hpp"

namespace evoquery {

// One run's full configuration. Paths in the file are resolved against the
// config file's directory; flag overrides are applied by the CLI before
// validation.
struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path q0;
    std::filesystem::path qrels;      // optional
    std::filesystem::path synonyms;   // optional
    std::filesystem::path authority;  // optional
    std::filesystem::path rules;      // optional
    std::filesystem::path labeled;    // optional classifier training set
    std::filesystem::path stopwords;  // optional
    std::filesystem::path stemmer;    // optional
    std::filesystem::path out_dir;

    std::string backend = "offline";
    std::string topic;  // qrels topic for eval; inferred when unique
    std::optional<std::uint64_t> seed;

    GAConfig ga;
    FitnessWeights weights;
    double classifier_threshold = 0.6;
    int pattern_top_k = 5;
    DiscountMode discount = DiscountMode::Standard;

    static RunConfig load(const std::filesystem::path& path);

    // ConfigError when a required or explicitly given path is missing.
    void validate_paths(bool need_corpus = true, bool need_q0 = true) const;

    // Deterministic resolved snapshot persisted with every run.
    nlohmann::ordered_json snapshot() const;
};

// Everything an evolution or ranking run needs, loaded per config.
struct PipelineBundle {
    NormConfig norm;
    Corpus corpus;
    VectorIndex index;
    KeyConceptSet q0;
    SynonymDictionary synonyms;
    AuthorityDictionary authority;
    FilterSettings filter;
};

PipelineBundle load_pipeline(const RunConfig& cfg, std::ostream* log = nullptr);

// Subcommand drivers. All throw ConfigError/DataError/BackendError; the
// binary maps them to exit codes 2/3/4.
void cmd_ingest(const std::filesystem::path& corpus_path, const std::filesystem::path& out_dir,
                const std::filesystem::path& stopwords, const std::filesystem::path& stemmer,
                std::ostream& out);

void cmd_search(const std::filesystem::path& corpus_path,
                const std::filesystem::path& stopwords, const std::filesystem::path& stemmer,
                const std::vector<std::string>& terms, int budget, std::ostream& out);

// Runs the GA pipeline and persists the run directory; returns its path.
std::filesystem::path cmd_evolve(const RunConfig& cfg, int workers, std::ostream& out,
                                 std::ostream& log);

// Rebuilds k-patterns over a persisted run's results and writes matrix.tsv,
// patterns.json and per-pattern ranking TSVs into the run directory.
void cmd_rank(const RunConfig& cfg, const std::filesystem::path& run_dir, std::ostream& out);

// Evaluates the run's pattern rankings and final ranking against qrels;
// writes eval.json, eval.txt and dcg_curve.tsv into the run directory.
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& run_dir,
              const std::filesystem::path& qrels_override, const std::string& topic_override,
              std::ostream& out);

// Prints the fitness-per-generation table plus, when eval.json exists, the
// pattern quality table.
void cmd_report(const std::filesystem::path& run_dir, std::ostream& out);

}  // namespace evoquery
