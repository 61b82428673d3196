#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoquery/engine.hpp"
#include "evoquery/filter.hpp"
#include "evoquery/patterns.hpp"
#include "evoquery/rng.hpp"
#include "evoquery/store.hpp"
#include "evoquery/textcore.hpp"
#include "evoquery/vsm.hpp"

namespace evoquery {

// Weights of the fitness arguments. f, p and s default to equal weight; the
// environment factor a is a constant stub and weighted zero by default.
struct FitnessWeights {
    double alpha_f = 1.0;
    double alpha_p = 1.0;
    double alpha_s = 1.0;
    double alpha_a = 0.0;
    std::map<PatternLabel, double> pattern_blend = {{PatternLabel::Ka, 1.0}};

    void validate() const;  // ConfigError when negative or all zero
};

enum class FMode { Linear, Reciprocal };
enum class OutbreedingDistance { Fitness, Hamming };

struct GAConfig {
    int pop_size = 15;            // N
    int keywords_per_query = 3;   // m
    int result_budget = 10;       // P
    int final_result_count = 50;
    double mutation_rate = 0.1;
    double stability_epsilon = 0.01;
    int max_generations = 10;
    FMode f_mode = FMode::Linear;
    OutbreedingDistance outbreeding = OutbreedingDistance::Fitness;
    bool adapt_patterns = true;  // rebuild k-patterns every generation

    void validate() const;
};

struct QueryPopulation {
    int generation = 0;
    std::vector<Query> members;
    std::map<std::uint64_t, double> fitness;  // query_id -> mean result weight
};

// N queries of m distinct concepts drawn uniformly without replacement
// from q0. Fitness is left unset.
QueryPopulation init_population(const KeyConceptSet& q0, const GAConfig& cfg, const Rng& rng);

struct WeightFactors {
    double f = 0;  // position credit in the evaluating query's list
    double p = 0;  // fraction of merged queries that returned the document
    double s = 0;  // pattern blend of the document's similarity row
    double a = 0;  // environment factor, constant 1
    double w = 0;  // convex combination, always in [0,1]
};

WeightFactors result_weight(int rank, const MergedEntry& entry, int n_queries_merged,
                            const SimilarityMatrix& matrix, const std::string& doc_id,
                            const GAConfig& cfg, const FitnessWeights& weights);

// Mean result weight over the query's kept results; 0 when nothing survived.
double query_fitness(const std::vector<SearchResult>& results, const MergedResultSet& kept,
                     const SimilarityMatrix& matrix, int n_queries_merged, const GAConfig& cfg,
                     const FitnessWeights& weights);

// Outbreeding: first parent uniform at random, second the member farthest
// from it (fitness gap, or keyword Hamming distance when configured), ties
// to the smallest query_id. ceil(N/2) pairs.
std::vector<std::pair<std::size_t, std::size_t>> select_parents(const QueryPopulation& pop,
                                                                Rng rng,
                                                                OutbreedingDistance distance);

// Discrete recombination with synonym substitution: per position one child
// takes a's keyword, the other a synonym of b's (the keyword itself when the
// dictionary has none). Duplicate keywords inside a child are repaired with
// fresh draws from q0.
std::pair<Query, Query> crossover(const Query& a, const Query& b,
                                  const SynonymDictionary& synonyms, const KeyConceptSet& q0,
                                  Rng rng);

// With probability `rate`, replaces one uniformly chosen gene with a uniform
// draw from q0 minus the query's genes; a no-op when that set is empty.
Query mutate(const Query& query, const KeyConceptSet& q0, double rate, Rng rng,
             std::ostream* log = nullptr);

// Elite selection over the parents+children pool: top N by fitness, ties
// preferring parents, then smaller query_id.
QueryPopulation next_generation(const QueryPopulation& parents,
                                const std::vector<Query>& children,
                                const std::map<std::uint64_t, double>& fitness);

struct FilterSettings {
    std::vector<FilterRule> rules;
    std::optional<CentroidClassifier> classifier;
};

struct EvolveInputs {
    const Corpus& corpus;
    const VectorIndex& index;
    const SearchBackend& backend;
    const KeyConceptSet& q0;
    const SynonymDictionary& synonyms;
    const AuthorityDictionary& authority;
    const FilterSettings& filter;
    int pattern_top_k = 5;
    int workers = 1;
    std::ostream* log = nullptr;
};

// One full evaluation of a query set: execute, merge, filter, build
// patterns (unless frozen ones are passed), fill the similarity matrix and
// compute per-query fitness with p normalized by the set size.
struct EvaluationContext {
    std::map<std::uint64_t, std::vector<SearchResult>> lists;
    MergedResultSet merged;
    MergedResultSet kept;
    std::vector<RuleExclusion> rule_excluded;
    std::vector<ClassifierExclusion> classifier_excluded;
    KPatternSet patterns;
    SimilarityMatrix matrix;
    std::map<std::uint64_t, double> fitness;
};

EvaluationContext evaluate_queries(const std::vector<Query>& queries, const EvolveInputs& in,
                                   const GAConfig& cfg, const FitnessWeights& weights,
                                   const KPatternSet* frozen_patterns);

GenerationStats population_stats(const QueryPopulation& pop);

// The evolution loop: evaluate -> select -> crossover -> mutate -> elite,
// until the fitness stddev drops under stability_epsilon or max_generations
// populations have been evaluated. The returned record carries the
// per-generation trace and the final merged results ranked by weight.
RunRecord run_evolution(const EvolveInputs& in, const GAConfig& cfg,
                        const FitnessWeights& weights, std::uint64_t seed,
                        nlohmann::ordered_json config_snapshot = nlohmann::ordered_json::object());

// Run record plus the final population's evaluation context, for callers
// that persist the pattern provenance and similarity matrix.
struct RunOutputs {
    RunRecord record;
    EvaluationContext final_context;
};

RunOutputs run_evolution_with_context(const EvolveInputs& in, const GAConfig& cfg,
                                      const FitnessWeights& weights, std::uint64_t seed,
                                      nlohmann::ordered_json config_snapshot =
                                          nlohmann::ordered_json::object());

}  // namespace evoquery
