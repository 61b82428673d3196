#include "evoquery/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

void FitnessWeights::validate() const {
    for (double alpha : {alpha_f, alpha_p, alpha_s, alpha_a}) {
        if (alpha < 0.0) {
            throw ConfigError("fitness weights must be nonnegative");
        }
    }
    if (alpha_f + alpha_p + alpha_s + alpha_a == 0.0) {
        throw ConfigError("at least one fitness weight must be positive");
    }
    for (const auto& [label, weight] : pattern_blend) {
        if (weight < 0.0) {
            throw ConfigError("pattern blend weight for " + to_string(label) +
                              " must be nonnegative");
        }
    }
}

void GAConfig::validate() const {
    if (pop_size < 2) {
        throw ConfigError("pop_size must be >= 2, got " + std::to_string(pop_size));
    }
    if (keywords_per_query < 1) {
        throw ConfigError("keywords_per_query must be >= 1");
    }
    if (result_budget < 1) {
        throw ConfigError("result_budget must be >= 1");
    }
    if (final_result_count < 1) {
        throw ConfigError("final_result_count must be >= 1");
    }
    if (mutation_rate < 0.0 || mutation_rate > 1.0) {
        throw ConfigError("mutation_rate must lie in [0,1]");
    }
    if (stability_epsilon < 0.0) {
        throw ConfigError("stability_epsilon must be >= 0");
    }
    if (max_generations < 1) {
        throw ConfigError("max_generations must be >= 1");
    }
}

QueryPopulation init_population(const KeyConceptSet& q0, const GAConfig& cfg, const Rng& rng) {
    cfg.validate();
    std::size_t m = static_cast<std::size_t>(cfg.keywords_per_query);
    if (m > q0.size()) {
        throw ConfigError("keywords_per_query (" + std::to_string(m) +
                          ") exceeds the key concept count (" + std::to_string(q0.size()) + ")");
    }
    QueryPopulation pop;
    pop.generation = 0;
    pop.members.reserve(static_cast<std::size_t>(cfg.pop_size));
    for (int i = 0; i < cfg.pop_size; ++i) {
        Rng stream = rng.substream("init", static_cast<std::uint64_t>(i));
        // Partial Fisher-Yates over concept indices.
        std::vector<std::size_t> idx(q0.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Query query;
        query.query_id = static_cast<std::uint64_t>(i);
        query.keywords.reserve(m);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t pick = j + stream.below(idx.size() - j);
            std::swap(idx[j], idx[pick]);
            query.keywords.push_back(q0.concepts[idx[j]]);
        }
        pop.members.push_back(std::move(query));
    }
    return pop;
}

namespace {

double position_credit(int rank, const GAConfig& cfg) {
    if (rank < 1 || rank > cfg.result_budget) {
        throw DataError("result rank " + std::to_string(rank) + " outside 1.." +
                        std::to_string(cfg.result_budget));
    }
    return cfg.f_mode == FMode::Linear
               ? (static_cast<double>(cfg.result_budget) - static_cast<double>(rank) + 1.0) /
                     static_cast<double>(cfg.result_budget)
               : 1.0 / static_cast<double>(rank);
}

WeightFactors combine_factors(double f, const MergedEntry& entry, int n_queries_merged,
                              const SimilarityMatrix& matrix, const std::string& doc_id,
                              const FitnessWeights& weights) {
    weights.validate();
    WeightFactors out;
    out.f = f;
    out.p = static_cast<double>(entry.hit_count) / static_cast<double>(n_queries_merged);
    if (weights.alpha_s > 0.0) {
        auto row = matrix.row(doc_id);
        if (!row) {
            throw DataError("document " + doc_id + " missing from the similarity matrix");
        }
        out.s = blend_score(matrix, *row, weights.pattern_blend);
    }
    out.a = 1.0;  // user-profile environment factor, stubbed constant
    double total = weights.alpha_f + weights.alpha_p + weights.alpha_s + weights.alpha_a;
    out.w = (weights.alpha_f * out.f + weights.alpha_p * out.p + weights.alpha_s * out.s +
             weights.alpha_a * out.a) /
            total;
    return out;
}

}  // namespace

WeightFactors result_weight(int rank, const MergedEntry& entry, int n_queries_merged,
                            const SimilarityMatrix& matrix, const std::string& doc_id,
                            const GAConfig& cfg, const FitnessWeights& weights) {
    return combine_factors(position_credit(rank, cfg), entry, n_queries_merged, matrix, doc_id,
                           weights);
}

double query_fitness(const std::vector<SearchResult>& results, const MergedResultSet& kept,
                     const SimilarityMatrix& matrix, int n_queries_merged, const GAConfig& cfg,
                     const FitnessWeights& weights) {
    double sum = 0.0;
    int n = 0;
    for (const auto& result : results) {
        const MergedEntry* entry = kept.find(result.doc_id);
        if (entry == nullptr) {
            continue;  // filtered out
        }
        sum += result_weight(result.rank, *entry, n_queries_merged, matrix, result.doc_id, cfg,
                             weights)
                   .w;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

namespace {

int hamming_distance(const Query& a, const Query& b) {
    std::set<std::string> sa(a.keywords.begin(), a.keywords.end());
    std::set<std::string> sb(b.keywords.begin(), b.keywords.end());
    int diff = 0;
    for (const auto& k : sa) {
        if (!sb.contains(k)) ++diff;
    }
    for (const auto& k : sb) {
        if (!sa.contains(k)) ++diff;
    }
    return diff;
}

double member_fitness(const QueryPopulation& pop, const Query& q) {
    auto it = pop.fitness.find(q.query_id);
    if (it == pop.fitness.end()) {
        throw DataError("query " + std::to_string(q.query_id) + " has no fitness value");
    }
    return it->second;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> select_parents(const QueryPopulation& pop,
                                                                Rng rng,
                                                                OutbreedingDistance distance) {
    std::size_t n = pop.members.size();
    if (n < 2) {
        throw DataError("parent selection needs at least 2 population members");
    }
    std::size_t n_pairs = (n + 1) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n_pairs);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        std::size_t first = static_cast<std::size_t>(rng.below(n));
        double first_fitness = member_fitness(pop, pop.members[first]);
        std::size_t best = n;  // sentinel
        double best_distance = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == first) {
                continue;
            }
            double d = distance == OutbreedingDistance::Fitness
                           ? std::abs(member_fitness(pop, pop.members[j]) - first_fitness)
                           : static_cast<double>(
                                 hamming_distance(pop.members[j], pop.members[first]));
            bool better = d > best_distance ||
                          (d == best_distance &&
                           pop.members[j].query_id < pop.members[best].query_id);
            if (better) {
                best = j;
                best_distance = d;
            }
        }
        pairs.emplace_back(first, best);
    }
    return pairs;
}

namespace {

// Replaces duplicate keywords (left to right) with uniform draws from the
// concepts not already present in the child.
void repair_duplicates(std::vector<std::string>& genes, const KeyConceptSet& q0, Rng& rng) {
    for (std::size_t j = 0; j < genes.size(); ++j) {
        bool duplicate = false;
        for (std::size_t i = 0; i < j; ++i) {
            if (genes[i] == genes[j]) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            continue;
        }
        std::set<std::string> present(genes.begin(), genes.end());
        std::vector<std::string> candidates;
        candidates.reserve(q0.size());
        for (const auto& term : q0.concepts) {
            if (!present.contains(term)) {
                candidates.push_back(term);
            }
        }
        if (candidates.empty()) {
            throw DataError("key concept set too small to repair duplicate keywords");
        }
        genes[j] = candidates[rng.below(candidates.size())];
    }
}

}  // namespace

std::pair<Query, Query> crossover(const Query& a, const Query& b,
                                  const SynonymDictionary& synonyms, const KeyConceptSet& q0,
                                  Rng rng) {
    if (a.keywords.size() != b.keywords.size()) {
        throw DataError("crossover parents must have the same keyword count");
    }
    std::size_t m = a.keywords.size();
    std::vector<std::string> genes1(m), genes2(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::string& gene_a = a.keywords[j];
        std::string gene_b = b.keywords[j];
        // The cross-parent gene arrives as a synonym when the dictionary
        // has one, preserving the parent's semantics under new wording.
        const auto& syns = synonyms.synonyms(gene_b);
        if (!syns.empty()) {
            auto it = syns.begin();
            std::advance(it, static_cast<long>(rng.below(syns.size())));
            gene_b = *it;
        }
        if (rng.coin()) {
            genes1[j] = gene_a;
            genes2[j] = gene_b;
        } else {
            genes1[j] = gene_b;
            genes2[j] = gene_a;
        }
    }
    repair_duplicates(genes1, q0, rng);
    repair_duplicates(genes2, q0, rng);
    Query child1, child2;
    child1.keywords = std::move(genes1);
    child2.keywords = std::move(genes2);
    return {std::move(child1), std::move(child2)};
}

Query mutate(const Query& query, const KeyConceptSet& q0, double rate, Rng rng,
             std::ostream* log) {
    Query out = query;
    if (rng.unit_double() >= rate) {
        return out;
    }
    std::set<std::string> present(query.keywords.begin(), query.keywords.end());
    std::vector<std::string> candidates;
    candidates.reserve(q0.size());
    for (const auto& term : q0.concepts) {
        if (!present.contains(term)) {
            candidates.push_back(term);
        }
    }
    if (candidates.empty()) {
        if (log != nullptr) {
            (*log) << "mutate: no replacement concepts left for query " << query.query_id
                   << ", skipping\n";
        }
        return out;
    }
    std::size_t pos = static_cast<std::size_t>(rng.below(out.keywords.size()));
    out.keywords[pos] = candidates[rng.below(candidates.size())];
    return out;
}

QueryPopulation next_generation(const QueryPopulation& parents,
                                const std::vector<Query>& children,
                                const std::map<std::uint64_t, double>& fitness) {
    struct PoolEntry {
        const Query* query;
        double fitness;
        bool is_child;
    };
    std::vector<PoolEntry> pool;
    pool.reserve(parents.members.size() + children.size());
    auto fitness_of = [&](const Query& q) {
        auto it = fitness.find(q.query_id);
        if (it == fitness.end()) {
            throw DataError("query " + std::to_string(q.query_id) +
                            " has no fitness value for elite selection");
        }
        return it->second;
    };
    for (const auto& q : parents.members) {
        pool.push_back({&q, fitness_of(q), false});
    }
    for (const auto& q : children) {
        pool.push_back({&q, fitness_of(q), true});
    }
    std::sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
        if (a.fitness != b.fitness) {
            return a.fitness > b.fitness;
        }
        if (a.is_child != b.is_child) {
            return !a.is_child;  // parents survive ties
        }
        return a.query->query_id < b.query->query_id;
    });
    QueryPopulation next;
    next.generation = parents.generation + 1;
    std::size_t n = parents.members.size();
    next.members.reserve(n);
    for (std::size_t i = 0; i < n && i < pool.size(); ++i) {
        next.members.push_back(*pool[i].query);
        next.fitness[pool[i].query->query_id] = pool[i].fitness;
    }
    return next;
}

EvaluationContext evaluate_queries(const std::vector<Query>& queries, const EvolveInputs& in,
                                   const GAConfig& cfg, const FitnessWeights& weights,
                                   const KPatternSet* frozen_patterns) {
    EvaluationContext ctx;
    std::vector<std::vector<SearchResult>> lists(queries.size());
    parallel_for(queries.size(), in.workers, [&](std::size_t i) {
        lists[i] = execute(queries[i], in.backend, cfg.result_budget);
    });
    for (std::size_t i = 0; i < queries.size(); ++i) {
        ctx.lists.emplace(queries[i].query_id, std::move(lists[i]));
    }
    ctx.merged = merge(ctx.lists);

    auto rule_outcome = apply_rules(ctx.merged, in.corpus, in.filter.rules);
    ctx.rule_excluded = std::move(rule_outcome.excluded);
    if (in.filter.classifier.has_value()) {
        auto clf_outcome =
            classify_exclude(rule_outcome.kept, in.corpus, in.index, *in.filter.classifier);
        ctx.kept = std::move(clf_outcome.kept);
        ctx.classifier_excluded = std::move(clf_outcome.excluded);
    } else {
        ctx.kept = std::move(rule_outcome.kept);
    }

    ctx.patterns = frozen_patterns != nullptr
                       ? *frozen_patterns
                       : build_kpatterns(ctx.kept, in.corpus, in.q0, in.authority, in.index,
                                         in.pattern_top_k);
    ctx.matrix = similarity_matrix(ctx.kept, in.corpus, ctx.patterns, in.index, in.workers);

    int pool = static_cast<int>(queries.size());
    for (const auto& query : queries) {
        ctx.fitness[query.query_id] = query_fitness(ctx.lists.at(query.query_id), ctx.kept,
                                                    ctx.matrix, pool, cfg, weights);
    }
    return ctx;
}

GenerationStats population_stats(const QueryPopulation& pop) {
    GenerationStats stats;
    stats.generation = pop.generation;
    if (pop.members.empty()) {
        return stats;
    }
    double sum = 0.0;
    double low = 1.0, high = 0.0;
    for (const auto& q : pop.members) {
        double fit = member_fitness(pop, q);
        sum += fit;
        low = std::min(low, fit);
        high = std::max(high, fit);
    }
    double mean = sum / static_cast<double>(pop.members.size());
    // Summation rounding must not push the mean past the extremes or leave
    // a phantom spread on a uniform population.
    mean = std::clamp(mean, low, high);
    double sq = 0.0;
    const Query* best = nullptr;
    double best_fitness = -1.0;
    for (const auto& q : pop.members) {
        double fit = member_fitness(pop, q);
        sq += (fit - mean) * (fit - mean);
        if (fit > best_fitness || (fit == best_fitness && best != nullptr &&
                                   q.query_id < best->query_id)) {
            best = &q;
            best_fitness = fit;
        }
    }
    stats.mean_fitness = mean;
    stats.stddev_fitness =
        low == high ? 0.0 : std::sqrt(sq / static_cast<double>(pop.members.size()));
    stats.best_fitness = best_fitness;
    stats.best_query_id = best->query_id;
    stats.best_query = best->keywords;
    return stats;
}

namespace {

std::vector<RankedResult> final_ranking(const EvaluationContext& ctx, std::size_t pool,
                                        const GAConfig& cfg, const FitnessWeights& weights) {
    std::vector<RankedResult> ranked;
    ranked.reserve(ctx.matrix.row_ids.size());
    for (const auto& doc_id : ctx.matrix.row_ids) {
        const MergedEntry* entry = ctx.kept.find(doc_id);
        // With no single evaluating query in play, the document's position
        // credit is averaged over every list it appeared in.
        double credit = 0.0;
        for (const auto& [_, rank] : entry->appearances) {
            credit += position_credit(rank, cfg);
        }
        credit /= static_cast<double>(entry->appearances.size());
        auto factors = combine_factors(credit, *entry, static_cast<int>(pool), ctx.matrix,
                                       doc_id, weights);
        RankedResult r;
        r.doc_id = doc_id;
        r.weight = factors.w;
        r.f = factors.f;
        r.p = factors.p;
        r.s = factors.s;
        r.best_rank = entry->best_rank;
        r.hit_count = entry->hit_count;
        ranked.push_back(std::move(r));
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedResult& a, const RankedResult& b) {
        if (a.weight != b.weight) {
            return a.weight > b.weight;
        }
        return a.doc_id < b.doc_id;
    });
    if (ranked.size() > static_cast<std::size_t>(cfg.final_result_count)) {
        ranked.resize(static_cast<std::size_t>(cfg.final_result_count));
    }
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        ranked[i].rank = static_cast<int>(i) + 1;
    }
    return ranked;
}

}  // namespace

RunOutputs run_evolution_with_context(const EvolveInputs& in, const GAConfig& cfg,
                                      const FitnessWeights& weights, std::uint64_t seed,
                                      nlohmann::ordered_json config_snapshot) {
    cfg.validate();
    weights.validate();
    if (in.q0.size() < 2) {
        throw ConfigError("the key concept set needs at least 2 concepts");
    }
    if (cfg.pop_size >= static_cast<int>(in.q0.size()) / 2 && in.log != nullptr) {
        (*in.log) << "warning: pop_size " << cfg.pop_size << " >= |Q_o|/2 ("
                  << in.q0.size() / 2 << "); a larger concept pool is recommended\n";
    }

    Rng root(seed);
    QueryPopulation pop = init_population(in.q0, cfg, root);
    std::uint64_t next_id = static_cast<std::uint64_t>(cfg.pop_size);

    KPatternSet frozen;
    const KPatternSet* frozen_ptr = nullptr;
    EvaluationContext ctx = evaluate_queries(pop.members, in, cfg, weights, nullptr);
    if (!cfg.adapt_patterns) {
        frozen = ctx.patterns;
        frozen_ptr = &frozen;
    }
    pop.fitness = ctx.fitness;

    std::vector<GenerationStats> trace;
    trace.push_back(population_stats(pop));

    while (trace.back().stddev_fitness >= cfg.stability_epsilon &&
           static_cast<int>(trace.size()) < cfg.max_generations) {
        int generation = pop.generation + 1;
        auto pairs = select_parents(
            pop, root.substream("select", static_cast<std::uint64_t>(generation)),
            cfg.outbreeding);

        std::vector<Query> children;
        children.reserve(static_cast<std::size_t>(cfg.pop_size));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            auto [child1, child2] = crossover(
                pop.members[pairs[k].first], pop.members[pairs[k].second], in.synonyms, in.q0,
                root.substream("cross", static_cast<std::uint64_t>(generation), k));
            children.push_back(std::move(child1));
            if (children.size() < static_cast<std::size_t>(cfg.pop_size)) {
                children.push_back(std::move(child2));
            }
        }
        for (std::size_t c = 0; c < children.size(); ++c) {
            children[c] = mutate(
                children[c], in.q0, cfg.mutation_rate,
                root.substream("mutate", static_cast<std::uint64_t>(generation), c), in.log);
            children[c].query_id = next_id++;
        }

        // The intermediate pool (parents and children together) is evaluated
        // in one context so elite selection compares like with like.
        std::vector<Query> pool_members = pop.members;
        pool_members.insert(pool_members.end(), children.begin(), children.end());
        EvaluationContext pool_ctx = evaluate_queries(pool_members, in, cfg, weights, frozen_ptr);

        QueryPopulation elected = next_generation(pop, children, pool_ctx.fitness);

        // Re-evaluate the elected population on its own so the recorded
        // trace and the next parent selection use population-sized merges.
        ctx = evaluate_queries(elected.members, in, cfg, weights, frozen_ptr);
        elected.fitness = ctx.fitness;
        pop = std::move(elected);
        trace.push_back(population_stats(pop));
    }

    RunOutputs out{{}, std::move(ctx)};
    out.record.seed = seed;
    out.record.config = std::move(config_snapshot);
    std::uint64_t id_hash = fnv1a64(out.record.config.dump(), fnv1a64(std::to_string(seed)));
    out.record.run_id = "run-" + to_hex(id_hash);
    out.record.generations = std::move(trace);
    out.record.results =
        final_ranking(out.final_context, pop.members.size(), cfg, weights);
    return out;
}

RunRecord run_evolution(const EvolveInputs& in, const GAConfig& cfg,
                        const FitnessWeights& weights, std::uint64_t seed,
                        nlohmann::ordered_json config_snapshot) {
    return run_evolution_with_context(in, cfg, weights, seed, std::move(config_snapshot)).record;
}

}  // namespace evoquery
