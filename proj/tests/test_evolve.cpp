#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "evoquery/errors.hpp"
#include "evoquery/evolve.hpp"
#include "support/test_helpers.hpp"

using namespace evoquery;
using testsupport::make_corpus;
using testsupport::tokens_of;

namespace {

KeyConceptSet concepts(std::vector<std::string> terms) {
    return KeyConceptSet::from_terms(std::move(terms));
}

KeyConceptSet numbered_concepts(int n) {
    std::vector<std::string> terms;
    for (int i = 0; i < n; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "c%02d", i);
        terms.emplace_back(buf);
    }
    return concepts(std::move(terms));
}

QueryPopulation population_with_fitness(const std::vector<double>& fitness) {
    QueryPopulation pop;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        Query q;
        q.query_id = i;
        q.keywords = {"k" + std::to_string(i)};
        pop.members.push_back(q);
        pop.fitness[q.query_id] = fitness[i];
    }
    return pop;
}

// Synonym closure of q0 by BFS over the dictionary, for gene-membership
// checks.
std::set<std::string> synonym_closure(const KeyConceptSet& q0, const SynonymDictionary& dict) {
    std::set<std::string> closed(q0.concepts.begin(), q0.concepts.end());
    std::vector<std::string> frontier(closed.begin(), closed.end());
    while (!frontier.empty()) {
        std::string term = frontier.back();
        frontier.pop_back();
        for (const auto& syn : dict.synonyms(term)) {
            if (closed.insert(syn).second) {
                frontier.push_back(syn);
            }
        }
    }
    return closed;
}

// A small evolution testbed: 12 docs, half about one coherent subject.
struct EvolveFixture {
    Corpus corpus;
    VectorIndex index;
    KeyConceptSet q0;
    OfflineBackend backend;
    SynonymDictionary synonyms;
    AuthorityDictionary authority;
    FilterSettings filter;

    EvolveFixture()
        : corpus(make_corpus({
              {"t1", "coal mine extraction coal economics"},
              {"t2", "coal extraction economics mine plan"},
              {"t3", "mine coal economics extraction output"},
              {"t4", "coal mine economics survey"},
              {"t5", "extraction mine coal report"},
              {"t6", "economics coal extraction mine"},
              {"j1", "weather garden rain flower"},
              {"j2", "garden soccer match rain"},
              {"j3", "opera concert stage weather"},
              {"j4", "soccer stadium crowd"},
              {"j5", "flower festival concert"},
              {"j6", "rain umbrella stage"},
          })),
          index(VectorIndex::build(corpus)),
          q0(concepts({"coal", "mine", "extraction", "economics", "weather", "garden", "rain",
                       "soccer", "opera", "concert", "flower", "stage"})),
          backend(corpus, index) {}

    EvolveInputs inputs() {
        return EvolveInputs{corpus,    index,  backend, q0, synonyms,
                            authority, filter, 3,       1,  nullptr};
    }
};

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("init_population draws the paper's shape: 15 queries of 3 distinct concepts") {
    KeyConceptSet q0 = numbered_concepts(50);
    GAConfig cfg;  // N=15, m=3 defaults
    Rng rng(42);
    QueryPopulation pop = init_population(q0, cfg, rng);
    REQUIRE(pop.members.size() == 15);
    CHECK(pop.generation == 0);
    CHECK(pop.fitness.empty());
    for (const auto& q : pop.members) {
        REQUIRE(q.keywords.size() == 3);
        std::set<std::string> distinct(q.keywords.begin(), q.keywords.end());
        CHECK(distinct.size() == 3);
        for (const auto& k : q.keywords) {
            CHECK(q0.contains(k));
        }
    }
}

TEST_CASE("m equal to the pool size forces every query to be the whole pool") {
    KeyConceptSet q0 = numbered_concepts(4);
    GAConfig cfg;
    cfg.pop_size = 3;
    cfg.keywords_per_query = 4;
    Rng rng(7);
    QueryPopulation pop = init_population(q0, cfg, rng);
    for (const auto& q : pop.members) {
        std::set<std::string> distinct(q.keywords.begin(), q.keywords.end());
        CHECK(distinct == std::set<std::string>(q0.concepts.begin(), q0.concepts.end()));
    }
}

TEST_CASE("init_population is seed-deterministic and rejects oversized m") {
    KeyConceptSet q0 = numbered_concepts(10);
    GAConfig cfg;
    cfg.pop_size = 5;
    cfg.keywords_per_query = 3;
    Rng a(99), b(99);
    QueryPopulation pa = init_population(q0, cfg, a);
    QueryPopulation pb = init_population(q0, cfg, b);
    for (std::size_t i = 0; i < pa.members.size(); ++i) {
        CHECK(pa.members[i].keywords == pb.members[i].keywords);
    }
    cfg.keywords_per_query = 11;
    Rng c(1);
    CHECK_THROWS_AS(init_population(q0, cfg, c), ConfigError);
}

TEST_CASE("result weight is 1 when every factor is maximal") {
    GAConfig cfg;  // P = 10
    FitnessWeights weights;  // equal f, p, s; a = 0
    SimilarityMatrix matrix;
    matrix.row_ids = {"doc"};
    matrix.labels = {PatternLabel::Ka};
    matrix.values = {{1.0}};
    MergedEntry entry;
    entry.best_rank = 1;
    entry.hit_count = 15;
    auto factors = result_weight(1, entry, 15, matrix, "doc", cfg, weights);
    CHECK(factors.f == 1.0);
    CHECK(factors.p == 1.0);
    CHECK(factors.s == 1.0);
    CHECK(factors.w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("result weight with minimal factors matches the closed form") {
    GAConfig cfg;  // P = 10
    cfg.pop_size = 15;
    FitnessWeights weights;
    SimilarityMatrix matrix;
    matrix.row_ids = {"doc"};
    matrix.labels = {PatternLabel::Ka};
    matrix.values = {{0.0}};
    MergedEntry entry;
    entry.best_rank = 10;
    entry.hit_count = 1;
    auto factors = result_weight(10, entry, 15, matrix, "doc", cfg, weights);
    double expect = (1.0 / 10.0 + 1.0 / 15.0 + 0.0) / 3.0;
    CHECK(factors.w == doctest::Approx(expect).epsilon(1e-12));
    CHECK(factors.f == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(factors.p == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("result weights match an independent recomputation on a fixture") {
    GAConfig cfg;
    cfg.result_budget = 8;
    FitnessWeights weights;
    weights.alpha_f = 2.0;
    weights.alpha_p = 1.0;
    weights.alpha_s = 3.0;
    weights.alpha_a = 0.5;
    weights.pattern_blend = {{PatternLabel::Ka, 0.25}, {PatternLabel::Kd, 0.75}};
    SimilarityMatrix matrix;
    matrix.labels = {PatternLabel::Ka, PatternLabel::Kd};
    Rng rng(5);
    int n_queries = 12;
    for (int d = 0; d < 10; ++d) {
        matrix.row_ids.push_back("doc" + std::to_string(d));
        matrix.values.push_back({rng.unit_double(), rng.unit_double()});
    }
    for (int d = 0; d < 10; ++d) {
        int rank = 1 + static_cast<int>(rng.below(8));
        MergedEntry entry;
        entry.best_rank = rank;
        entry.hit_count = 1 + static_cast<int>(rng.below(12));
        std::string doc_id = "doc" + std::to_string(d);
        auto factors = result_weight(rank, entry, n_queries, matrix, doc_id, cfg, weights);
        // Spreadsheet-style recomputation from scratch.
        double f = (8.0 - rank + 1.0) / 8.0;
        double p = entry.hit_count / 12.0;
        double s = (0.25 * matrix.values[d][0] + 0.75 * matrix.values[d][1]) / (0.25 + 0.75);
        double w = (2.0 * f + 1.0 * p + 3.0 * s + 0.5 * 1.0) / (2.0 + 1.0 + 3.0 + 0.5);
        CHECK(factors.w == doctest::Approx(w).epsilon(1e-9));
        CHECK(factors.w >= 0.0);
        CHECK(factors.w <= 1.0);
    }
}

TEST_CASE("all-zero fitness weights are rejected") {
    FitnessWeights weights;
    weights.alpha_f = weights.alpha_p = weights.alpha_s = weights.alpha_a = 0.0;
    CHECK_THROWS_AS(weights.validate(), ConfigError);
    weights.alpha_f = -1.0;
    CHECK_THROWS_AS(weights.validate(), ConfigError);
}

TEST_CASE("query fitness averages kept results and is zero on empty lists") {
    GAConfig cfg;
    FitnessWeights weights;
    weights.alpha_f = 0.0;
    weights.alpha_p = 0.0;
    weights.alpha_s = 1.0;  // fitness = mean of s values
    SimilarityMatrix matrix;
    matrix.labels = {PatternLabel::Ka};
    matrix.row_ids = {"a", "b", "c"};
    matrix.values = {{0.5}, {0.5}, {0.9}};
    MergedResultSet kept;
    kept.add("a", 1, 1);
    kept.add("b", 1, 2);
    kept.add("c", 1, 3);

    CHECK(query_fitness({}, kept, matrix, 1, cfg, weights) == 0.0);

    std::vector<SearchResult> two = {{"a", 1, 0.9}, {"b", 2, 0.8}};
    CHECK(query_fitness(two, kept, matrix, 1, cfg, weights) ==
          doctest::Approx(0.5).epsilon(1e-12));

    std::vector<SearchResult> three = {{"a", 1, 0.9}, {"b", 2, 0.8}, {"c", 3, 0.7}};
    double expect = (0.5 + 0.5 + 0.9) / 3.0;  // hand sum
    CHECK(query_fitness(three, kept, matrix, 1, cfg, weights) ==
          doctest::Approx(expect).epsilon(1e-12));

    // Filtered-out docs do not contribute.
    MergedResultSet only_a;
    only_a.add("a", 1, 1);
    CHECK(query_fitness(three, only_a, matrix, 1, cfg, weights) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("outbreeding pairs the random pick with the farthest member") {
    // Fitness by id: q0 -> 0.9, q1 -> 0.5, q2 -> 0.1. From the middle
    // member both extremes tie at 0.4; the smaller query id (0.9) wins.
    QueryPopulation pop = population_with_fitness({0.9, 0.5, 0.1});
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        auto pairs = select_parents(pop, Rng(seed), OutbreedingDistance::Fitness);
        REQUIRE(pairs.size() == 2);  // ceil(3/2)
        for (const auto& [first, second] : pairs) {
            CHECK(first != second);
            if (first == 1) {
                CHECK(second == 0);  // tie broken toward the smaller id
            } else if (first == 0) {
                CHECK(second == 2);  // farthest from 0.9 is 0.1
            } else {
                CHECK(second == 0);  // farthest from 0.1 is 0.9
            }
        }
    }
}

TEST_CASE("all-equal fitness falls back to the smallest other query id") {
    QueryPopulation pop = population_with_fitness({0.4, 0.4, 0.4, 0.4});
    auto pairs = select_parents(pop, Rng(3), OutbreedingDistance::Fitness);
    for (const auto& [first, second] : pairs) {
        CHECK(second == (first == 0 ? 1 : 0));
    }
}

TEST_CASE("parent selection needs two members") {
    QueryPopulation pop = population_with_fitness({0.4});
    CHECK_THROWS_AS(select_parents(pop, Rng(1), OutbreedingDistance::Fitness), DataError);
}

TEST_CASE("hamming outbreeding measures keyword overlap") {
    QueryPopulation pop;
    auto add = [&](std::uint64_t id, std::vector<std::string> kw) {
        Query q;
        q.query_id = id;
        q.keywords = std::move(kw);
        pop.members.push_back(q);
        pop.fitness[id] = 0.5;
    };
    add(0, {"a", "b", "c"});
    add(1, {"a", "b", "d"});
    add(2, {"x", "y", "z"});
    auto pairs = select_parents(pop, Rng(12), OutbreedingDistance::Hamming);
    for (const auto& [first, second] : pairs) {
        if (first != 2) {
            CHECK(second == 2);  // disjoint keywords are farthest
        }
    }
}

TEST_CASE("crossover of identical parents without synonyms reproduces the parent") {
    KeyConceptSet q0 = concepts({"x", "c", "d", "e"});
    SynonymDictionary empty;
    Query a{1, {"x", "c", "d"}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto [c1, c2] = crossover(a, a, empty, q0, Rng(seed));
        CHECK(c1.keywords == a.keywords);
        CHECK(c2.keywords == a.keywords);
    }
}

TEST_CASE("the cross-parent gene arrives as its synonym") {
    // When the coin sends b's first gene into child1, the dictionary entry
    // x -> y must arrive as y.
    KeyConceptSet q0 = concepts({"x", "c", "d", "e", "g"});
    SynonymDictionary syn;
    syn.add("x", "y");
    Query a{1, {"x", "c", "d"}};
    Query b{2, {"x", "e", "g"}};
    bool saw_substitution = false;
    for (std::uint64_t seed = 0; seed < 64 && !saw_substitution; ++seed) {
        auto [c1, c2] = crossover(a, b, syn, q0, Rng(seed));
        if (c1.keywords[0] == "y") {
            CHECK(c2.keywords[0] == "x");  // complement takes a's gene
            saw_substitution = true;
        } else {
            // child1 took a's gene, so the synonym lands in child2.
            CHECK(c1.keywords[0] == "x");
            CHECK(c2.keywords[0] == "y");
            saw_substitution = true;
        }
    }
    CHECK(saw_substitution);
}

TEST_CASE("crossover children stay distinct, sized m, and inside the gene pool") {
    KeyConceptSet q0 = numbered_concepts(12);
    SynonymDictionary syn;
    syn.add("c00", "alt00");
    syn.add("c01", "alt01");
    syn.add("c02", "alt02");
    syn.apply_symmetric_closure();
    std::set<std::string> closure = synonym_closure(q0, syn);

    Query a{1, {"c00", "c03", "c04", "c05"}};
    Query b{2, {"c01", "c02", "c04", "c06"}};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto [c1, c2] = crossover(a, b, syn, q0, Rng(seed));
        for (const Query* child : {&c1, &c2}) {
            REQUIRE(child->keywords.size() == 4);
            std::set<std::string> distinct(child->keywords.begin(), child->keywords.end());
            CHECK(distinct.size() == 4);
            for (const auto& gene : child->keywords) {
                CHECK(closure.contains(gene));
            }
        }
    }
}

TEST_CASE("mutation at rate zero is the identity") {
    KeyConceptSet q0 = numbered_concepts(6);
    Query q{1, {"c00", "c01", "c02"}};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CHECK(mutate(q, q0, 0.0, Rng(seed)).keywords == q.keywords);
    }
}

TEST_CASE("mutation at rate one with a single spare concept swaps exactly one gene") {
    KeyConceptSet q0 = concepts({"a", "b", "c", "z"});
    Query q{1, {"a", "b", "c"}};
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Query mutated = mutate(q, q0, 1.0, Rng(seed));
        REQUIRE(mutated.keywords.size() == 3);
        int changed = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (mutated.keywords[i] != q.keywords[i]) {
                ++changed;
                CHECK(mutated.keywords[i] == "z");
            }
        }
        CHECK(changed == 1);
    }
}

TEST_CASE("mutation is a no-op when no spare concepts exist") {
    KeyConceptSet q0 = concepts({"a", "b", "c"});
    Query q{1, {"a", "b", "c"}};
    CHECK(mutate(q, q0, 1.0, Rng(4)).keywords == q.keywords);
}

TEST_CASE("mutated gene positions are uniform over 1000 seeded trials") {
    KeyConceptSet q0 = numbered_concepts(10);
    Query q{1, {"c00", "c01", "c02", "c03", "c04"}};
    const int trials = 1000;
    const int m = 5;
    std::vector<int> position_counts(m, 0);
    Rng root(2718);
    for (int t = 0; t < trials; ++t) {
        Query mutated = mutate(q, q0, 1.0, root.substream("trial", t));
        for (int i = 0; i < m; ++i) {
            if (mutated.keywords[static_cast<std::size_t>(i)] !=
                q.keywords[static_cast<std::size_t>(i)]) {
                position_counts[static_cast<std::size_t>(i)] += 1;
            }
        }
    }
    // Binomial(1000, 1/5): mean 200, sigma = sqrt(1000 * 0.2 * 0.8) = 12.65.
    double mean = trials / static_cast<double>(m);
    double sigma = std::sqrt(trials * (1.0 / m) * (1.0 - 1.0 / m));
    for (int i = 0; i < m; ++i) {
        CHECK(std::abs(position_counts[static_cast<std::size_t>(i)] - mean) <= 3.0 * sigma);
    }
}

TEST_CASE("elite selection keeps parents when all children are worse") {
    QueryPopulation parents = population_with_fitness({0.9, 0.8, 0.7});
    std::vector<Query> children;
    std::map<std::uint64_t, double> fitness = parents.fitness;
    for (std::uint64_t i = 0; i < 3; ++i) {
        Query c;
        c.query_id = 100 + i;
        c.keywords = {"child"};
        children.push_back(c);
        fitness[c.query_id] = 0.1;
    }
    QueryPopulation next = next_generation(parents, children, fitness);
    CHECK(next.generation == 1);
    REQUIRE(next.members.size() == 3);
    for (const auto& q : next.members) {
        CHECK(q.query_id < 100);
    }
}

TEST_CASE("elite selection promotes children when all are better") {
    QueryPopulation parents = population_with_fitness({0.1, 0.2, 0.3});
    std::vector<Query> children;
    std::map<std::uint64_t, double> fitness = parents.fitness;
    for (std::uint64_t i = 0; i < 3; ++i) {
        Query c;
        c.query_id = 100 + i;
        c.keywords = {"child"};
        children.push_back(c);
        fitness[c.query_id] = 0.5 + 0.1 * static_cast<double>(i);
    }
    QueryPopulation next = next_generation(parents, children, fitness);
    for (const auto& q : next.members) {
        CHECK(q.query_id >= 100);
    }
}

TEST_CASE("elite selection equals a brute-force sort of the pooled members") {
    Rng rng(515);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + rng.below(8);
        QueryPopulation parents;
        std::map<std::uint64_t, double> fitness;
        struct PoolItem {
            std::uint64_t id;
            double fit;
            bool is_child;
        };
        std::vector<PoolItem> pool;
        for (std::size_t i = 0; i < n; ++i) {
            Query q;
            q.query_id = i;
            q.keywords = {"p"};
            parents.members.push_back(q);
            double fit = rng.below(5) / 4.0;  // coarse grid forces ties
            parents.fitness[q.query_id] = fit;
            fitness[q.query_id] = fit;
            pool.push_back({q.query_id, fit, false});
        }
        std::vector<Query> children;
        for (std::size_t i = 0; i < n; ++i) {
            Query c;
            c.query_id = 1000 + i;
            c.keywords = {"c"};
            children.push_back(c);
            double fit = rng.below(5) / 4.0;
            fitness[c.query_id] = fit;
            pool.push_back({c.query_id, fit, true});
        }
        QueryPopulation next = next_generation(parents, children, fitness);
        std::sort(pool.begin(), pool.end(), [](const PoolItem& a, const PoolItem& b) {
            if (a.fit != b.fit) return a.fit > b.fit;
            if (a.is_child != b.is_child) return !a.is_child;
            return a.id < b.id;
        });
        REQUIRE(next.members.size() == n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(next.members[i].query_id == pool[i].id);
        }
    }
}

TEST_CASE("a single evaluated generation is recorded when max_generations is 1") {
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 4;
    cfg.keywords_per_query = 2;
    cfg.result_budget = 5;
    cfg.max_generations = 1;
    FitnessWeights weights;
    RunRecord record = run_evolution(fx.inputs(), cfg, weights, 31);
    CHECK(record.generations.size() == 1);
    CHECK(record.generations[0].generation == 0);
    CHECK_FALSE(record.results.empty());
}

TEST_CASE("a uniform population stabilizes immediately") {
    // One concept pool of exactly m concepts: every initial query is the
    // same keyword set, so fitness variance is zero at generation 0.
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 3;
    cfg.keywords_per_query = 2;
    cfg.result_budget = 5;
    cfg.mutation_rate = 0.0;
    cfg.max_generations = 10;
    FitnessWeights weights;
    KeyConceptSet tiny = concepts({"coal", "mine"});
    EvolveInputs inputs = fx.inputs();
    EvolveInputs narrowed{inputs.corpus,  inputs.index,    inputs.backend, tiny,
                          inputs.synonyms, inputs.authority, inputs.filter,  3,
                          1,               nullptr};
    RunRecord record = run_evolution(narrowed, cfg, weights, 5);
    REQUIRE(record.generations.size() == 1);
    CHECK(record.generations[0].stddev_fitness == 0.0);
}

TEST_CASE("per-generation invariants hold across an evolution run") {
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 6;
    cfg.keywords_per_query = 3;
    cfg.result_budget = 5;
    cfg.max_generations = 6;
    cfg.stability_epsilon = 0.0;  // run to the generation cap
    FitnessWeights weights;
    RunRecord record = run_evolution(fx.inputs(), cfg, weights, 1234);
    CHECK(record.generations.size() == 6);
    for (const auto& g : record.generations) {
        CHECK(g.mean_fitness >= 0.0);
        CHECK(g.mean_fitness <= 1.0);
        CHECK(g.best_fitness >= g.mean_fitness);
        CHECK(g.stddev_fitness >= 0.0);
        CHECK(g.best_query.size() == 3);
    }
    for (const auto& r : record.results) {
        CHECK(r.weight >= 0.0);
        CHECK(r.weight <= 1.0);
    }
}

TEST_CASE("identical seeds reproduce identical run records") {
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 5;
    cfg.keywords_per_query = 2;
    cfg.result_budget = 4;
    cfg.max_generations = 4;
    FitnessWeights weights;
    RunRecord a = run_evolution(fx.inputs(), cfg, weights, 777);
    RunRecord b = run_evolution(fx.inputs(), cfg, weights, 777);
    CHECK(a == b);
    RunRecord c = run_evolution(fx.inputs(), cfg, weights, 778);
    CHECK_FALSE(c == a);
}

TEST_CASE("worker count does not change the outcome") {
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 5;
    cfg.keywords_per_query = 2;
    cfg.result_budget = 4;
    cfg.max_generations = 3;
    FitnessWeights weights;
    EvolveInputs serial = fx.inputs();
    RunRecord a = run_evolution(serial, cfg, weights, 99);
    EvolveInputs parallel = fx.inputs();
    parallel.workers = 4;
    RunRecord b = run_evolution(parallel, cfg, weights, 99);
    CHECK(a == b);
}

TEST_CASE("with frozen patterns and no cohort factor, max fitness never decreases") {
    EvolveFixture fx;
    GAConfig cfg;
    cfg.pop_size = 6;
    cfg.keywords_per_query = 2;
    cfg.result_budget = 5;
    cfg.max_generations = 8;
    cfg.stability_epsilon = 0.0;
    cfg.adapt_patterns = false;
    FitnessWeights weights;
    weights.alpha_p = 0.0;  // p depends on the cohort; drop it so fitness is
                            // a pure function of the query
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        RunRecord record = run_evolution(fx.inputs(), cfg, weights, seed);
        for (std::size_t g = 1; g < record.generations.size(); ++g) {
            CHECK(record.generations[g].best_fitness >=
                  record.generations[g - 1].best_fitness - 1e-12);
        }
    }
}

TEST_CASE("a population too large for the concept pool warns") {
    EvolveFixture fx;  // 12 concepts
    GAConfig cfg;
    cfg.pop_size = 6;  // 6 >= 12/2
    cfg.keywords_per_query = 2;
    cfg.result_budget = 4;
    cfg.max_generations = 1;
    FitnessWeights weights;
    std::ostringstream log;
    EvolveInputs inputs = fx.inputs();
    inputs.log = &log;
    run_evolution(inputs, cfg, weights, 9);
    CHECK(log.str().find("warning") != std::string::npos);
}

TEST_CASE("gene membership stays inside the concept pool plus synonym closure") {
    EvolveFixture fx;
    fx.synonyms.add("coal", "anthracite");
    fx.synonyms.add("mine", "pit");
    fx.synonyms.apply_symmetric_closure();
    std::set<std::string> closure = synonym_closure(fx.q0, fx.synonyms);
    GAConfig cfg;
    cfg.pop_size = 6;
    cfg.keywords_per_query = 3;
    cfg.result_budget = 5;
    cfg.max_generations = 5;
    cfg.stability_epsilon = 0.0;
    FitnessWeights weights;
    RunOutputs out = run_evolution_with_context(fx.inputs(), cfg, weights, 2020);
    // The final context's lists cover the last evaluated population.
    for (const auto& g : out.record.generations) {
        for (const auto& k : g.best_query) {
            CHECK(closure.contains(k));
        }
    }
}

}  // TEST_SUITE
