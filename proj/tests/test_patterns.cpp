#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "evoquery/errors.hpp"
#include "evoquery/patterns.hpp"
#include "evoquery/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_helpers.hpp"

using namespace evoquery;
using testsupport::DenseVsmOracle;
using testsupport::make_corpus;
using testsupport::TempDir;
using testsupport::tokens_of;

namespace {

struct PatternFixture {
    Corpus corpus;
    VectorIndex index;
    KeyConceptSet q0;
    AuthorityDictionary authority;
    MergedResultSet kept;

    PatternFixture() {
        corpus = make_corpus({{"d1", "coal mine coal"},
                              {"d2", "coal extraction plan"},
                              {"d3", "mine economics"},
                              {"d4", "ore crusher"},
                              {"d5", "coal mine economics extraction"},
                              {"d6", "weather report"}});
        index = VectorIndex::build(corpus);
        q0 = KeyConceptSet::from_terms({"coal", "mine", "extraction", "economics"});
        TokenText def1 = tokens_of("coal is mined from seams");
        authority.add("coal", def1);
        TokenText def2 = tokens_of("extraction removes ore or coal");
        authority.add("extraction", def2);
        // merged rating order will be: d1 (rank1, 2 hits), d2 (rank1, 1 hit),
        // d3 (rank2), d5 (rank3), d4 (rank4)
        kept.add("d1", 1, 1);
        kept.add("d1", 2, 2);
        kept.add("d2", 2, 1);
        kept.add("d3", 1, 2);
        kept.add("d5", 1, 3);
        kept.add("d4", 2, 4);
    }
};

}  // namespace

TEST_SUITE("patterns") {

TEST_CASE("merged rating order sorts by best rank, hit count, doc id") {
    PatternFixture fx;
    auto order = merged_rating_order(fx.kept);
    CHECK(order == std::vector<std::string>{"d1", "d2", "d3", "d5", "d4"});
}

TEST_CASE("empty kept set leaves only the kd pattern") {
    PatternFixture fx;
    MergedResultSet empty;
    AuthorityDictionary no_auth;
    KPatternSet set = build_kpatterns(empty, fx.corpus, fx.q0, no_auth, fx.index, 5);
    CHECK_FALSE(set.ka.has_value());
    CHECK_FALSE(set.kb.has_value());
    CHECK_FALSE(set.kc.has_value());
    REQUIRE(set.kd.has_value());
    CHECK(set.present() == std::vector<PatternLabel>{PatternLabel::Kd});
}

TEST_CASE("top_k of one makes ka and kc identical") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 1);
    REQUIRE(set.ka.has_value());
    REQUIRE(set.kc.has_value());
    CHECK(set.ka->provenance == set.kc->provenance);
    CHECK(set.ka->vec.entries() == set.kc->vec.entries());
}

TEST_CASE("ka equals the vector of the concatenated top bodies") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    REQUIRE(set.ka.has_value());
    CHECK(set.ka->provenance == std::vector<std::string>{"d1", "d2", "d3"});
    // Hand concatenation of the three bodies in rating order.
    TokenText combined = tokens_of("coal mine coal coal extraction plan mine economics");
    DocVector expect = fx.index.vectorize(combined);
    CHECK(set.ka->vec.entries() == expect.entries());

    REQUIRE(set.kb.has_value());
    CHECK(set.kb->provenance == std::vector<std::string>{"coal", "extraction"});
    REQUIRE(set.kc.has_value());
    CHECK(set.kc->provenance == std::vector<std::string>{"d1"});
    REQUIRE(set.kd.has_value());
    DocVector kd_expect = fx.index.vectorize(tokens_of("coal economics extraction mine"));
    CHECK(set.kd->vec.entries() == kd_expect.entries());
}

TEST_CASE("kb is absent when no q0 concept has an authority definition") {
    PatternFixture fx;
    AuthorityDictionary other;
    TokenText def = tokens_of("unrelated definition");
    other.add("volcano", def);
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, other, fx.index, 3);
    CHECK_FALSE(set.kb.has_value());
}

TEST_CASE("matrix cell against kc is one for the kc source document") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    auto row = matrix.row("d1");
    REQUIRE(row.has_value());
    CHECK(matrix.value(*row, PatternLabel::Kc) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matrix cell is zero without informative shared terms") {
    Corpus corpus = make_corpus(
        {{"d1", "coal mine"}, {"d2", "ore iron"}, {"d3", "coal ore"}, {"d4", "mist"}});
    VectorIndex index = VectorIndex::build(corpus);
    KeyConceptSet q0 = KeyConceptSet::from_terms({"coal", "mine"});
    MergedResultSet kept;
    kept.add("d2", 1, 1);
    AuthorityDictionary no_auth;
    KPatternSet set = build_kpatterns(kept, corpus, q0, no_auth, index, 1);
    SimilarityMatrix matrix = similarity_matrix(kept, corpus, set, index);
    auto row = matrix.row("d2");
    REQUIRE(row.has_value());
    CHECK(matrix.value(*row, PatternLabel::Kd) == 0.0);
}

TEST_CASE("matrix equals the dense oracle cell by cell") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    REQUIRE(matrix.labels.size() == 4);
    REQUIRE(matrix.row_ids.size() == fx.kept.size());

    // Dense recomputation over the corpus vocabulary: pattern texts are
    // rebuilt by hand and compared with plain dense cosines.
    std::map<std::string, std::vector<std::string>> docs;
    for (const auto& [doc_id, doc] : fx.corpus.documents()) {
        docs[doc_id] = doc.body.tokens;
    }
    DenseVsmOracle oracle = DenseVsmOracle::build(docs);
    std::map<PatternLabel, std::vector<double>> pattern_dense;
    pattern_dense[PatternLabel::Ka] =
        oracle.vectorize(tokens_of("coal mine coal coal extraction plan mine economics").tokens);
    pattern_dense[PatternLabel::Kb] =
        oracle.vectorize(tokens_of("coal is mined from seams extraction removes ore or coal").tokens);
    pattern_dense[PatternLabel::Kc] = oracle.vectorize(tokens_of("coal mine coal").tokens);
    pattern_dense[PatternLabel::Kd] =
        oracle.vectorize(tokens_of("coal economics extraction mine").tokens);

    for (std::size_t r = 0; r < matrix.row_ids.size(); ++r) {
        for (auto label : matrix.labels) {
            double expect = DenseVsmOracle::cosine_dense(oracle.vectors.at(matrix.row_ids[r]),
                                                         pattern_dense.at(label));
            CHECK(matrix.value(r, label) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("every matrix value lies in the unit interval") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 2);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    for (const auto& row : matrix.values) {
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("rank_by over equal scores is ascending doc id order") {
    SimilarityMatrix matrix;
    matrix.row_ids = {"zeta", "alpha", "mid"};
    matrix.labels = {PatternLabel::Kd};
    matrix.values = {{0.5}, {0.5}, {0.5}};
    PatternRanking ranking = rank_by(matrix, PatternLabel::Kd);
    REQUIRE(ranking.entries.size() == 3);
    CHECK(ranking.entries[0].first == "alpha");
    CHECK(ranking.entries[1].first == "mid");
    CHECK(ranking.entries[2].first == "zeta");
}

TEST_CASE("single-pattern ranking equals an independent column sort") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    for (auto label : matrix.labels) {
        PatternRanking ranking = rank_by(matrix, label);
        // Independent sort oracle.
        std::vector<std::pair<std::string, double>> expect;
        auto c = matrix.col(label);
        for (std::size_t r = 0; r < matrix.row_ids.size(); ++r) {
            expect.emplace_back(matrix.row_ids[r], matrix.values[r][*c]);
        }
        std::stable_sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        REQUIRE(ranking.entries.size() == expect.size());
        for (std::size_t i = 0; i < expect.size(); ++i) {
            CHECK(ranking.entries[i].first == expect[i].first);
            CHECK(ranking.entries[i].second == expect[i].second);
        }
    }
}

TEST_CASE("degenerate blend equals the single-pattern ranking") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    PatternRanking single = rank_by(matrix, PatternLabel::Ka);
    PatternRanking blended = rank_by(
        matrix, std::map<PatternLabel, double>{{PatternLabel::Ka, 1.0}, {PatternLabel::Kb, 0.0}});
    REQUIRE(single.entries.size() == blended.entries.size());
    for (std::size_t i = 0; i < single.entries.size(); ++i) {
        CHECK(single.entries[i].first == blended.entries[i].first);
    }
}

TEST_CASE("rank_by is a permutation of the kept documents") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    PatternRanking ranking = rank_by(matrix, PatternLabel::Ka);
    std::set<std::string> in(matrix.row_ids.begin(), matrix.row_ids.end());
    std::set<std::string> out;
    for (const auto& [doc_id, _] : ranking.entries) {
        out.insert(doc_id);
    }
    CHECK(in == out);
}

TEST_CASE("scaling one pattern by a positive factor keeps its ranking order") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix before = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    PatternRanking order_before = rank_by(before, PatternLabel::Ka);

    std::vector<std::pair<TermId, double>> scaled;
    for (auto [t, w] : set.ka->vec.entries()) {
        scaled.emplace_back(t, w * 2.0);  // power of two: exact in floating point
    }
    set.ka->vec = DocVector(std::move(scaled));
    SimilarityMatrix after = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    PatternRanking order_after = rank_by(after, PatternLabel::Ka);
    REQUIRE(order_before.entries.size() == order_after.entries.size());
    for (std::size_t i = 0; i < order_before.entries.size(); ++i) {
        CHECK(order_before.entries[i].first == order_after.entries[i].first);
    }
}

TEST_CASE("weights on absent patterns are config errors") {
    PatternFixture fx;
    MergedResultSet empty;
    AuthorityDictionary no_auth;
    KPatternSet set = build_kpatterns(empty, fx.corpus, fx.q0, no_auth, fx.index, 3);
    MergedResultSet one;
    one.add("d1", 1, 1);
    SimilarityMatrix matrix = similarity_matrix(one, fx.corpus, set, fx.index);
    CHECK_THROWS_AS(rank_by(matrix, PatternLabel::Ka), ConfigError);
    CHECK_THROWS_AS(rank_by(matrix, std::map<PatternLabel, double>{{PatternLabel::Ka, 1.0}}),
                    ConfigError);
    CHECK_THROWS_AS(rank_by(matrix, std::map<PatternLabel, double>{{PatternLabel::Kd, 0.0}}),
                    ConfigError);
}

TEST_CASE("matrix TSV round-trips") {
    PatternFixture fx;
    KPatternSet set = build_kpatterns(fx.kept, fx.corpus, fx.q0, fx.authority, fx.index, 3);
    SimilarityMatrix matrix = similarity_matrix(fx.kept, fx.corpus, set, fx.index);
    TempDir dir("matrix");
    matrix.save_tsv(dir.file("matrix.tsv"));
    SimilarityMatrix reloaded = SimilarityMatrix::load_tsv(dir.file("matrix.tsv"));
    CHECK(reloaded.row_ids == matrix.row_ids);
    CHECK(reloaded.labels == matrix.labels);
    REQUIRE(reloaded.values.size() == matrix.values.size());
    for (std::size_t r = 0; r < matrix.values.size(); ++r) {
        for (std::size_t c = 0; c < matrix.values[r].size(); ++c) {
            CHECK(reloaded.values[r][c] == doctest::Approx(matrix.values[r][c]).epsilon(1e-12));
        }
    }
}

}  // TEST_SUITE
