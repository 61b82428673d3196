#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evoquery/engine.hpp"
#include "evoquery/store.hpp"
#include "evoquery/textcore.hpp"
#include "evoquery/vsm.hpp"

namespace evoquery {

// The four reference-text kinds:
//   ka — concatenation of the top-ranked kept documents
//   kb — authority-dictionary definitions of the key concepts
//   kc — the single best-rated kept document
//   kd — the key concept set itself
enum class PatternLabel { Ka, Kb, Kc, Kd };

inline constexpr std::array<PatternLabel, 4> kAllPatternLabels = {
    PatternLabel::Ka, PatternLabel::Kb, PatternLabel::Kc, PatternLabel::Kd};

std::string to_string(PatternLabel label);
PatternLabel parse_pattern_label(const std::string& label);  // ConfigError on junk

struct KPattern {
    DocVector vec;
    std::vector<std::string> provenance;  // doc ids or terms that built it
};

struct KPatternSet {
    std::optional<KPattern> ka, kb, kc, kd;

    const std::optional<KPattern>& get(PatternLabel label) const;
    bool has(PatternLabel label) const { return get(label).has_value(); }
    std::vector<PatternLabel> present() const;
};

// Rating order of the merged set before re-ranking: best_rank ascending,
// then hit_count descending, then doc_id.
std::vector<std::string> merged_rating_order(const MergedResultSet& results);

// ka/kc come from the kept results, kb from authority definitions of q0
// concepts, kd from q0 itself. Missing inputs leave the pattern absent
// rather than zero; kd is always built.
KPatternSet build_kpatterns(const MergedResultSet& kept, const Corpus& corpus,
                            const KeyConceptSet& q0, const AuthorityDictionary& authority,
                            const VectorIndex& index, int top_k);

// Same construction over an already-ordered kept list (e.g. reloaded from a
// persisted run).
KPatternSet build_kpatterns(const std::vector<std::string>& ordered_kept, const Corpus& corpus,
                            const KeyConceptSet& q0, const AuthorityDictionary& authority,
                            const VectorIndex& index, int top_k);

struct SimilarityMatrix {
    std::vector<std::string> row_ids;        // merged rating order
    std::vector<PatternLabel> labels;        // present patterns
    std::vector<std::vector<double>> values; // [row][col], each in [0,1]

    std::optional<std::size_t> col(PatternLabel label) const;
    std::optional<std::size_t> row(const std::string& doc_id) const;
    double value(std::size_t row, PatternLabel label) const;  // ConfigError if absent

    void save_tsv(const std::filesystem::path& path) const;
    static SimilarityMatrix load_tsv(const std::filesystem::path& path);

private:
    mutable std::map<std::string, std::size_t> row_index_;  // built lazily
};

// M[d, k] = cosine(vector(d), pattern_k) over the kept documents.
SimilarityMatrix similarity_matrix(const MergedResultSet& kept, const Corpus& corpus,
                                   const KPatternSet& patterns, const VectorIndex& index,
                                   int workers = 1);

SimilarityMatrix similarity_matrix(const std::vector<std::string>& ordered_kept,
                                   const Corpus& corpus, const KPatternSet& patterns,
                                   const VectorIndex& index, int workers = 1);

struct PatternRanking {
    std::string mode;                                   // "ka" or "blend(...)"
    std::vector<std::pair<std::string, double>> entries;  // descending score
};

// Ranking by one pattern column.
PatternRanking rank_by(const SimilarityMatrix& matrix, PatternLabel label);

// Ranking by a convex blend of pattern columns. Weights must be
// nonnegative, not all zero, and only name present patterns.
PatternRanking rank_by(const SimilarityMatrix& matrix,
                       const std::map<PatternLabel, double>& blend);

// Blend score for one row, shared with the GA's s factor.
double blend_score(const SimilarityMatrix& matrix, std::size_t row,
                   const std::map<PatternLabel, double>& blend);

}  // namespace evoquery
