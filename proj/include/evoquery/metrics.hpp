#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoquery/patterns.hpp"
#include "evoquery/store.hpp"

namespace evoquery {

// Position discount for rank r (1-based):
//   Standard  -> 1 / log2(r + 1)   (rank 1 undiscounted)
//   OneBased  -> 1 / log2(r + 2)
enum class DiscountMode { Standard, OneBased };

std::string to_string(DiscountMode mode);
DiscountMode parse_discount_mode(const std::string& mode);  // "standard" | "paper-one-based"

struct GradedRanking {
    std::string topic_id;
    std::vector<std::pair<std::string, int>> items;  // (doc_id, grade 0..3) in rank order
};

// Sum over positions of (2^grade - 1) * discount. Grades outside 0..3 are a
// DataError.
double dcg(std::span<const int> grades, DiscountMode mode = DiscountMode::Standard);
double dcg(const GradedRanking& ranking, DiscountMode mode = DiscountMode::Standard);

// DCG of the grades sorted descending: the constant Z of the ideal ranking.
double ideal_dcg(std::vector<int> grades, DiscountMode mode = DiscountMode::Standard);

// dcg / Z, with ndcg = 1 when Z = 0 (an all-irrelevant list cannot be
// ranked worse than ideally).
double ndcg(const GradedRanking& ranking, DiscountMode mode = DiscountMode::Standard);

// Per-position cumulative DCG, for plotting against the ideal curve.
std::vector<double> dcg_curve(std::span<const int> grades, DiscountMode mode);

struct RankingEval {
    double dcg_value = 0;
    double ndcg_value = 0;
    std::size_t n_ranked = 0;
    std::size_t n_unjudged = 0;
    std::vector<int> grades;            // in rank order
    std::vector<double> cumulative;     // cumulative DCG per position
};

struct EvalReport {
    std::string topic_id;
    DiscountMode mode = DiscountMode::Standard;
    std::map<std::string, RankingEval> rankings;  // keyed by ranking name
    double ideal = 0;                             // Z over the union pool
    std::vector<double> ideal_cumulative;
    std::vector<std::string> order_by_ndcg;       // best first, ties by name
};

// Evaluates each ranking against the judgments for one topic. Unjudged
// documents score 0 (counted in n_unjudged); the ideal Z is computed over
// the union of all ranked documents. A topic with no judged document at all
// is a DataError.
EvalReport evaluate_patterns(const std::map<std::string, PatternRanking>& rankings,
                             const RelevanceJudgments& judgments, const std::string& topic_id,
                             DiscountMode mode = DiscountMode::Standard);

nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);
// TSV: position, ideal cumulative DCG, one column per ranking.
std::string report_curve_tsv(const EvalReport& report);

}  // namespace evoquery
