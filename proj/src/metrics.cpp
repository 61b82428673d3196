#include "evoquery/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "evoquery/errors.hpp"

namespace evoquery {

std::string to_string(DiscountMode mode) {
    return mode == DiscountMode::Standard ? "standard" : "paper-one-based";
}

DiscountMode parse_discount_mode(const std::string& mode) {
    if (mode == "standard") {
        return DiscountMode::Standard;
    }
    if (mode == "paper-one-based" || mode == "one-based") {
        return DiscountMode::OneBased;
    }
    throw ConfigError("unknown discount mode: \"" + mode +
                      "\" (expected standard|paper-one-based)");
}

namespace {

double discount(std::size_t rank, DiscountMode mode) {
    double offset = mode == DiscountMode::Standard ? 1.0 : 2.0;
    return 1.0 / std::log2(static_cast<double>(rank) + offset);
}

void check_grade(int grade) {
    if (grade < 0 || grade > 3) {
        throw DataError("relevance grade out of range 0..3: " + std::to_string(grade));
    }
}

}  // namespace

double dcg(std::span<const int> grades, DiscountMode mode) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grades.size(); ++i) {
        check_grade(grades[i]);
        double gain = static_cast<double>((1 << grades[i]) - 1);
        sum += gain * discount(i + 1, mode);
    }
    return sum;
}

double dcg(const GradedRanking& ranking, DiscountMode mode) {
    std::vector<int> grades;
    grades.reserve(ranking.items.size());
    for (const auto& [_, grade] : ranking.items) {
        grades.push_back(grade);
    }
    return dcg(grades, mode);
}

double ideal_dcg(std::vector<int> grades, DiscountMode mode) {
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    return dcg(grades, mode);
}

double ndcg(const GradedRanking& ranking, DiscountMode mode) {
    std::vector<int> grades;
    grades.reserve(ranking.items.size());
    for (const auto& [_, grade] : ranking.items) {
        grades.push_back(grade);
    }
    double z = ideal_dcg(grades, mode);
    if (z == 0.0) {
        return 1.0;
    }
    return dcg(grades, mode) / z;
}

std::vector<double> dcg_curve(std::span<const int> grades, DiscountMode mode) {
    std::vector<double> curve;
    curve.reserve(grades.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < grades.size(); ++i) {
        check_grade(grades[i]);
        sum += static_cast<double>((1 << grades[i]) - 1) * discount(i + 1, mode);
        curve.push_back(sum);
    }
    return curve;
}

EvalReport evaluate_patterns(const std::map<std::string, PatternRanking>& rankings,
                             const RelevanceJudgments& judgments, const std::string& topic_id,
                             DiscountMode mode) {
    if (rankings.empty()) {
        throw DataError("no rankings to evaluate for topic " + topic_id);
    }
    EvalReport report;
    report.topic_id = topic_id;
    report.mode = mode;

    std::map<std::string, int> union_grades;
    bool any_judged = false;
    for (const auto& [name, ranking] : rankings) {
        for (const auto& [doc_id, _] : ranking.entries) {
            bool judged = judgments.has(topic_id, doc_id);
            any_judged = any_judged || judged;
            union_grades[doc_id] = judged ? judgments.grade(topic_id, doc_id) : 0;
        }
    }
    if (!any_judged) {
        throw DataError("no ranked document is judged for topic " + topic_id);
    }

    std::vector<int> pool;
    pool.reserve(union_grades.size());
    for (const auto& [_, grade] : union_grades) {
        pool.push_back(grade);
    }
    report.ideal = ideal_dcg(pool, mode);
    std::sort(pool.begin(), pool.end(), std::greater<int>());
    report.ideal_cumulative = dcg_curve(pool, mode);

    for (const auto& [name, ranking] : rankings) {
        RankingEval eval;
        eval.n_ranked = ranking.entries.size();
        eval.grades.reserve(ranking.entries.size());
        for (const auto& [doc_id, _] : ranking.entries) {
            if (judgments.has(topic_id, doc_id)) {
                eval.grades.push_back(judgments.grade(topic_id, doc_id));
            } else {
                eval.grades.push_back(0);
                ++eval.n_unjudged;
            }
        }
        eval.dcg_value = dcg(eval.grades, mode);
        eval.ndcg_value = report.ideal == 0.0 ? 1.0 : eval.dcg_value / report.ideal;
        eval.cumulative = dcg_curve(eval.grades, mode);
        report.rankings.emplace(name, std::move(eval));
    }

    for (const auto& [name, _] : report.rankings) {
        report.order_by_ndcg.push_back(name);
    }
    std::sort(report.order_by_ndcg.begin(), report.order_by_ndcg.end(),
              [&](const std::string& a, const std::string& b) {
                  double na = report.rankings.at(a).ndcg_value;
                  double nb = report.rankings.at(b).ndcg_value;
                  if (na != nb) {
                      return na > nb;
                  }
                  return a < b;
              });
    return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["topic_id"] = report.topic_id;
    j["discount"] = to_string(report.mode);
    j["ideal_dcg"] = report.ideal;
    nlohmann::ordered_json rankings = nlohmann::ordered_json::object();
    for (const auto& [name, eval] : report.rankings) {
        nlohmann::ordered_json e;
        e["dcg"] = eval.dcg_value;
        e["ndcg"] = eval.ndcg_value;
        e["n_ranked"] = eval.n_ranked;
        e["n_unjudged"] = eval.n_unjudged;
        rankings[name] = std::move(e);
    }
    j["rankings"] = std::move(rankings);
    j["order_by_ndcg"] = report.order_by_ndcg;
    return j;
}

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    out << "topic " << report.topic_id << "  (discount: " << to_string(report.mode)
        << ", ideal DCG " << std::fixed << std::setprecision(4) << report.ideal << ")\n";
    out << std::left << std::setw(10) << "ranking" << std::right << std::setw(10) << "DCG"
        << std::setw(10) << "NDCG" << std::setw(10) << "ranked" << std::setw(10) << "unjudged"
        << '\n';
    for (const auto& name : report.order_by_ndcg) {
        const auto& eval = report.rankings.at(name);
        out << std::left << std::setw(10) << name << std::right << std::fixed
            << std::setprecision(4) << std::setw(10) << eval.dcg_value << std::setw(10)
            << eval.ndcg_value << std::setw(10) << eval.n_ranked << std::setw(10)
            << eval.n_unjudged << '\n';
    }
    return out.str();
}

std::string report_curve_tsv(const EvalReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "position\tideal";
    for (const auto& [name, _] : report.rankings) {
        out << '\t' << name;
    }
    out << '\n';
    std::size_t depth = report.ideal_cumulative.size();
    for (const auto& [_, eval] : report.rankings) {
        depth = std::max(depth, eval.cumulative.size());
    }
    for (std::size_t i = 0; i < depth; ++i) {
        out << (i + 1);
        out << '\t';
        if (i < report.ideal_cumulative.size()) {
            out << report.ideal_cumulative[i];
        } else if (!report.ideal_cumulative.empty()) {
            out << report.ideal_cumulative.back();
        } else {
            out << 0.0;
        }
        for (const auto& [_, eval] : report.rankings) {
            out << '\t';
            if (i < eval.cumulative.size()) {
                out << eval.cumulative[i];
            } else if (!eval.cumulative.empty()) {
                out << eval.cumulative.back();
            } else {
                out << 0.0;
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace evoquery
