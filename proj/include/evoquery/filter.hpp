#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoquery/engine.hpp"
#include "evoquery/store.hpp"
#include "evoquery/vsm.hpp"

namespace evoquery {

enum class RuleKind { TagMatch, UriPattern, KeywordSignature };

// Declarative exclusion rule: documents matching any rule are dropped from
// the merged result set.
struct FilterRule {
    std::string rule_id;
    RuleKind kind = RuleKind::TagMatch;
    std::string tag;                 // TagMatch
    std::string pattern;             // UriPattern glob
    std::set<std::string> lemmas;    // KeywordSignature
    int threshold = 1;               // distinct signature lemmas required

    static FilterRule from_json(const nlohmann::json& j);  // ConfigError on bad rule
    bool matches(const Document& doc) const;
};

// rules.jsonl: one rule object per line.
std::vector<FilterRule> load_rules(const std::filesystem::path& path);

struct RuleExclusion {
    std::string doc_id;
    std::vector<std::string> rule_ids;  // every matching rule, in rule-list order
};

struct RuleFilterOutcome {
    MergedResultSet kept;
    std::vector<RuleExclusion> excluded;
};

// Partitions the merged set; a document excluded by any rule is excluded
// regardless of rule order.
RuleFilterOutcome apply_rules(const MergedResultSet& results, const Corpus& corpus,
                              const std::vector<FilterRule>& rules);

// Nearest-centroid exclusion classifier over the corpus vector space.
class CentroidClassifier {
public:
    CentroidClassifier(std::map<std::string, DocVector> centroids, double threshold);

    // centroid(c) = unit-normalized mean of the member vectors. Every
    // category needs at least one document with indexable terms.
    static CentroidClassifier train(const std::map<std::string, std::vector<TokenText>>& labeled,
                                    const VectorIndex& index, double threshold);

    struct Decision {
        std::string category;
        double score = 0.0;
    };
    // Highest-cosine category; ties go to the lexicographically smallest.
    Decision best_match(const DocVector& vec) const;

    double threshold() const { return threshold_; }
    const std::map<std::string, DocVector>& centroids() const { return centroids_; }

private:
    std::map<std::string, DocVector> centroids_;
    double threshold_;
};

struct ClassifierExclusion {
    std::string doc_id;
    std::string category;
    double score = 0.0;
};

struct ClassifierFilterOutcome {
    MergedResultSet kept;
    std::vector<ClassifierExclusion> excluded;
};

// Excludes a document iff max over categories of cosine(doc, centroid) >=
// threshold.
ClassifierFilterOutcome classify_exclude(const MergedResultSet& results, const Corpus& corpus,
                                         const VectorIndex& index,
                                         const CentroidClassifier& classifier);

}  // namespace evoquery
