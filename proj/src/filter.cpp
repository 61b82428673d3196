#include "evoquery/filter.hpp"

#include <algorithm>
#include <fstream>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

FilterRule FilterRule::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ConfigError("filter rule needs a string \"kind\" field");
    }
    FilterRule rule;
    rule.rule_id = j.value("rule_id", std::string{});
    std::string kind = j["kind"].get<std::string>();
    if (kind == "tag-match") {
        rule.kind = RuleKind::TagMatch;
        rule.tag = j.value("tag", std::string{});
        if (rule.tag.empty()) {
            throw ConfigError("tag-match rule \"" + rule.rule_id + "\" needs a nonempty tag");
        }
    } else if (kind == "uri-pattern") {
        rule.kind = RuleKind::UriPattern;
        rule.pattern = j.value("pattern", std::string{});
        if (rule.pattern.empty()) {
            throw ConfigError("uri-pattern rule \"" + rule.rule_id + "\" needs a nonempty pattern");
        }
    } else if (kind == "keyword-signature") {
        rule.kind = RuleKind::KeywordSignature;
        if (j.contains("lemmas") && j["lemmas"].is_array()) {
            for (const auto& lemma : j["lemmas"]) {
                if (lemma.is_string() && !lemma.get<std::string>().empty()) {
                    rule.lemmas.insert(lemma.get<std::string>());
                }
            }
        }
        rule.threshold = j.value("threshold", 1);
        if (rule.lemmas.empty()) {
            throw ConfigError("keyword-signature rule \"" + rule.rule_id +
                              "\" needs a nonempty lemma list");
        }
        if (rule.threshold < 1) {
            throw ConfigError("keyword-signature rule \"" + rule.rule_id +
                              "\" needs threshold >= 1");
        }
    } else {
        throw ConfigError("unknown filter rule kind: \"" + kind + "\"");
    }
    if (rule.rule_id.empty()) {
        throw ConfigError("filter rule of kind \"" + kind + "\" needs a rule_id");
    }
    return rule;
}

bool FilterRule::matches(const Document& doc) const {
    switch (kind) {
        case RuleKind::TagMatch:
            return doc.category_tags.contains(tag);
        case RuleKind::UriPattern:
            return !doc.source_uri.empty() && glob_match(pattern, doc.source_uri);
        case RuleKind::KeywordSignature: {
            std::set<std::string> present;
            for (const auto& token : doc.body.tokens) {
                if (lemmas.contains(token)) {
                    present.insert(token);
                    if (static_cast<int>(present.size()) >= threshold) {
                        return true;
                    }
                }
            }
            return false;
        }
    }
    return false;
}

std::vector<FilterRule> load_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open rules file: " + path.string());
    }
    std::vector<FilterRule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ConfigError("rules line " + std::to_string(line_no) + ": malformed JSON");
        }
        rules.push_back(FilterRule::from_json(j));
    }
    return rules;
}

RuleFilterOutcome apply_rules(const MergedResultSet& results, const Corpus& corpus,
                              const std::vector<FilterRule>& rules) {
    RuleFilterOutcome outcome;
    for (const auto& [doc_id, entry] : results.entries()) {
        const Document& doc = corpus.at(doc_id);
        std::vector<std::string> matched;
        for (const auto& rule : rules) {
            if (rule.matches(doc)) {
                matched.push_back(rule.rule_id);
            }
        }
        if (matched.empty()) {
            for (const auto& [query_id, rank] : entry.appearances) {
                outcome.kept.add(doc_id, query_id, rank);
            }
        } else {
            outcome.excluded.push_back({doc_id, std::move(matched)});
        }
    }
    return outcome;
}

CentroidClassifier::CentroidClassifier(std::map<std::string, DocVector> centroids,
                                       double threshold)
    : centroids_(std::move(centroids)), threshold_(threshold) {
    if (threshold_ < 0.0 || threshold_ > 1.0) {
        throw ConfigError("classifier threshold must lie in [0,1], got " +
                          std::to_string(threshold_));
    }
    for (const auto& [category, centroid] : centroids_) {
        if (centroid.zero()) {
            throw ConfigError("classifier centroid for \"" + category + "\" is a zero vector");
        }
    }
}

CentroidClassifier CentroidClassifier::train(
    const std::map<std::string, std::vector<TokenText>>& labeled, const VectorIndex& index,
    double threshold) {
    if (labeled.empty()) {
        throw DataError("classifier training set is empty");
    }
    std::map<std::string, DocVector> centroids;
    for (const auto& [category, texts] : labeled) {
        if (texts.empty()) {
            throw DataError("classifier category \"" + category + "\" has no documents");
        }
        std::map<TermId, double> sums;
        for (const auto& text : texts) {
            DocVector vec = index.vectorize(text);
            for (const auto& [term, w] : vec.entries()) {
                sums[term] += w;
            }
        }
        std::vector<std::pair<TermId, double>> mean;
        mean.reserve(sums.size());
        for (const auto& [term, sum] : sums) {
            mean.emplace_back(term, sum / static_cast<double>(texts.size()));
        }
        DocVector mean_vec(std::move(mean));
        if (mean_vec.zero()) {
            throw DataError("classifier category \"" + category +
                            "\" has no indexable terms");
        }
        std::vector<std::pair<TermId, double>> unit;
        unit.reserve(mean_vec.entries().size());
        for (const auto& [term, w] : mean_vec.entries()) {
            unit.emplace_back(term, w / mean_vec.norm());
        }
        centroids.emplace(category, DocVector(std::move(unit)));
    }
    return CentroidClassifier(std::move(centroids), threshold);
}

CentroidClassifier::Decision CentroidClassifier::best_match(const DocVector& vec) const {
    Decision best;
    best.score = -1.0;
    for (const auto& [category, centroid] : centroids_) {
        double score = cosine(vec, centroid);
        if (score > best.score) {
            best = {category, score};
        }
    }
    if (best.score < 0.0) {
        best.score = 0.0;
    }
    return best;
}

ClassifierFilterOutcome classify_exclude(const MergedResultSet& results, const Corpus& corpus,
                                         const VectorIndex& index,
                                         const CentroidClassifier& classifier) {
    ClassifierFilterOutcome outcome;
    for (const auto& [doc_id, entry] : results.entries()) {
        DocVector vec = index.vectorize(corpus.at(doc_id).body);
        auto decision = classifier.best_match(vec);
        if (decision.score >= classifier.threshold()) {
            outcome.excluded.push_back({doc_id, decision.category, decision.score});
        } else {
            for (const auto& [query_id, rank] : entry.appearances) {
                outcome.kept.add(doc_id, query_id, rank);
            }
        }
    }
    return outcome;
}

}  // namespace evoquery
