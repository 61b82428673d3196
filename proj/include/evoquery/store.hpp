#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evoquery/textcore.hpp"

namespace evoquery {

struct Document {
    std::string doc_id;
    std::string title;
    TokenText body;  // raw_body normalized under the corpus config
    std::string raw_body;
    std::set<std::string> category_tags;
    std::string source_uri;  // empty when unknown

    bool operator==(const Document&) const = default;
};

struct CorpusManifest {
    std::string created_at;
    std::uint64_t norm_config_hash = 0;
};

class Corpus {
public:
    Corpus() = default;
    explicit Corpus(CorpusManifest manifest) : manifest_(std::move(manifest)) {}

    void add(Document doc);  // DataError on duplicate doc_id
    const Document& at(const std::string& doc_id) const;
    const Document* find(const std::string& doc_id) const;
    std::size_t size() const { return documents_.size(); }
    bool empty() const { return documents_.empty(); }

    const std::map<std::string, Document>& documents() const { return documents_; }
    const CorpusManifest& manifest() const { return manifest_; }

    // Document-level equality; manifest timestamps are ignored but the
    // normalization fingerprint must match.
    bool same_content(const Corpus& other) const;

private:
    std::map<std::string, Document> documents_;
    CorpusManifest manifest_;
};

// corpus.jsonl: one {"doc_id", "body", "title"?, "tags"?, "uri"?} per line.
Corpus ingest(const std::filesystem::path& path, const NormConfig& cfg);

class RelevanceJudgments {
public:
    // Grade must be 0..3.
    void set(const std::string& topic_id, const std::string& doc_id, int grade);
    // Unjudged documents default to `fallback`.
    int grade(const std::string& topic_id, const std::string& doc_id, int fallback = 0) const;
    bool has(const std::string& topic_id, const std::string& doc_id) const;
    std::set<std::string> topics() const;
    std::size_t size() const;
    bool empty() const;

    const std::map<std::string, std::map<std::string, int>>& by_topic() const { return grades_; }

private:
    std::map<std::string, std::map<std::string, int>> grades_;  // topic -> doc -> grade
};

// qrels.tsv: `topic_id<TAB>doc_id<TAB>grade` rows. Judgments may reference
// documents outside the corpus. Warnings (empty file, overwritten rows) are
// appended to `warnings` when given.
RelevanceJudgments load_qrels(const std::filesystem::path& path,
                              std::vector<std::string>* warnings = nullptr);

struct GenerationStats {
    int generation = 0;
    double mean_fitness = 0;
    double stddev_fitness = 0;
    double best_fitness = 0;
    std::uint64_t best_query_id = 0;
    std::vector<std::string> best_query;

    bool operator==(const GenerationStats&) const = default;
};

struct RankedResult {
    int rank = 0;
    std::string doc_id;
    double weight = 0;
    double f = 0;
    double p = 0;
    double s = 0;
    int best_rank = 0;
    int hit_count = 0;

    bool operator==(const RankedResult&) const = default;
};

// Full artifact of one evolution run. Replaying the same (config, seed)
// against the same corpus reproduces it bit for bit.
struct RunRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    nlohmann::ordered_json config;
    std::vector<GenerationStats> generations;
    std::vector<RankedResult> results;

    bool operator==(const RunRecord&) const = default;
};

// Writes manifest.json, generations.jsonl and results.jsonl into `out_dir`
// (created if missing); returns the manifest path.
std::filesystem::path persist_run(const RunRecord& record, const std::filesystem::path& out_dir);

RunRecord load_run(const std::filesystem::path& run_dir);

}  // namespace evoquery
