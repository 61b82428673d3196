#include "evoquery/store.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

void Corpus::add(Document doc) {
    auto [it, inserted] = documents_.emplace(doc.doc_id, std::move(doc));
    if (!inserted) {
        throw DataError("duplicate doc_id: " + it->first);
    }
}

const Document& Corpus::at(const std::string& doc_id) const {
    auto it = documents_.find(doc_id);
    if (it == documents_.end()) {
        throw DataError("unknown doc_id: " + doc_id);
    }
    return it->second;
}

const Document* Corpus::find(const std::string& doc_id) const {
    auto it = documents_.find(doc_id);
    return it == documents_.end() ? nullptr : &it->second;
}

bool Corpus::same_content(const Corpus& other) const {
    return manifest_.norm_config_hash == other.manifest_.norm_config_hash &&
           documents_ == other.documents_;
}

Corpus ingest(const std::filesystem::path& path, const NormConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file: " + path.string());
    }
    CorpusManifest manifest;
    manifest.created_at = now_iso8601();
    manifest.norm_config_hash = cfg.fingerprint();
    Corpus corpus(manifest);

    std::map<std::string, std::size_t> first_line_of;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) {
            line.erase(0, 3);  // UTF-8 BOM
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw DataError("corpus line " + std::to_string(line_no) + ": malformed JSON");
        }
        if (!record.contains("doc_id") || !record["doc_id"].is_string() ||
            !record.contains("body") || !record["body"].is_string()) {
            throw DataError("corpus line " + std::to_string(line_no) +
                            ": document record needs string fields doc_id and body");
        }
        Document doc;
        doc.doc_id = record["doc_id"].get<std::string>();
        if (doc.doc_id.empty()) {
            throw DataError("corpus line " + std::to_string(line_no) + ": empty doc_id");
        }
        if (auto it = first_line_of.find(doc.doc_id); it != first_line_of.end()) {
            throw DataError("duplicate doc_id \"" + doc.doc_id + "\" on lines " +
                            std::to_string(it->second) + "," + std::to_string(line_no));
        }
        first_line_of[doc.doc_id] = line_no;
        doc.raw_body = record["body"].get<std::string>();
        doc.body = normalize(doc.raw_body, cfg);
        if (record.contains("title") && record["title"].is_string()) {
            doc.title = record["title"].get<std::string>();
        }
        if (record.contains("tags") && record["tags"].is_array()) {
            for (const auto& tag : record["tags"]) {
                if (tag.is_string()) {
                    doc.category_tags.insert(tag.get<std::string>());
                }
            }
        }
        if (record.contains("uri") && record["uri"].is_string()) {
            doc.source_uri = record["uri"].get<std::string>();
        }
        corpus.add(std::move(doc));
    }
    if (corpus.empty()) {
        throw DataError("empty corpus: " + path.string());
    }
    return corpus;
}

void RelevanceJudgments::set(const std::string& topic_id, const std::string& doc_id, int grade) {
    if (grade < 0 || grade > 3) {
        throw DataError("relevance grade out of range 0..3: " + std::to_string(grade));
    }
    grades_[topic_id][doc_id] = grade;
}

int RelevanceJudgments::grade(const std::string& topic_id, const std::string& doc_id,
                              int fallback) const {
    auto topic_it = grades_.find(topic_id);
    if (topic_it == grades_.end()) {
        return fallback;
    }
    auto doc_it = topic_it->second.find(doc_id);
    return doc_it == topic_it->second.end() ? fallback : doc_it->second;
}

bool RelevanceJudgments::has(const std::string& topic_id, const std::string& doc_id) const {
    auto topic_it = grades_.find(topic_id);
    return topic_it != grades_.end() && topic_it->second.contains(doc_id);
}

std::set<std::string> RelevanceJudgments::topics() const {
    std::set<std::string> out;
    for (const auto& [topic, _] : grades_) {
        out.insert(topic);
    }
    return out;
}

std::size_t RelevanceJudgments::size() const {
    std::size_t n = 0;
    for (const auto& [_, docs] : grades_) {
        n += docs.size();
    }
    return n;
}

bool RelevanceJudgments::empty() const {
    return size() == 0;
}

RelevanceJudgments load_qrels(const std::filesystem::path& path,
                              std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open qrels file: " + path.string());
    }
    RelevanceJudgments judgments;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = split(line, '\t');
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
            throw DataError("qrels row " + std::to_string(line_no) +
                            ": expected topic_id<TAB>doc_id<TAB>grade");
        }
        int grade = 0;
        try {
            std::size_t used = 0;
            grade = std::stoi(fields[2], &used);
            if (used != fields[2].size()) {
                throw std::invalid_argument(fields[2]);
            }
        } catch (const std::exception&) {
            throw DataError("qrels row " + std::to_string(line_no) + ": bad grade \"" +
                            fields[2] + "\"");
        }
        if (grade < 0 || grade > 3) {
            throw DataError("qrels row " + std::to_string(line_no) +
                            ": grade out of range 0..3: " + std::to_string(grade));
        }
        if (warnings != nullptr && judgments.has(fields[0], fields[1])) {
            warnings->push_back("qrels row " + std::to_string(line_no) + ": (" + fields[0] +
                                "," + fields[1] + ") judged twice, keeping the last grade");
        }
        judgments.set(fields[0], fields[1], grade);
    }
    if (judgments.empty() && warnings != nullptr) {
        warnings->push_back("qrels file has no judgments: " + path.string());
    }
    return judgments;
}

namespace {

ordered_json stats_to_json(const GenerationStats& g) {
    ordered_json j;
    j["generation"] = g.generation;
    j["mean_fitness"] = g.mean_fitness;
    j["stddev_fitness"] = g.stddev_fitness;
    j["best_fitness"] = g.best_fitness;
    j["best_query_id"] = g.best_query_id;
    j["best_query"] = g.best_query;
    return j;
}

GenerationStats stats_from_json(const json& j) {
    GenerationStats g;
    g.generation = j.at("generation").get<int>();
    g.mean_fitness = j.at("mean_fitness").get<double>();
    g.stddev_fitness = j.at("stddev_fitness").get<double>();
    g.best_fitness = j.at("best_fitness").get<double>();
    g.best_query_id = j.at("best_query_id").get<std::uint64_t>();
    g.best_query = j.at("best_query").get<std::vector<std::string>>();
    return g;
}

ordered_json result_to_json(const RankedResult& r) {
    ordered_json j;
    j["rank"] = r.rank;
    j["doc_id"] = r.doc_id;
    j["weight"] = r.weight;
    j["f"] = r.f;
    j["p"] = r.p;
    j["s"] = r.s;
    j["best_rank"] = r.best_rank;
    j["hit_count"] = r.hit_count;
    return j;
}

RankedResult result_from_json(const json& j) {
    RankedResult r;
    r.rank = j.at("rank").get<int>();
    r.doc_id = j.at("doc_id").get<std::string>();
    r.weight = j.at("weight").get<double>();
    r.f = j.at("f").get<double>();
    r.p = j.at("p").get<double>();
    r.s = j.at("s").get<double>();
    r.best_rank = j.at("best_rank").get<int>();
    r.hit_count = j.at("hit_count").get<int>();
    return r;
}

}  // namespace

std::filesystem::path persist_run(const RunRecord& record, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw DataError("cannot create run directory " + out_dir.string() + ": " + ec.message());
    }

    std::ostringstream generations;
    for (const auto& g : record.generations) {
        generations << stats_to_json(g).dump() << '\n';
    }
    std::ostringstream results;
    for (const auto& r : record.results) {
        results << result_to_json(r).dump() << '\n';
    }
    ordered_json manifest;
    manifest["run_id"] = record.run_id;
    manifest["seed"] = record.seed;
    manifest["config"] = record.config;
    manifest["n_generations"] = record.generations.size();
    manifest["n_results"] = record.results.size();

    write_file_atomic(out_dir / "generations.jsonl", generations.str());
    write_file_atomic(out_dir / "results.jsonl", results.str());
    std::filesystem::path manifest_path = out_dir / "manifest.json";
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

RunRecord load_run(const std::filesystem::path& run_dir) {
    RunRecord record;
    ordered_json manifest = ordered_json::parse(read_file(run_dir / "manifest.json"), nullptr, false);
    if (manifest.is_discarded()) {
        throw DataError("malformed manifest.json in " + run_dir.string());
    }
    record.run_id = manifest.at("run_id").get<std::string>();
    record.seed = manifest.at("seed").get<std::uint64_t>();
    record.config = manifest.at("config");

    std::istringstream generations(read_file(run_dir / "generations.jsonl"));
    std::string line;
    while (std::getline(generations, line)) {
        if (line.empty()) {
            continue;
        }
        record.generations.push_back(stats_from_json(json::parse(line)));
    }
    std::istringstream results(read_file(run_dir / "results.jsonl"));
    while (std::getline(results, line)) {
        if (line.empty()) {
            continue;
        }
        record.results.push_back(result_from_json(json::parse(line)));
    }
    return record;
}

}  // namespace evoquery
