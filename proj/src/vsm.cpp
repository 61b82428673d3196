#include "evoquery/vsm.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

DocVector::DocVector(std::vector<std::pair<TermId, double>> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double sq = 0.0;
    for (auto& [term, w] : entries) {
        if (w < 0.0) {
            throw DataError("negative vector weight for term id " + std::to_string(term));
        }
        if (w > 0.0) {
            entries_.emplace_back(term, w);
            sq += w * w;
        }
    }
    norm_ = std::sqrt(sq);
}

double DocVector::weight(TermId term) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                               [](const auto& e, TermId t) { return e.first < t; });
    return (it != entries_.end() && it->first == term) ? it->second : 0.0;
}

double cosine(const DocVector& u, const DocVector& v) {
    if (u.zero() || v.zero()) {
        return 0.0;
    }
    double dot = 0.0;
    auto iu = u.entries().begin();
    auto iv = v.entries().begin();
    while (iu != u.entries().end() && iv != v.entries().end()) {
        if (iu->first < iv->first) {
            ++iu;
        } else if (iv->first < iu->first) {
            ++iv;
        } else {
            dot += iu->second * iv->second;
            ++iu;
            ++iv;
        }
    }
    double value = dot / (u.norm() * v.norm());
    return std::clamp(value, 0.0, 1.0);
}

VectorIndex VectorIndex::build(const Corpus& corpus) {
    if (corpus.empty()) {
        throw DataError("cannot index an empty corpus");
    }
    VectorIndex index;
    index.norm_config_hash_ = corpus.manifest().norm_config_hash;
    index.doc_ids_.reserve(corpus.size());
    for (const auto& [doc_id, _] : corpus.documents()) {
        index.doc_ids_.push_back(doc_id);  // map iteration is already sorted
    }

    // term -> doc_index -> tf, both keys sorted.
    std::map<std::string, std::map<std::uint32_t, std::uint32_t>> counts;
    std::uint32_t doc_index = 0;
    for (const auto& [_, doc] : corpus.documents()) {
        for (const auto& token : doc.body.tokens) {
            ++counts[token][doc_index];
        }
        ++doc_index;
    }

    index.vocabulary_.reserve(counts.size());
    index.doc_freq_.reserve(counts.size());
    index.postings_.reserve(counts.size());
    for (auto& [term, per_doc] : counts) {
        index.vocabulary_.push_back(term);
        index.doc_freq_.push_back(static_cast<std::uint32_t>(per_doc.size()));
        std::vector<Posting> postings;
        postings.reserve(per_doc.size());
        for (const auto& [d, tf] : per_doc) {
            postings.push_back({d, tf});
        }
        index.postings_.push_back(std::move(postings));
    }
    return index;
}

std::optional<TermId> VectorIndex::term_id(const std::string& term) const {
    auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), term);
    if (it == vocabulary_.end() || *it != term) {
        return std::nullopt;
    }
    return static_cast<TermId>(it - vocabulary_.begin());
}

const std::string& VectorIndex::term(TermId id) const {
    return vocabulary_.at(id);
}

std::uint32_t VectorIndex::doc_freq(TermId id) const {
    return doc_freq_.at(id);
}

const std::vector<Posting>& VectorIndex::postings(TermId id) const {
    return postings_.at(id);
}

double VectorIndex::idf(TermId id) const {
    return std::log2(static_cast<double>(n_docs()) / static_cast<double>(doc_freq_.at(id)));
}

DocVector VectorIndex::vectorize(const TokenText& text) const {
    std::map<TermId, std::uint32_t> tf;
    for (const auto& token : text.tokens) {
        if (auto id = term_id(token)) {
            ++tf[*id];
        }
    }
    std::vector<std::pair<TermId, double>> entries;
    entries.reserve(tf.size());
    for (const auto& [id, count] : tf) {
        entries.emplace_back(id, static_cast<double>(count) * idf(id));
    }
    return DocVector(std::move(entries));
}

void VectorIndex::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["n_docs"] = doc_ids_.size();
    j["norm_config_hash"] = norm_config_hash_;
    j["doc_ids"] = doc_ids_;
    j["vocabulary"] = vocabulary_;
    j["df"] = doc_freq_;
    nlohmann::ordered_json postings = nlohmann::ordered_json::array();
    for (const auto& list : postings_) {
        nlohmann::ordered_json entry = nlohmann::ordered_json::array();
        for (const auto& p : list) {
            entry.push_back({p.doc_index, p.tf});
        }
        postings.push_back(std::move(entry));
    }
    j["postings"] = std::move(postings);
    write_file_atomic(path, j.dump() + "\n");
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) {
        throw DataError("malformed index snapshot: " + path.string());
    }
    VectorIndex index;
    index.norm_config_hash_ = j.value("norm_config_hash", std::uint64_t{0});
    index.doc_ids_ = j.at("doc_ids").get<std::vector<std::string>>();
    index.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
    index.doc_freq_ = j.at("df").get<std::vector<std::uint32_t>>();
    for (const auto& list : j.at("postings")) {
        std::vector<Posting> postings;
        postings.reserve(list.size());
        for (const auto& entry : list) {
            postings.push_back({entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::uint32_t>()});
        }
        index.postings_.push_back(std::move(postings));
    }
    if (index.vocabulary_.size() != index.doc_freq_.size() ||
        index.vocabulary_.size() != index.postings_.size()) {
        throw DataError("inconsistent index snapshot: " + path.string());
    }
    return index;
}

}  // namespace evoquery
