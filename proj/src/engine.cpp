#include "evoquery/engine.hpp"

#include <algorithm>
#include <set>

#include "evoquery/errors.hpp"

namespace evoquery {

void Query::validate() const {
    if (keywords.empty()) {
        throw DataError("query " + std::to_string(query_id) + " has no keywords");
    }
    std::set<std::string> seen;
    for (const auto& k : keywords) {
        if (k.empty()) {
            throw DataError("query " + std::to_string(query_id) + " has an empty keyword");
        }
        if (!seen.insert(k).second) {
            throw DataError("query " + std::to_string(query_id) + " repeats keyword \"" + k +
                            "\"");
        }
    }
}

TokenText Query::as_text() const {
    TokenText text;
    text.tokens = keywords;
    text.source_length = keywords.size();
    return text;
}

OfflineBackend::OfflineBackend(const Corpus& corpus, const VectorIndex& index) : index_(index) {
    doc_vectors_.reserve(index.n_docs());
    for (const auto& doc_id : index.doc_ids()) {
        doc_vectors_.push_back(index.vectorize(corpus.at(doc_id).body));
    }
}

std::vector<std::pair<std::string, double>> OfflineBackend::candidates(const Query& query,
                                                                       int /*budget*/) const {
    DocVector query_vec = index_.vectorize(query.as_text());
    if (query_vec.zero()) {
        return {};
    }
    // Only documents sharing a query term can score above zero.
    std::set<std::uint32_t> touched;
    for (const auto& [term, _] : query_vec.entries()) {
        for (const auto& posting : index_.postings(term)) {
            touched.insert(posting.doc_index);
        }
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(touched.size());
    for (std::uint32_t doc_index : touched) {
        double score = cosine(query_vec, doc_vectors_[doc_index]);
        if (score > 0.0) {
            out.emplace_back(index_.doc_ids()[doc_index], score);
        }
    }
    return out;
}

std::vector<SearchResult> execute(const Query& query, const SearchBackend& backend, int budget) {
    if (budget < 1) {
        throw ConfigError("result budget must be >= 1, got " + std::to_string(budget));
    }
    query.validate();
    auto scored = backend.candidates(query, budget);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    if (scored.size() > static_cast<std::size_t>(budget)) {
        scored.resize(static_cast<std::size_t>(budget));
    }
    std::vector<SearchResult> results;
    results.reserve(scored.size());
    int rank = 0;
    for (auto& [doc_id, score] : scored) {
        results.push_back({std::move(doc_id), ++rank, score});
    }
    return results;
}

double offline_score(const Query& query, const Document& doc, const VectorIndex& index) {
    return cosine(index.vectorize(query.as_text()), index.vectorize(doc.body));
}

void MergedResultSet::add(const std::string& doc_id, std::uint64_t query_id, int rank) {
    MergedEntry& entry = entries_[doc_id];
    auto [_, inserted] = entry.appearances.emplace(query_id, rank);
    if (!inserted) {
        throw DataError("document " + doc_id + " appears twice in query " +
                        std::to_string(query_id));
    }
    entry.hit_count = static_cast<int>(entry.appearances.size());
    entry.best_rank = entry.best_rank == 0 ? rank : std::min(entry.best_rank, rank);
}

const MergedEntry* MergedResultSet::find(const std::string& doc_id) const {
    auto it = entries_.find(doc_id);
    return it == entries_.end() ? nullptr : &it->second;
}

MergedResultSet merge(const std::map<std::uint64_t, std::vector<SearchResult>>& results_per_query) {
    MergedResultSet merged;
    for (const auto& [query_id, list] : results_per_query) {
        std::set<std::string> docs_in_list;
        int expected_rank = 0;
        for (const auto& result : list) {
            if (result.rank != ++expected_rank) {
                throw DataError("query " + std::to_string(query_id) +
                                ": ranks must be contiguous from 1, found " +
                                std::to_string(result.rank) + " at position " +
                                std::to_string(expected_rank));
            }
            if (!docs_in_list.insert(result.doc_id).second) {
                throw DataError("document " + result.doc_id + " appears twice in query " +
                                std::to_string(query_id));
            }
            merged.add(result.doc_id, query_id, result.rank);
        }
    }
    return merged;
}

std::vector<std::pair<std::string, double>> ExternalBackend::candidates(const Query& query,
                                                                        int budget) const {
    auto hits = adapter_.fetch(query.keywords, budget);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(hits.size());
    // Synthetic descending scores preserve the adapter's ranking through
    // execute()'s sort.
    for (std::size_t i = 0; i < hits.size(); ++i) {
        out.emplace_back(hits[i].uri, static_cast<double>(hits.size() - i));
    }
    return out;
}

Document ExternalBackend::to_document(const ExternalHit& hit, const NormConfig& cfg) {
    Document doc;
    doc.doc_id = hit.uri;
    doc.source_uri = hit.uri;
    doc.title = hit.title;
    doc.raw_body = hit.title.empty() ? hit.snippet : hit.title + " " + hit.snippet;
    doc.body = normalize(doc.raw_body, cfg);
    return doc;
}

}  // namespace evoquery
