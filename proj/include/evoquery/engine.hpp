#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evoquery/store.hpp"
#include "evoquery/vsm.hpp"

namespace evoquery {

struct Query {
    std::uint64_t query_id = 0;
    std::vector<std::string> keywords;  // m pairwise-distinct lemmas

    void validate() const;  // DataError when empty or with repeated keywords
    TokenText as_text() const;
};

struct SearchResult {
    std::string doc_id;
    int rank = 0;  // 1-based position in the backend's ranked list
    double backend_score = 0.0;
};

// A backend produces scored candidates; `execute` owns ordering, budget
// truncation and rank stamping. Implementations must be safe for concurrent
// calls over their immutable state.
class SearchBackend {
public:
    virtual ~SearchBackend() = default;
    // All documents with score > 0. The budget is a hint for remote
    // backends; offline backends may ignore it and return everything.
    virtual std::vector<std::pair<std::string, double>> candidates(const Query& query,
                                                                   int budget) const = 0;
    virtual std::string name() const = 0;
};

// Ranked retrieval over the corpus vector space: score(q, d) =
// cosine(vectorize(q), vectorize(d.body)). Document vectors are cached at
// construction.
class OfflineBackend : public SearchBackend {
public:
    OfflineBackend(const Corpus& corpus, const VectorIndex& index);

    std::vector<std::pair<std::string, double>> candidates(const Query& query,
                                                           int budget) const override;
    std::string name() const override { return "offline"; }

private:
    const VectorIndex& index_;
    std::vector<DocVector> doc_vectors_;  // aligned with index_.doc_ids()
};

// Sorts candidates by descending score, ties by ascending doc_id, truncates
// to `budget` and stamps ranks 1..k. budget < 1 is a ConfigError.
std::vector<SearchResult> execute(const Query& query, const SearchBackend& backend, int budget);

double offline_score(const Query& query, const Document& doc, const VectorIndex& index);

struct MergedEntry {
    std::map<std::uint64_t, int> appearances;  // query_id -> rank
    int best_rank = 0;
    int hit_count = 0;
};

class MergedResultSet {
public:
    void add(const std::string& doc_id, std::uint64_t query_id, int rank);
    const std::map<std::string, MergedEntry>& entries() const { return entries_; }
    const MergedEntry* find(const std::string& doc_id) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::map<std::string, MergedEntry> entries_;
};

// Union of per-query ranked lists with provenance. Every list must carry
// contiguous ranks 1..len and no repeated documents.
MergedResultSet merge(const std::map<std::uint64_t, std::vector<SearchResult>>& results_per_query);

// --- external engine adapter surface -------------------------------------
//
// Contract for web connectors: given keywords and a budget, return ranked
// hits. Implementations live outside the default build; transport failures
// should surface as BackendError.

struct ExternalHit {
    std::string uri;
    std::string title;
    std::string snippet;
};

class ExternalSearchAdapter {
public:
    virtual ~ExternalSearchAdapter() = default;
    virtual std::vector<ExternalHit> fetch(const std::vector<std::string>& keywords,
                                           int budget) = 0;
    virtual std::string name() const = 0;
};

// Wraps an adapter as a SearchBackend: hit order becomes a descending
// synthetic score, the uri becomes the doc_id. Hits can be ingested as
// transient documents with `to_document`.
class ExternalBackend : public SearchBackend {
public:
    explicit ExternalBackend(ExternalSearchAdapter& adapter) : adapter_(adapter) {}

    std::vector<std::pair<std::string, double>> candidates(const Query& query,
                                                           int budget) const override;
    std::string name() const override { return "external:" + adapter_.name(); }

    static Document to_document(const ExternalHit& hit, const NormConfig& cfg);

private:
    ExternalSearchAdapter& adapter_;
};

}  // namespace evoquery
