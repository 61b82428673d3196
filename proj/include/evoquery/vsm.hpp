#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evoquery/store.hpp"
#include "evoquery/textcore.hpp"

namespace evoquery {

using TermId = std::uint32_t;

// Sparse tf·idf vector. Entries are sorted by term id; zero weights are not
// stored. The Euclidean norm is cached at construction.
class DocVector {
public:
    DocVector() = default;
    explicit DocVector(std::vector<std::pair<TermId, double>> entries);

    double weight(TermId term) const;  // 0 when absent
    double norm() const { return norm_; }
    bool zero() const { return entries_.empty(); }
    const std::vector<std::pair<TermId, double>>& entries() const { return entries_; }

private:
    std::vector<std::pair<TermId, double>> entries_;
    double norm_ = 0.0;
};

// dot(u,v) / (|u||v|); 0 when either vector is zero. Weights are
// nonnegative, so the result is clamped to [0,1].
double cosine(const DocVector& u, const DocVector& v);

struct Posting {
    std::uint32_t doc_index = 0;  // into doc_ids()
    std::uint32_t tf = 0;
};

// Inverted index with document frequencies. Term ids follow lexicographic
// vocabulary order, so two builds over the same corpus are identical.
class VectorIndex {
public:
    static VectorIndex build(const Corpus& corpus);  // DataError on empty corpus

    std::optional<TermId> term_id(const std::string& term) const;
    const std::string& term(TermId id) const;
    std::uint32_t doc_freq(TermId id) const;
    const std::vector<Posting>& postings(TermId id) const;
    double idf(TermId id) const;  // log2(n_docs / df)

    std::size_t n_docs() const { return doc_ids_.size(); }
    std::size_t vocab_size() const { return vocabulary_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::uint64_t norm_config_hash() const { return norm_config_hash_; }

    // weight(t) = tf(t, text) * idf(t); out-of-vocabulary terms drop out.
    DocVector vectorize(const TokenText& text) const;

    // JSON snapshot for ingest-once workflows.
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

private:
    std::vector<std::string> vocabulary_;  // sorted; index == TermId
    std::vector<std::uint32_t> doc_freq_;
    std::vector<std::vector<Posting>> postings_;  // sorted by doc_index
    std::vector<std::string> doc_ids_;            // sorted
    std::uint64_t norm_config_hash_ = 0;
};

}  // namespace evoquery
