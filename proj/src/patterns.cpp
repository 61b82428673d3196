#include "evoquery/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

std::string to_string(PatternLabel label) {
    switch (label) {
        case PatternLabel::Ka: return "ka";
        case PatternLabel::Kb: return "kb";
        case PatternLabel::Kc: return "kc";
        case PatternLabel::Kd: return "kd";
    }
    return "?";
}

PatternLabel parse_pattern_label(const std::string& label) {
    if (label == "ka") return PatternLabel::Ka;
    if (label == "kb") return PatternLabel::Kb;
    if (label == "kc") return PatternLabel::Kc;
    if (label == "kd") return PatternLabel::Kd;
    throw ConfigError("unknown pattern label: \"" + label + "\" (expected ka|kb|kc|kd)");
}

const std::optional<KPattern>& KPatternSet::get(PatternLabel label) const {
    switch (label) {
        case PatternLabel::Ka: return ka;
        case PatternLabel::Kb: return kb;
        case PatternLabel::Kc: return kc;
        case PatternLabel::Kd: return kd;
    }
    return kd;
}

std::vector<PatternLabel> KPatternSet::present() const {
    std::vector<PatternLabel> out;
    for (auto label : kAllPatternLabels) {
        if (has(label)) {
            out.push_back(label);
        }
    }
    return out;
}

std::vector<std::string> merged_rating_order(const MergedResultSet& results) {
    std::vector<const std::pair<const std::string, MergedEntry>*> items;
    items.reserve(results.size());
    for (const auto& entry : results.entries()) {
        items.push_back(&entry);
    }
    std::sort(items.begin(), items.end(), [](const auto* a, const auto* b) {
        if (a->second.best_rank != b->second.best_rank) {
            return a->second.best_rank < b->second.best_rank;
        }
        if (a->second.hit_count != b->second.hit_count) {
            return a->second.hit_count > b->second.hit_count;
        }
        return a->first < b->first;
    });
    std::vector<std::string> order;
    order.reserve(items.size());
    for (const auto* item : items) {
        order.push_back(item->first);
    }
    return order;
}

KPatternSet build_kpatterns(const MergedResultSet& kept, const Corpus& corpus,
                            const KeyConceptSet& q0, const AuthorityDictionary& authority,
                            const VectorIndex& index, int top_k) {
    return build_kpatterns(merged_rating_order(kept), corpus, q0, authority, index, top_k);
}

KPatternSet build_kpatterns(const std::vector<std::string>& ordered_kept, const Corpus& corpus,
                            const KeyConceptSet& q0, const AuthorityDictionary& authority,
                            const VectorIndex& index, int top_k) {
    if (top_k < 1) {
        throw ConfigError("pattern top_k must be >= 1, got " + std::to_string(top_k));
    }
    KPatternSet set;
    const std::vector<std::string>& order = ordered_kept;

    if (!order.empty()) {
        std::size_t take = std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_k));
        TokenText combined;
        std::vector<std::string> provenance;
        for (std::size_t i = 0; i < take; ++i) {
            const Document& doc = corpus.at(order[i]);
            combined.tokens.insert(combined.tokens.end(), doc.body.tokens.begin(),
                                   doc.body.tokens.end());
            combined.source_length += doc.body.source_length;
            provenance.push_back(order[i]);
        }
        set.ka = KPattern{index.vectorize(combined), std::move(provenance)};
        set.kc = KPattern{index.vectorize(corpus.at(order[0]).body), {order[0]}};
    }

    if (!authority.empty()) {
        TokenText definitions;
        std::vector<std::string> used;
        for (const auto& term : q0.concepts) {
            if (const TokenText* def = authority.definition(term)) {
                definitions.tokens.insert(definitions.tokens.end(), def->tokens.begin(),
                                          def->tokens.end());
                definitions.source_length += def->source_length;
                used.push_back(term);
            }
        }
        if (!used.empty()) {
            set.kb = KPattern{index.vectorize(definitions), std::move(used)};
        }
    }

    TokenText concepts;
    concepts.tokens = q0.concepts;
    concepts.source_length = q0.concepts.size();
    set.kd = KPattern{index.vectorize(concepts), q0.concepts};
    return set;
}

std::optional<std::size_t> SimilarityMatrix::col(PatternLabel label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> SimilarityMatrix::row(const std::string& doc_id) const {
    if (row_index_.empty() && !row_ids.empty()) {
        for (std::size_t i = 0; i < row_ids.size(); ++i) {
            row_index_[row_ids[i]] = i;
        }
    }
    auto it = row_index_.find(doc_id);
    if (it == row_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

double SimilarityMatrix::value(std::size_t row, PatternLabel label) const {
    auto c = col(label);
    if (!c) {
        throw ConfigError("pattern " + to_string(label) + " is absent from this matrix");
    }
    return values.at(row).at(*c);
}

void SimilarityMatrix::save_tsv(const std::filesystem::path& path) const {
    std::ostringstream out;
    out << "doc_id";
    for (auto label : labels) {
        out << '\t' << to_string(label);
    }
    out << '\n';
    out.precision(17);
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        out << row_ids[r];
        for (double v : values[r]) {
            out << '\t' << v;
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

SimilarityMatrix SimilarityMatrix::load_tsv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    SimilarityMatrix matrix;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty similarity matrix file: " + path.string());
    }
    auto header = split(line, '\t');
    if (header.empty() || header[0] != "doc_id") {
        throw DataError("similarity matrix header must start with doc_id: " + path.string());
    }
    for (std::size_t i = 1; i < header.size(); ++i) {
        matrix.labels.push_back(parse_pattern_label(header[i]));
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fields = split(line, '\t');
        if (fields.size() != header.size()) {
            throw DataError("similarity matrix row " + std::to_string(line_no) +
                            " has wrong column count");
        }
        matrix.row_ids.push_back(fields[0]);
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            row.push_back(std::stod(fields[i]));
        }
        matrix.values.push_back(std::move(row));
    }
    return matrix;
}

SimilarityMatrix similarity_matrix(const MergedResultSet& kept, const Corpus& corpus,
                                   const KPatternSet& patterns, const VectorIndex& index,
                                   int workers) {
    return similarity_matrix(merged_rating_order(kept), corpus, patterns, index, workers);
}

SimilarityMatrix similarity_matrix(const std::vector<std::string>& ordered_kept,
                                   const Corpus& corpus, const KPatternSet& patterns,
                                   const VectorIndex& index, int workers) {
    SimilarityMatrix matrix;
    matrix.row_ids = ordered_kept;
    matrix.labels = patterns.present();
    matrix.values.assign(matrix.row_ids.size(),
                         std::vector<double>(matrix.labels.size(), 0.0));
    parallel_for(matrix.row_ids.size(), workers, [&](std::size_t r) {
        DocVector doc_vec = index.vectorize(corpus.at(matrix.row_ids[r]).body);
        for (std::size_t c = 0; c < matrix.labels.size(); ++c) {
            matrix.values[r][c] = cosine(doc_vec, patterns.get(matrix.labels[c])->vec);
        }
    });
    return matrix;
}

namespace {

PatternRanking sorted_ranking(std::string mode,
                              std::vector<std::pair<std::string, double>> scored) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    return {std::move(mode), std::move(scored)};
}

}  // namespace

PatternRanking rank_by(const SimilarityMatrix& matrix, PatternLabel label) {
    auto c = matrix.col(label);
    if (!c) {
        throw ConfigError("cannot rank by absent pattern " + to_string(label));
    }
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(matrix.row_ids.size());
    for (std::size_t r = 0; r < matrix.row_ids.size(); ++r) {
        scored.emplace_back(matrix.row_ids[r], matrix.values[r][*c]);
    }
    return sorted_ranking(to_string(label), std::move(scored));
}

double blend_score(const SimilarityMatrix& matrix, std::size_t row,
                   const std::map<PatternLabel, double>& blend) {
    double total_weight = 0.0;
    double score = 0.0;
    for (const auto& [label, weight] : blend) {
        if (weight < 0.0) {
            throw ConfigError("pattern blend weight for " + to_string(label) +
                              " must be nonnegative");
        }
        auto c = matrix.col(label);
        if (!c) {
            throw ConfigError("pattern blend names absent pattern " + to_string(label));
        }
        if (weight == 0.0) {
            continue;
        }
        score += weight * matrix.values.at(row)[*c];
        total_weight += weight;
    }
    if (total_weight == 0.0) {
        throw ConfigError("pattern blend weights must not all be zero");
    }
    return score / total_weight;
}

PatternRanking rank_by(const SimilarityMatrix& matrix,
                       const std::map<PatternLabel, double>& blend) {
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(matrix.row_ids.size());
    for (std::size_t r = 0; r < matrix.row_ids.size(); ++r) {
        scored.emplace_back(matrix.row_ids[r], blend_score(matrix, r, blend));
    }
    std::ostringstream mode;
    mode << "blend(";
    bool first = true;
    for (const auto& [label, weight] : blend) {
        if (!first) {
            mode << ',';
        }
        mode << to_string(label) << ':' << weight;
        first = false;
    }
    mode << ')';
    return sorted_ranking(mode.str(), std::move(scored));
}

}  // namespace evoquery
