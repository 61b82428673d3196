#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evoquery {

// Normalized text: lowercase lemma tokens, stopwords removed, suffixes
// stripped. Every downstream vector is built from one of these.
struct TokenText {
    std::vector<std::string> tokens;
    std::size_t source_length = 0;  // raw token count before filtering

    bool empty() const { return tokens.empty(); }
    std::string joined() const;

    bool operator==(const TokenText&) const = default;
};

// One suffix-strip rule: if the word ends with `suffix` and at least
// `min_stem` characters remain before it, replace the suffix.
struct StemRule {
    std::string suffix;
    std::string replacement;
    std::size_t min_stem = 1;
};

struct NormConfig {
    std::set<std::string> stopwords;
    std::vector<StemRule> rules;

    // Fingerprint stored in corpus manifests so an index can refuse input
    // normalized under a different configuration.
    std::uint64_t fingerprint() const;
};

std::set<std::string> load_stopwords(const std::filesystem::path& path);

// Rule file: `suffix<TAB>replacement<TAB>min_stem` per line, `#` comments.
// The replacement may be empty and must not be longer than the suffix, so
// repeated application terminates.
std::vector<StemRule> load_stem_rules(const std::filesystem::path& path);

NormConfig load_norm_config(const std::filesystem::path& stopwords_path,
                            const std::filesystem::path& rules_path);

// First matching rule per pass, iterated to a fixpoint (capped), which makes
// normalize idempotent on its own output.
std::string stem_token(std::string token, const std::vector<StemRule>& rules);

// lowercase -> strip punctuation -> split -> drop stopwords -> stem.
// Input must be valid UTF-8; a bad byte raises DataError naming its offset.
// Case folding covers ASCII and the Latin-1 supplement; other codepoints
// pass through unchanged and are treated as letters.
TokenText normalize(std::string_view raw, const NormConfig& cfg);

class SynonymDictionary {
public:
    SynonymDictionary() = default;

    // TSV format: `lemma<TAB>syn1,syn2,...`. Terms and synonyms are
    // normalized on load so surface forms are acceptable; every entry must
    // reduce to a single lemma. Synonyms that normalize away (stopwords)
    // are skipped.
    static SynonymDictionary load(const std::filesystem::path& path, bool symmetric_closure,
                                  const NormConfig& cfg = {});

    // Self-references are dropped, keeping t out of synonyms(t).
    void add(const std::string& term, const std::string& synonym);
    void apply_symmetric_closure();

    // Stored synonym set; empty when the term is absent.
    const std::set<std::string>& synonyms(const std::string& term) const;

    bool symmetric_closure_applied() const { return symmetric_closure_applied_; }
    const std::map<std::string, std::set<std::string>>& entries() const { return entries_; }

private:
    std::map<std::string, std::set<std::string>> entries_;
    bool symmetric_closure_applied_ = false;
};

class AuthorityDictionary {
public:
    AuthorityDictionary() = default;

    // JSONL format: {"term": ..., "definition": ...} per line. Definitions
    // are normalized on load; an entry whose definition normalizes to
    // nothing is rejected.
    static AuthorityDictionary load(const std::filesystem::path& path, const NormConfig& cfg);

    void add(const std::string& term, TokenText definition);
    const TokenText* definition(const std::string& term) const;
    bool empty() const { return entries_.empty(); }
    const std::map<std::string, TokenText>& entries() const { return entries_; }

private:
    std::map<std::string, TokenText> entries_;
};

// The generalized request Q_o: the concept pool queries are built from.
struct KeyConceptSet {
    std::vector<std::string> concepts;  // sorted, distinct, normalized

    static KeyConceptSet from_terms(std::vector<std::string> terms);
    // One concept per line; each line normalized, blanks skipped.
    static KeyConceptSet load(const std::filesystem::path& path, const NormConfig& cfg);

    std::size_t size() const { return concepts.size(); }
    bool contains(const std::string& term) const;
};

}  // namespace evoquery
