#include "evoquery/textcore.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evoquery/errors.hpp"
#include "evoquery/util.hpp"

namespace evoquery {

namespace {

// Decodes one UTF-8 codepoint; throws DataError with the byte offset of the
// first malformed byte. Rejects overlong forms, surrogates and > U+10FFFF.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    auto fail = [&](std::size_t at) -> std::uint32_t {
        throw DataError("invalid UTF-8 at byte offset " + std::to_string(at));
    };
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len;
    std::uint32_t cp;
    if ((b0 & 0xe0) == 0xc0) {
        len = 2;
        cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
        len = 3;
        cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return fail(i);
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        return fail(i);
    }
    for (int k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((bk & 0xc0) != 0x80) {
            return fail(i + static_cast<std::size_t>(k));
        }
        cp = (cp << 6) | (bk & 0x3f);
    }
    static const std::uint32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
        return fail(i);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::uint32_t fold_case(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') {
        return cp + 0x20;
    }
    // Latin-1 supplement uppercase, skipping the multiplication sign.
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) {
        return cp + 0x20;
    }
    return cp;
}

bool is_token_char(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9') || cp == '-';
    }
    // Common non-ASCII separators and punctuation.
    if (cp >= 0xa0 && cp <= 0xbf) return false;  // Latin-1 punctuation block
    if (cp == 0xd7 || cp == 0xf7) return false;
    if (cp >= 0x2000 && cp <= 0x206f) return false;  // general punctuation
    if (cp >= 0x3000 && cp <= 0x303f) return false;  // CJK punctuation
    return true;
}

std::string trim_hyphens(std::string token) {
    std::size_t begin = token.find_first_not_of('-');
    if (begin == std::string::npos) {
        return {};
    }
    std::size_t end = token.find_last_not_of('-');
    return token.substr(begin, end - begin + 1);
}

}  // namespace

std::string TokenText::joined() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += tokens[i];
    }
    return out;
}

std::uint64_t NormConfig::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& w : stopwords) {
        h = fnv1a64(w, h);
        h = fnv1a64("\n", h);
    }
    h = fnv1a64("|rules|", h);
    for (const auto& r : rules) {
        h = fnv1a64(r.suffix, h);
        h = fnv1a64("\t", h);
        h = fnv1a64(r.replacement, h);
        h = fnv1a64("\t" + std::to_string(r.min_stem) + "\n", h);
    }
    return h;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open stopword file: " + path.string());
    }
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        words.insert(line);
    }
    return words;
}

std::vector<StemRule> load_stem_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open stemmer rule file: " + path.string());
    }
    std::vector<StemRule> rules;
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
        if (fields.size() != 3) {
            throw DataError("stemmer rule line " + std::to_string(line_no) +
                            ": expected suffix<TAB>replacement<TAB>min_stem");
        }
        StemRule rule;
        rule.suffix = fields[0];
        rule.replacement = fields[1];
        if (rule.suffix.empty()) {
            throw DataError("stemmer rule line " + std::to_string(line_no) + ": empty suffix");
        }
        if (rule.replacement.size() > rule.suffix.size()) {
            throw DataError("stemmer rule line " + std::to_string(line_no) +
                            ": replacement longer than suffix");
        }
        try {
            rule.min_stem = static_cast<std::size_t>(std::stoul(fields[2]));
        } catch (const std::exception&) {
            throw DataError("stemmer rule line " + std::to_string(line_no) + ": bad min_stem");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

NormConfig load_norm_config(const std::filesystem::path& stopwords_path,
                            const std::filesystem::path& rules_path) {
    NormConfig cfg;
    if (!stopwords_path.empty()) {
        cfg.stopwords = load_stopwords(stopwords_path);
    }
    if (!rules_path.empty()) {
        cfg.rules = load_stem_rules(rules_path);
    }
    return cfg;
}

std::string stem_token(std::string token, const std::vector<StemRule>& rules) {
    // Replacements never lengthen the word, so the fixpoint exists; the cap
    // guards against same-length rewrite cycles in user-supplied tables.
    for (int pass = 0; pass < 8; ++pass) {
        bool changed = false;
        for (const auto& rule : rules) {
            if (token.size() < rule.suffix.size()) {
                continue;
            }
            std::size_t stem_len = token.size() - rule.suffix.size();
            if (stem_len < rule.min_stem) {
                continue;
            }
            if (token.compare(stem_len, rule.suffix.size(), rule.suffix) != 0) {
                continue;
            }
            if (rule.replacement != rule.suffix) {
                token.replace(stem_len, rule.suffix.size(), rule.replacement);
                changed = true;
            }
            break;  // first matching rule decides the pass
        }
        if (!changed) {
            break;
        }
    }
    return token;
}

TokenText normalize(std::string_view raw, const NormConfig& cfg) {
    TokenText out;
    std::string current;
    std::vector<std::string> raw_tokens;
    auto flush = [&] {
        if (current.empty()) {
            return;
        }
        std::string token = trim_hyphens(std::move(current));
        current.clear();
        if (!token.empty()) {
            raw_tokens.push_back(std::move(token));
        }
    };
    std::size_t i = 0;
    while (i < raw.size()) {
        std::uint32_t cp = fold_case(decode_utf8(raw, i));
        if (is_token_char(cp)) {
            encode_utf8(cp, current);
        } else {
            flush();
        }
    }
    flush();

    out.source_length = raw_tokens.size();
    for (auto& token : raw_tokens) {
        if (cfg.stopwords.contains(token)) {
            continue;
        }
        std::string lemma = stem_token(std::move(token), cfg.rules);
        // Stemming may expose a stopword or consume the whole token; both
        // would break the TokenText invariants.
        if (lemma.empty() || cfg.stopwords.contains(lemma)) {
            continue;
        }
        out.tokens.push_back(std::move(lemma));
    }
    return out;
}

SynonymDictionary SynonymDictionary::load(const std::filesystem::path& path,
                                          bool symmetric_closure, const NormConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open synonym dictionary: " + path.string());
    }
    SynonymDictionary dict;
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
        if (fields.size() != 2 || fields[0].empty()) {
            throw DataError("synonym dictionary line " + std::to_string(line_no) +
                            ": expected lemma<TAB>syn1,syn2,...");
        }
        TokenText term = normalize(fields[0], cfg);
        if (term.tokens.size() != 1) {
            throw DataError("synonym dictionary line " + std::to_string(line_no) + ": term \"" +
                            fields[0] + "\" does not reduce to a single lemma");
        }
        for (const auto& raw_syn : split(fields[1], ',')) {
            TokenText syn = normalize(raw_syn, cfg);
            if (syn.tokens.size() > 1) {
                throw DataError("synonym dictionary line " + std::to_string(line_no) +
                                ": synonym \"" + raw_syn +
                                "\" does not reduce to a single lemma");
            }
            if (syn.tokens.size() == 1) {
                dict.add(term.tokens[0], syn.tokens[0]);
            }
        }
    }
    if (symmetric_closure) {
        dict.apply_symmetric_closure();
    }
    return dict;
}

void SynonymDictionary::add(const std::string& term, const std::string& synonym) {
    if (term == synonym) {
        return;
    }
    entries_[term].insert(synonym);
}

void SynonymDictionary::apply_symmetric_closure() {
    // Snapshot first; inserting while iterating would invalidate nothing for
    // std::map, but the snapshot keeps the pass single-direction.
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [term, syns] : entries_) {
        for (const auto& syn : syns) {
            pairs.emplace_back(term, syn);
        }
    }
    for (const auto& [term, syn] : pairs) {
        add(syn, term);
    }
    symmetric_closure_applied_ = true;
}

const std::set<std::string>& SynonymDictionary::synonyms(const std::string& term) const {
    static const std::set<std::string> empty;
    auto it = entries_.find(term);
    return it == entries_.end() ? empty : it->second;
}

AuthorityDictionary AuthorityDictionary::load(const std::filesystem::path& path,
                                              const NormConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open authority dictionary: " + path.string());
    }
    AuthorityDictionary dict;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json entry = nlohmann::json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("term") || !entry.contains("definition")) {
            throw DataError("authority dictionary line " + std::to_string(line_no) +
                            ": expected {\"term\": ..., \"definition\": ...}");
        }
        std::string term = normalize(entry["term"].get<std::string>(), cfg).joined();
        TokenText definition = normalize(entry["definition"].get<std::string>(), cfg);
        if (term.empty() || definition.empty()) {
            throw DataError("authority dictionary line " + std::to_string(line_no) +
                            ": term or definition normalizes to nothing");
        }
        dict.add(term, std::move(definition));
    }
    return dict;
}

void AuthorityDictionary::add(const std::string& term, TokenText definition) {
    entries_[term] = std::move(definition);
}

const TokenText* AuthorityDictionary::definition(const std::string& term) const {
    auto it = entries_.find(term);
    return it == entries_.end() ? nullptr : &it->second;
}

KeyConceptSet KeyConceptSet::from_terms(std::vector<std::string> terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    KeyConceptSet q0;
    q0.concepts = std::move(terms);
    return q0;
}

KeyConceptSet KeyConceptSet::load(const std::filesystem::path& path, const NormConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open key concept file: " + path.string());
    }
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& token : normalize(line, cfg).tokens) {
            terms.push_back(std::move(token));
        }
    }
    if (terms.empty()) {
        throw DataError("key concept file is empty: " + path.string());
    }
    return from_terms(std::move(terms));
}

bool KeyConceptSet::contains(const std::string& term) const {
    return std::binary_search(concepts.begin(), concepts.end(), term);
}

}  // namespace evoquery
