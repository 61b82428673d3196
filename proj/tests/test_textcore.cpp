#include <doctest.h>

#include <string>

#include "evoquery/errors.hpp"
#include "evoquery/textcore.hpp"
#include "support/test_helpers.hpp"

using namespace evoquery;
using testsupport::data_dir;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

NormConfig shipped_config() {
    return load_norm_config(data_dir() / "stopwords_en.txt", data_dir() / "stem_en.tsv");
}

}  // namespace

TEST_SUITE("textcore") {

TEST_CASE("empty input yields no tokens") {
    NormConfig cfg;
    TokenText out = normalize("", cfg);
    CHECK(out.tokens.empty());
    CHECK(out.source_length == 0);
}

TEST_CASE("all-stopword input yields no tokens") {
    NormConfig cfg;
    cfg.stopwords = {"the"};
    TokenText out = normalize("The THE the", cfg);
    CHECK(out.tokens.empty());
    CHECK(out.source_length == 3);
}

TEST_CASE("shipped rule table maps inflections of search to one stem") {
    // Hand application of data/stem_en.tsv:
    //   searching: "ing" -> search; searched: "ed" -> search;
    //   searches: "ches" -> sear+ch = search.
    NormConfig cfg = shipped_config();
    TokenText out = normalize("searching searched searches", cfg);
    REQUIRE(out.tokens.size() == 3);
    CHECK(out.tokens[0] == "search");
    CHECK(out.tokens[1] == "search");
    CHECK(out.tokens[2] == "search");
}

TEST_CASE("normalize is deterministic") {
    NormConfig cfg = shipped_config();
    std::string raw = "Mining Technologies! innovations; COAL-fired ranking?";
    CHECK(normalize(raw, cfg) == normalize(raw, cfg));
}

TEST_CASE("normalize is idempotent on its own joined output") {
    NormConfig cfg = shipped_config();
    // stringing stems past string down to str; the fixpoint keeps the
    // second application stable.
    for (const std::string raw :
         {"stringing classes studies searching", "The quick brown foxes jumped",
          "happiness happily happy", "tomatoes boxes wishes matches",
          "mining mines mined miner"}) {
        TokenText once = normalize(raw, cfg);
        TokenText twice = normalize(once.joined(), cfg);
        CHECK(twice.tokens == once.tokens);
    }
}

TEST_CASE("invalid UTF-8 reports the byte offset") {
    NormConfig cfg;
    std::string bad = "ab";
    bad += static_cast<char>(0xff);
    bad += "cd";
    CHECK_THROWS_WITH_AS(normalize(bad, cfg), doctest::Contains("byte offset 2"), DataError);

    std::string truncated = "x\xc3";  // lead byte with missing continuation
    CHECK_THROWS_WITH_AS(normalize(truncated, cfg), doctest::Contains("byte offset 1"),
                         DataError);
}

TEST_CASE("punctuation splits and hyphens survive inside tokens") {
    NormConfig cfg;
    TokenText out = normalize("well-known -- e.g. (dash)", cfg);
    REQUIRE(out.tokens.size() == 4);
    CHECK(out.tokens[0] == "well-known");
    CHECK(out.tokens[1] == "e");
    CHECK(out.tokens[2] == "g");
    CHECK(out.tokens[3] == "dash");
}

TEST_CASE("latin-1 uppercase folds to lowercase") {
    NormConfig cfg;
    TokenText out = normalize("Élan CAFÉ", cfg);
    REQUIRE(out.tokens.size() == 2);
    CHECK(out.tokens[0] == "élan");
    CHECK(out.tokens[1] == "café");
}

TEST_CASE("stopwords are enforced after stemming too") {
    NormConfig cfg;
    cfg.stopwords = {"search"};
    cfg.rules = {{"es", "", 1}};
    TokenText out = normalize("searches", cfg);
    CHECK(out.tokens.empty());  // stemmed form hits the stopword list
    CHECK(out.source_length == 1);
}

TEST_CASE("source_length counts raw tokens before filtering") {
    NormConfig cfg;
    cfg.stopwords = {"the"};
    TokenText out = normalize("the quick the fox", cfg);
    CHECK(out.source_length == 4);
    CHECK(out.tokens.size() == 2);
}

TEST_CASE("stem rule file rejects lengthening replacements") {
    TempDir dir("stemrules");
    write_text(dir.file("bad.tsv"), "y\ties\t1\n");
    CHECK_THROWS_AS(load_stem_rules(dir.file("bad.tsv")), DataError);
}

TEST_CASE("stem_token applies the first matching rule per pass") {
    std::vector<StemRule> rules = {{"sses", "ss", 1}, {"ss", "ss", 1}, {"s", "", 3}};
    CHECK(stem_token("classes", rules) == "class");  // sses, then ss guard stops
    CHECK(stem_token("class", rules) == "class");
    CHECK(stem_token("cats", rules) == "cat");
    CHECK(stem_token("gas", rules) == "gas");  // min_stem blocks
}

TEST_CASE("synonyms: absent term gives the empty set") {
    SynonymDictionary dict;
    CHECK(dict.synonyms("missing").empty());
}

TEST_CASE("synonyms: symmetric closure makes membership symmetric") {
    SynonymDictionary dict;
    dict.add("car", "auto");
    dict.apply_symmetric_closure();
    CHECK(dict.symmetric_closure_applied());
    CHECK(dict.synonyms("auto").contains("car"));
    CHECK(dict.synonyms("car").contains("auto"));
}

TEST_CASE("synonyms: no term is its own synonym, shipped dictionary included") {
    SynonymDictionary shipped =
        SynonymDictionary::load(data_dir() / "synonyms_en.tsv", true, shipped_config());
    for (const auto& [term, syns] : shipped.entries()) {
        CHECK_FALSE(syns.contains(term));
    }
    // Symmetry holds for every pair after closure.
    for (const auto& [term, syns] : shipped.entries()) {
        for (const auto& syn : syns) {
            CHECK(shipped.synonyms(syn).contains(term));
        }
    }
}

TEST_CASE("shipped dictionary lists the synonyms of mine") {
    // From data/synonyms_en.tsv: mine -> pit, colliery; colliery normalizes
    // to collieri under the shipped y->i rule.
    SynonymDictionary shipped =
        SynonymDictionary::load(data_dir() / "synonyms_en.tsv", true, shipped_config());
    const auto& syns = shipped.synonyms("mine");
    CHECK(syns.contains("pit"));
    CHECK(syns.contains("collieri"));
}

TEST_CASE("self-referencing synonym entries are dropped") {
    SynonymDictionary dict;
    dict.add("rock", "rock");
    CHECK(dict.synonyms("rock").empty());
}

TEST_CASE("authority dictionary loads and normalizes definitions") {
    NormConfig cfg = shipped_config();
    AuthorityDictionary auth = AuthorityDictionary::load(data_dir() / "authority_en.jsonl", cfg);
    const TokenText* def = auth.definition("mine");
    REQUIRE(def != nullptr);
    CHECK_FALSE(def->tokens.empty());
    CHECK(auth.definition("nonexistent-term") == nullptr);
}

TEST_CASE("authority dictionary rejects empty definitions") {
    TempDir dir("auth");
    write_text(dir.file("auth.jsonl"), "{\"term\": \"x\", \"definition\": \"the the\"}\n");
    NormConfig cfg;
    cfg.stopwords = {"the"};
    CHECK_THROWS_AS(AuthorityDictionary::load(dir.file("auth.jsonl"), cfg), DataError);
}

TEST_CASE("key concept set is sorted, distinct and normalized") {
    TempDir dir("q0");
    write_text(dir.file("q0.txt"), "Coal\nmining\ncoal\nextraction\n");
    NormConfig cfg = shipped_config();
    KeyConceptSet q0 = KeyConceptSet::load(dir.file("q0.txt"), cfg);
    CHECK(q0.size() == 3);  // coal deduplicated, mining stems to min
    CHECK(q0.contains("coal"));
    CHECK(q0.contains("extraction"));
    CHECK_FALSE(q0.contains("mining"));
}

TEST_CASE("norm config fingerprint tracks stopwords and rules") {
    NormConfig a, b;
    CHECK(a.fingerprint() == b.fingerprint());
    b.stopwords.insert("the");
    CHECK(a.fingerprint() != b.fingerprint());
    NormConfig c;
    c.rules = {{"s", "", 3}};
    CHECK(a.fingerprint() != c.fingerprint());
}

}  // TEST_SUITE
