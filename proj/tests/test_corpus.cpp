#include <catch2/catch_amalgamated.hpp>

#include "pcas/corpus.hpp"
#include "pcas/text.hpp"
#include "support/temp.hpp"

using namespace pcas;
using support::TempDir;
using support::write_file;

TEST_CASE("tokenize splits on non-alphanumeric runs and lowercases") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("a-b_c.d") == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(tokenize("BM25 k1=1.2") ==
        std::vector<std::string>{"bm25", "k1", "1", "2"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \t\n ").empty());
  CHECK(tokenize("don't") == std::vector<std::string>{"don", "t"});
  // token order reflects text order
  CHECK(tokenize("b a") == std::vector<std::string>{"b", "a"});
}

TEST_CASE("tokenize keeps multi-byte utf-8 sequences intact") {
  const auto tokens = tokenize("caf\xC3\xA9 au lait");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0] == "caf\xC3\xA9");
}

TEST_CASE("normalize_text trims, collapses whitespace, lowercases") {
  CHECK(normalize_text("  A  b\t c ") == "a b c");
  CHECK(normalize_text("x") == "x");
  CHECK(normalize_text("   ") == "");
  CHECK(normalize_text("I Live in the SWISS Alps") ==
        "i live in the swiss alps");
}

TEST_CASE("load_corpus reads one document per line") {
  TempDir dir;
  const auto path = dir.file("corpus.jsonl");
  write_file(path,
             R"({"doc_id":"d-winter","text":"...you might still get the payment if both the following apply: * you live in Switzerland...","source":"https://www.gov.uk/winter-fuel-payment/eligibility"})"
             "\n");
  const Corpus corpus = load_corpus(path);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus.at("d-winter").text.find("Switzerland") != std::string::npos);
  REQUIRE(corpus.at("d-winter").source.has_value());
  CHECK(*corpus.at("d-winter").source ==
        "https://www.gov.uk/winter-fuel-payment/eligibility");
}

TEST_CASE("load_corpus of empty file yields empty corpus") {
  TempDir dir;
  const auto path = dir.file("empty.jsonl");
  write_file(path, "");
  CHECK(load_corpus(path).size() == 0);
}

TEST_CASE("load_corpus rejects duplicate doc ids, naming the id") {
  TempDir dir;
  const auto path = dir.file("dup.jsonl");
  write_file(path,
             R"({"doc_id":"d1","text":"one"})"
             "\n"
             R"({"doc_id":"d1","text":"two"})"
             "\n");
  try {
    load_corpus(path);
    FAIL("expected duplicate-id error");
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_id);
    CHECK(std::string(e.what()).find("d1") != std::string::npos);
  }
}

TEST_CASE("load_corpus reports the line number of a malformed record") {
  TempDir dir;
  const auto path = dir.file("bad.jsonl");
  write_file(path,
             R"({"doc_id":"d1","text":"fine"})"
             "\n"
             "not json\n");
  try {
    load_corpus(path);
    FAIL("expected parse error");
  } catch (const error& e) {
    CHECK(e.code() == errc::parse_failure);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("load_corpus rejects whitespace-only text") {
  TempDir dir;
  const auto path = dir.file("blank.jsonl");
  write_file(path, R"({"doc_id":"d1","text":"   "})"
                   "\n");
  CHECK_THROWS_AS(load_corpus(path), error);
}

TEST_CASE("corpus round trip preserves order and content") {
  TempDir dir;
  Corpus corpus;
  corpus.add({"zeta", "last shall be first", std::nullopt});
  corpus.add({"alpha", "first shall be last", std::string("file://x")});
  corpus.add({"mid", "stay in the middle", std::nullopt});
  const auto path = dir.file("roundtrip.jsonl");
  save_corpus(corpus, path);
  const Corpus reloaded = load_corpus(path);
  CHECK(reloaded == corpus);
  CHECK(reloaded.ids() == std::vector<std::string>{"zeta", "alpha", "mid"});
}

static std::string example_line(const std::string& id,
                                const std::string& gold_ctx) {
  std::string line =
      R"({"example_id":")" + id +
      R"(","question":"Can I get Winter Fuel Payment?","contexts":[)"
      R"({"ctx_id":"c1","text":"I live in the Swiss Alps."},)"
      R"({"ctx_id":"c2","text":"I'm trying to export some boots."},)"
      R"({"ctx_id":"c3","text":"I work for the government."}],)"
      R"("gold_doc_id":"d-winter")";
  if (!gold_ctx.empty()) line += R"(,"gold_ctx_id":")" + gold_ctx + R"(")";
  return line + "}";
}

TEST_CASE("load_examples parses contexts and gold references") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path, example_line("e1", "c1") + "\n");
  const auto examples = load_examples(path);
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].contexts.size() == 3);
  REQUIRE(examples[0].gold_ctx_id.has_value());
  CHECK(*examples[0].gold_ctx_id == "c1");
  CHECK(examples[0].find_context("c2")->text ==
        "I'm trying to export some boots.");
}

TEST_CASE("load_examples accepts a missing gold_ctx_id") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path, example_line("e1", "") + "\n");
  const auto examples = load_examples(path);
  REQUIRE(examples.size() == 1);
  CHECK_FALSE(examples[0].gold_ctx_id.has_value());
}

TEST_CASE("load_examples rejects a dangling gold_ctx_id") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path, example_line("e1", "c9") + "\n");
  try {
    load_examples(path);
    FAIL("expected referential error");
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_reference);
    CHECK(std::string(e.what()).find("c9") != std::string::npos);
  }
}

TEST_CASE("load_examples rejects duplicate ctx ids within one example") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path,
             R"({"example_id":"e1","question":"q","contexts":[)"
             R"({"ctx_id":"c1","text":"a"},{"ctx_id":"c1","text":"b"}],)"
             R"("gold_doc_id":"d1"})"
             "\n");
  CHECK_THROWS_AS(load_examples(path), error);
}

TEST_CASE("load_examples rejects duplicate example ids") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path, example_line("e1", "c1") + "\n" + example_line("e1", "c2") +
                       "\n");
  CHECK_THROWS_AS(load_examples(path), error);
}

TEST_CASE("examples round trip through save_examples") {
  TempDir dir;
  const auto path = dir.file("examples.jsonl");
  write_file(path, example_line("e1", "c1") + "\n" + example_line("e2", "") +
                       "\n");
  const auto examples = load_examples(path);
  const auto copy = dir.file("copy.jsonl");
  save_examples(examples, copy);
  CHECK(load_examples(copy) == examples);
}

TEST_CASE("validate reports nothing for a consistent pair") {
  Corpus corpus;
  corpus.add({"d-winter", "rules text", std::nullopt});
  Example ex;
  ex.example_id = "e1";
  ex.question = "q";
  ex.contexts = {{"c1", "context one"}, {"c2", "context two"}};
  ex.gold_doc_id = "d-winter";
  ex.gold_ctx_id = "c1";
  const auto report = validate(corpus, {&ex, 1});
  CHECK(report.empty());
}

TEST_CASE("validate flags each inconsistency kind") {
  Corpus corpus;
  corpus.add({"d1", "text", std::nullopt});

  SECTION("dangling gold_doc_id") {
    Example ex{"e1", "q", {{"c1", "a"}}, "d-missing", "c1"};
    const auto report = validate(corpus, {&ex, 1});
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].kind == FindingKind::missing_gold_doc);
    CHECK(report.findings[0].example_id == "e1");
  }

  SECTION("empty context set") {
    Example ex{"e1", "q", {}, "d1", std::nullopt};
    const auto report = validate(corpus, {&ex, 1});
    CHECK(report.count(FindingKind::empty_context_set) == 1);
  }

  SECTION("duplicate context text up to normalization") {
    Example ex{"e1",
               "q",
               {{"c1", "Same  Thing"}, {"c2", " same thing "}},
               "d1",
               "c1"};
    const auto report = validate(corpus, {&ex, 1});
    CHECK(report.count(FindingKind::duplicate_context_text) == 1);
  }

  SECTION("missing gold context is a finding, not an error") {
    Example ex{"e1", "q", {{"c1", "a"}}, "d1", std::nullopt};
    const auto report = validate(corpus, {&ex, 1});
    CHECK(report.count(FindingKind::missing_gold_context) == 1);
  }
}
