// Acceptance gate: one self-contained check per shipping criterion, each
// printed as a single PASS/FAIL line. Exits nonzero if anything fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pcas/pcas.hpp"
#include "support/fixture_scorer.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/temp.hpp"

namespace {

bool note(bool ok, const std::string& what) {
  if (!ok) std::fprintf(stderr, "  detail: %s\n", what.c_str());
  return ok;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fixture(const char* rel) {
  return std::string(PCAS_FIXTURE_DIR) + "/" + rel;
}

std::set<std::string> relevant_of(const std::map<std::string, int>& row) {
  std::set<std::string> out;
  for (const auto& [item, grade] : row) out.insert(item);
  return out;
}

// --- 1: recall and AP agree with a brute-force evaluator ------------------

bool metric_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  pcas::SplitMix64 rng(101);
  static const pcas::RankedList kEmpty;
  for (int round = 0; round < 200; ++round) {
    const std::size_t n_queries = 1 + rng.below(25);
    pcas::Run run;
    pcas::Qrels qrels;
    for (std::size_t q = 0; q < n_queries; ++q) {
      const std::string qid = "q" + std::to_string(q + 1);
      qrels[qid]["i" + std::to_string(1 + rng.below(25))] = 1;
      if (rng.below(10) == 0) continue;  // missing-from-run queries score 0
      run[qid] = support::random_ranked_list(rng, 1 + rng.below(20));
    }
    for (std::size_t k : {1u, 3u, 5u, 10u}) {
      const pcas::MetricsReport recall = pcas::recall_at_k(run, qrels, k);
      const pcas::MetricsReport ap = pcas::map_at_k(run, qrels, k);
      const std::string rname = "recall@" + std::to_string(k);
      const std::string mname = "map@" + std::to_string(k);
      double rsum = 0.0;
      double msum = 0.0;
      for (const auto& [qid, row] : qrels) {
        const auto it = run.find(qid);
        const pcas::RankedList& list = it == run.end() ? kEmpty : it->second;
        const std::set<std::string> rel = relevant_of(row);
        const double r = oracle::recall(list, rel, k);
        const double m = oracle::average_precision(list, rel, k);
        rsum += r;
        msum += m;
        if (recall.per_query.at(qid).at(rname) != r ||
            ap.per_query.at(qid).at(mname) != m) {
          return note(false, "per-query mismatch at " + qid + " k=" +
                                 std::to_string(k));
        }
      }
      const double n = static_cast<double>(qrels.size());
      if (recall.aggregate.at(rname) != rsum / n ||
          ap.aggregate.at(mname) != msum / n) {
        return note(false, "aggregate mismatch at k=" + std::to_string(k));
      }
    }
  }
  return note(seconds_since(start) < 5.0, "exceeded the 5s budget");
}

// --- 2: bounded top-k selection equals a full sort -------------------------

bool top_k_exactness() {
  const auto start = std::chrono::steady_clock::now();
  pcas::SplitMix64 rng(202);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = 1 + rng.below(50);
    std::map<std::string, double> scores;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "i" + std::to_string(i + 1);
      scores[id] = support::lattice_score(rng, 5);  // dense ties
      ids.push_back(id);
    }
    pcas::shuffle(ids, rng);  // selection must not depend on arrival order
    const std::size_t k = 1 + rng.below(n + 5);
    const pcas::RankedList got = pcas::top_k(
        [&](const std::string& id) { return scores.at(id); }, ids, k);
    if (!(got == oracle::top_k(scores, k))) {
      return note(false, "selection mismatch at round " +
                             std::to_string(round));
    }
  }
  return note(seconds_since(start) < 5.0, "exceeded the 5s budget");
}

// --- 3: the combination collapses to its documented degenerate forms -------

struct RandomFixture {
  support::FixtureScorer scorer;
  pcas::Example ex;
  std::size_t n_docs = 0;
  std::size_t n_ctx = 0;
};

RandomFixture random_fixture(pcas::SplitMix64& rng, std::size_t max_docs,
                             std::size_t max_ctx) {
  RandomFixture f;
  f.n_docs = 2 + rng.below(max_docs - 1);
  f.n_ctx = 1 + rng.below(max_ctx);
  f.ex.example_id = "e";
  f.ex.question = "q";
  f.ex.gold_doc_id = "d" + std::to_string(1 + rng.below(f.n_docs));
  f.ex.gold_ctx_id = "c1";
  for (std::size_t j = 0; j < f.n_ctx; ++j) {
    f.ex.contexts.push_back({"c" + std::to_string(j + 1), "-"});
  }
  for (std::size_t i = 0; i < f.n_docs; ++i) {
    const std::string id = "d" + std::to_string(i + 1);
    f.scorer.docs.push_back(id);
    f.scorer.dq["q"][id] = support::lattice_score(rng, 9);
    for (std::size_t j = 0; j < f.n_ctx; ++j) {
      f.scorer.cd[id]["c" + std::to_string(j + 1)] =
          support::lattice_score(rng, 9);
    }
  }
  return f;
}

bool pcas_degeneracies() {
  pcas::SplitMix64 rng(303);
  const double lambdas[] = {0.0, 0.25, 0.5, 0.75};
  for (int round = 0; round < 100; ++round) {
    const RandomFixture f = random_fixture(rng, 8, 8);
    const pcas::Query question = pcas::bare_question(f.ex);
    const pcas::RankedList by_question =
        f.scorer.rank_docs(question, f.n_docs);

    pcas::MethodConfig cfg;
    cfg.method = pcas::Method::PCAS;
    cfg.lambda = 1.0;
    cfg.beam = 1 + rng.below(f.n_docs);
    cfg.k_out = cfg.beam;
    cfg.normalize_combination = rng.below(2) == 1;
    const pcas::MethodResult all_question = pcas::run_pcas(f.ex, f.scorer, cfg);
    if (all_question.ranked_docs.front().item_id !=
        by_question.front().item_id) {
      return note(false, "lambda=1 moved the top document");
    }

    cfg.lambda = lambdas[rng.below(4)];
    cfg.beam = 1;
    cfg.k_out = 1;
    const pcas::MethodResult narrow = pcas::run_pcas(f.ex, f.scorer, cfg);
    const std::string& top = by_question.front().item_id;
    if (narrow.ranked_docs.front().item_id != top) {
      return note(false, "beam=1 moved the top document");
    }
    std::string best_ctx;
    double best_score = 0.0;
    for (const auto& [ctx, score] : f.scorer.cd.at(top)) {
      if (best_ctx.empty() || score > best_score ||
          (score == best_score && ctx < best_ctx)) {
        best_ctx = ctx;
        best_score = score;
      }
    }
    if (!narrow.predicted_context ||
        narrow.predicted_context->ctx_id != best_ctx ||
        narrow.predicted_context->score != best_score) {
      return note(false, "beam=1 predicted the wrong context");
    }

    const std::size_t K = 1 + rng.below(f.n_docs);
    cfg.lambda = lambdas[rng.below(4)];
    cfg.beam = K;
    cfg.k_out = K;
    cfg.normalize_combination = rng.below(2) == 1;
    const pcas::MethodResult rescored = pcas::run_pcas(f.ex, f.scorer, cfg);
    pcas::MethodConfig b2;
    b2.method = pcas::Method::B2;
    b2.k_out = K;
    const pcas::MethodResult question_only = pcas::run_b2(f.ex, f.scorer, b2);
    std::set<std::string> got, want;
    for (const pcas::ScoredItem& item : rescored.ranked_docs.items) {
      got.insert(item.item_id);
    }
    for (const pcas::ScoredItem& item : question_only.ranked_docs.items) {
      want.insert(item.item_id);
    }
    if (got != want) return note(false, "beam=K changed the top-K set");
    const std::set<std::string> rel{f.ex.gold_doc_id};
    if (oracle::recall(rescored.ranked_docs, rel, K) !=
        oracle::recall(question_only.ranked_docs, rel, K)) {
      return note(false, "beam=K changed recall@K");
    }
  }
  return true;
}

// --- 4: the engine matches exhaustive enumeration ---------------------------

bool pcas_enumeration_exactness() {
  pcas::SplitMix64 rng(404);
  for (int round = 0; round < 40; ++round) {
    const RandomFixture f = random_fixture(rng, 10, 10);
    std::vector<std::string> ctx_ids;
    for (const pcas::ContextItem& c : f.ex.contexts) ctx_ids.push_back(c.ctx_id);
    for (double lambda : {0.25, 0.5, 0.6, 0.75}) {
      for (std::size_t beam : {1u, 3u, 5u}) {
        pcas::MethodConfig cfg;
        cfg.method = pcas::Method::PCAS;
        cfg.lambda = lambda;
        cfg.beam = beam;
        cfg.k_out = 1 + rng.below(beam);
        cfg.normalize_combination = rng.below(2) == 1;
        const pcas::MethodResult got = pcas::run_pcas(f.ex, f.scorer, cfg);
        const oracle::PcasExpectation want = oracle::pcas_by_enumeration(
            f.scorer.dq.at("q"), f.scorer.cd, ctx_ids, lambda, beam,
            cfg.k_out, cfg.normalize_combination);
        if (!(got.ranked_docs == want.ranked_docs) ||
            !got.predicted_context ||
            got.predicted_context->ctx_id != want.predicted_ctx ||
            got.predicted_context->score != want.predicted_score) {
          return note(false, "enumeration mismatch at lambda=" +
                                 std::to_string(lambda) + " beam=" +
                                 std::to_string(beam));
        }
      }
    }
  }
  return true;
}

// --- 5: the methods separate on the frozen fixture --------------------------

bool separability_ordering() {
  const pcas::Corpus corpus =
      pcas::load_corpus(fixture("separability/corpus.jsonl"));
  const std::vector<pcas::Example> examples =
      pcas::load_examples(fixture("separability/examples.jsonl"));
  const pcas::LexicalScorer scorer(corpus, {});
  const pcas::Qrels qrels = pcas::doc_qrels(examples);

  const auto run_of = [&](pcas::Method method) {
    pcas::MethodConfig cfg;
    cfg.method = method;
    pcas::Run run;
    for (const pcas::Example& ex : examples) {
      run[ex.example_id] = pcas::run_method(ex, scorer, cfg).ranked_docs;
    }
    return run;
  };

  const double b1 =
      pcas::recall_at_k(run_of(pcas::Method::B1), qrels, 1).aggregate.at(
          "recall@1");
  const double combined =
      pcas::recall_at_k(run_of(pcas::Method::PCAS), qrels, 1).aggregate.at(
          "recall@1");
  const double b2_map =
      pcas::map_at_k(run_of(pcas::Method::B2), qrels, 5).aggregate.at("map@5");
  const double b3_map =
      pcas::map_at_k(run_of(pcas::Method::B3), qrels, 5).aggregate.at("map@5");

  bool ok = note(b1 == 0.75 && b1 < 1.0, "concatenation drowned nothing");
  ok = note(combined == 1.0, "combined retrieval missed a gold doc") && ok;
  ok = note(b2_map == 0.875 && b3_map == 0.75 && b2_map > b3_map,
            "chained selection failed to trail") &&
       ok;
  return ok;
}

// --- 6: dataset construction saturates, flags, and reproduces ---------------

bool dataset_construction() {
  std::vector<pcas::Example> sources;
  for (int i = 0; i < 12; ++i) {
    pcas::Example ex;
    ex.example_id = "s" + std::to_string(i + 1);
    ex.question = "question " + std::to_string(i + 1);
    ex.gold_doc_id = "d" + std::to_string(i + 1);
    ex.gold_ctx_id = "c1";
    ex.contexts.push_back({"c1", "gold fact " + std::to_string(i + 1)});
    ex.contexts.push_back({"c2", "filler a " + std::to_string(i + 1)});
    ex.contexts.push_back({"c3", "filler b " + std::to_string(i + 1)});
    sources.push_back(std::move(ex));
  }

  pcas::BuildConfig cfg;
  cfg.target_size = 10;
  cfg.min_size = 6;
  cfg.seed = 5;
  const pcas::PermissiveJudge permissive;
  const auto [built, report] = pcas::build_dataset(sources, permissive, cfg);
  if (!note(report.saturated == sources.size() && report.short_sets == 0,
            "permissive build failed to saturate")) {
    return false;
  }
  for (std::size_t i = 0; i < built.size(); ++i) {
    const pcas::Example& ex = built[i];
    std::set<std::string> texts;
    for (const pcas::ContextItem& c : ex.contexts) {
      texts.insert(pcas::normalize_text(c.text));
    }
    const pcas::ContextItem* gold =
        ex.gold_ctx_id ? ex.find_context(*ex.gold_ctx_id) : nullptr;
    if (ex.contexts.size() != 10 || texts.size() != 10 || gold == nullptr ||
        gold->text != sources[i].contexts.front().text) {
      return note(false, "built set lost the gold context or a slot");
    }
  }

  pcas::Example poisoned;
  poisoned.example_id = "p1";
  poisoned.question = "is x true";
  poisoned.gold_doc_id = "d1";
  poisoned.gold_ctx_id = "c1";
  poisoned.contexts.push_back({"c1", "x is true"});
  poisoned.contexts.push_back({"c2", "x is not true"});
  poisoned.contexts.push_back({"c3", "x isn't true"});
  const pcas::HeuristicJudge heuristic;
  const auto [flagged, flag_report] = pcas::build_dataset(
      std::vector<pcas::Example>{poisoned}, heuristic, cfg);
  const std::size_t size = flagged.front().contexts.size();
  if (!note(size >= 1 && size <= 9 && flag_report.short_sets == 1,
            "contradictory pool was not flagged short")) {
    return false;
  }

  support::TempDir tmp;
  const auto rebuilt = pcas::build_dataset(sources, permissive, cfg);
  pcas::save_examples(built, tmp.file("a.jsonl"));
  pcas::save_examples(rebuilt.first, tmp.file("b.jsonl"));
  return note(support::read_file(tmp.file("a.jsonl")) ==
                  support::read_file(tmp.file("b.jsonl")),
              "same-seed builds diverged");
}

// --- 7: persisted artifacts survive write-then-read unchanged ---------------

bool round_trips() {
  support::TempDir tmp;
  pcas::SplitMix64 rng(707);
  for (int round = 0; round < 100; ++round) {
    pcas::Run run;
    const std::size_t n_queries = 1 + rng.below(8);
    for (std::size_t q = 0; q < n_queries; ++q) {
      std::map<std::string, double> scores;
      const std::size_t n_items = 1 + rng.below(12);
      for (std::size_t i = 0; i < n_items; ++i) {
        // six-decimal lattice so the fixed-point file format is lossless
        scores["doc" + std::to_string(i + 1)] =
            static_cast<double>(rng.below(1000000)) / 1e6;
      }
      run["q" + std::to_string(q + 1)] = oracle::top_k(scores, n_items);
    }
    const std::string path = tmp.file("run.trec");
    pcas::write_trec_run(run, "round-trip", path);
    std::string tag;
    const pcas::Run parsed = pcas::parse_trec_run(path, &tag);
    if (tag != "round-trip" || !(parsed == run)) {
      return note(false, "run changed across write/parse");
    }
  }

  for (std::size_t dim = 3; dim <= 64; ++dim) {
    pcas::EmbeddingTable table(
        dim, dim % 2 ? pcas::Similarity::cosine : pcas::Similarity::dot);
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<float> vec(dim);
      for (float& x : vec) {
        x = static_cast<float>(rng.next_double() * 2.0 - 1.0);
      }
      table.add("v" + std::to_string(i + 1), std::span<const float>(vec));
    }
    const std::string path = tmp.file("table.bin");
    pcas::save_embeddings_binary(table, path);
    const pcas::EmbeddingTable loaded =
        pcas::load_embeddings_binary(path, table.similarity());
    if (!(loaded == table)) {
      return note(false, "embeddings changed across write/parse at dim " +
                             std::to_string(dim));
    }
  }
  return true;
}

// --- 8: the full CLI pipeline holds up at working scale --------------------

bool scale_smoke() {
  const auto start = std::chrono::steady_clock::now();
  support::TempDir tmp;
  pcas::SplitMix64 rng(808);

  pcas::Corpus corpus;
  double total_tokens = 0.0;
  for (std::size_t i = 0; i < 651; ++i) {
    const std::string text = support::random_text(rng, 27, 50, 2000);
    total_tokens += static_cast<double>(pcas::tokenize(text).size());
    corpus.add({"d" + std::to_string(i + 1), text, std::nullopt});
  }
  const double avg_len = total_tokens / 651.0;
  if (!note(std::abs(avg_len - 38.5) < 2.0, "corpus density drifted")) {
    return false;
  }

  std::vector<pcas::Example> examples;
  for (std::size_t i = 0; i < 1105; ++i) {
    pcas::Example ex;
    ex.example_id = "e" + std::to_string(i + 1);
    ex.question = support::random_text(rng, 3, 8, 2000);
    ex.gold_doc_id = "d" + std::to_string(1 + rng.below(651));
    ex.gold_ctx_id = "c" + std::to_string(1 + rng.below(10));
    std::set<std::string> seen;
    while (ex.contexts.size() < 10) {
      const std::string text = support::random_text(rng, 5, 15, 2000);
      if (!seen.insert(pcas::normalize_text(text)).second) continue;
      ex.contexts.push_back(
          {"c" + std::to_string(ex.contexts.size() + 1), text});
    }
    examples.push_back(std::move(ex));
  }

  const std::string corpus_path = tmp.file("corpus.jsonl");
  const std::string examples_path = tmp.file("examples.jsonl");
  pcas::save_corpus(corpus, corpus_path);
  pcas::save_examples(examples, examples_path);
  const std::string out = tmp.file("out");

  const auto cli = [](const std::string& args) {
    const std::string cmd =
        std::string(PCAS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };

  const std::string inputs =
      " --corpus " + corpus_path + " --examples " + examples_path;
  bool ok = note(cli("index --corpus " + corpus_path + " --out " + out),
                 "index failed");
  ok = note(cli("run" + inputs + " --method or,b1,b2,b3,pcas --out " + out),
            "lexical run failed") &&
       ok;
  ok = note(cli("run" + inputs +
                " --method or,b1,b2,b3,pcas --scorer hash --hash-dim 64 "
                "--out " +
                out),
            "hashed run failed") &&
       ok;
  const std::string runs = out + "/runs/";
  ok = note(cli("eval --out " + out + " --name scale --run " + runs +
                "docs-or-lexical-seed0.trec --run " + runs +
                "docs-b1-lexical-seed0.trec --run " + runs +
                "docs-b2-lexical-seed0.trec --run " + runs +
                "docs-b3-lexical-seed0.trec --run " + runs +
                "docs-pcas-l0.60-b5-lexical-seed0.trec --ctx-run " + runs +
                "ctx-b2-lexical-seed0.trec --ctx-run " + runs +
                "ctx-b3-lexical-seed0.trec --ctx-run " + runs +
                "ctx-pcas-l0.60-b5-lexical-seed0.trec"),
            "eval failed") &&
       ok;
  namespace fs = std::filesystem;
  ok = note(fs::exists(out + "/reports/scale.txt") &&
                fs::exists(out + "/reports/scale.jsonl") &&
                fs::exists(runs + "docs-pcas-l0.60-b5-hash-seed0.trec"),
            "expected artifacts missing") &&
       ok;
  return note(seconds_since(start) < 60.0, "exceeded the 60s budget") && ok;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<bool()>> criteria[] = {
      {"metric-oracle-equivalence", metric_oracle_equivalence},
      {"top-k-exactness", top_k_exactness},
      {"pcas-degeneracies", pcas_degeneracies},
      {"pcas-enumeration-exactness", pcas_enumeration_exactness},
      {"separability-ordering", separability_ordering},
      {"dataset-construction", dataset_construction},
      {"round-trips", round_trips},
      {"scale-smoke", scale_smoke},
  };

  bool all_ok = true;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  detail: unexpected exception: %s\n", e.what());
    }
    std::printf("ACCEPTANCE %d %s: %s\n", index, name, ok ? "PASS" : "FAIL");
    all_ok = all_ok && ok;
    ++index;
  }
  return all_ok ? 0 : 1;
}
