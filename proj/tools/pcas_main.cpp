// pcas: batch experiments for context-aware passage retrieval.
//
// Subcommands cover the full loop: index a corpus, run retrieval methods,
// evaluate run files, sweep PCAS hyperparameters, build context-set
// datasets, export composed queries for external embedding, and validate
// inputs. Every output byte is determined by the flags and input files.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcas/pcas.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("PCAS_OUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : "./out";
}

std::string subdir(const std::string& out, const char* name) {
  const fs::path dir = fs::path(out) / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    pcas::fail(pcas::errc::io_failure,
               "cannot create directory '" + dir.string() + "': " + ec.message());
  }
  return dir.string();
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void check_bm25(const pcas::Bm25Params& params) {
  if (!(params.k1 > 0.0)) {
    pcas::fail(pcas::errc::bad_argument, "k1 must be positive");
  }
  if (!(params.b >= 0.0 && params.b <= 1.0)) {
    pcas::fail(pcas::errc::bad_argument, "b must lie in [0, 1]");
  }
}

std::string format_fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
  return buf;
}

/// Tag used in run file names and TREC lines; PCAS tags pin lambda and beam
/// so grid points never collide.
std::string method_tag(const pcas::MethodConfig& cfg) {
  if (cfg.method != pcas::Method::PCAS) return pcas::method_name(cfg.method);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "pcas-l%.2f-b%zu", cfg.lambda, cfg.beam);
  return buf;
}

struct ScorerOptions {
  std::string kind = "lexical";
  std::string embeddings;
  std::string similarity = "cosine";
  std::size_t hash_dim = 256;
  bool hash_fallback = false;
  pcas::Bm25Params bm25;
};

void add_scorer_flags(CLI::App* cmd, ScorerOptions& opt) {
  cmd->add_option("--scorer", opt.kind, "Scorer kind")
      ->check(CLI::IsMember({"lexical", "embedding", "hash"}))
      ->capture_default_str();
  cmd->add_option("--embeddings", opt.embeddings,
                  "Embedding table path (jsonl or binary), for --scorer embedding");
  cmd->add_option("--similarity", opt.similarity,
                  "Vector similarity for embedding/hash scorers")
      ->check(CLI::IsMember({"cosine", "dot"}))
      ->capture_default_str();
  cmd->add_option("--hash-dim", opt.hash_dim,
                  "Dimension for hashed embeddings")
      ->capture_default_str();
  cmd->add_flag("--hash-fallback", opt.hash_fallback,
                "Hash ids missing from the embedding table instead of failing");
  cmd->add_option("--k1", opt.bm25.k1, "BM25 k1")->capture_default_str();
  cmd->add_option("--b", opt.bm25.b, "BM25 b")->capture_default_str();
}

std::unique_ptr<pcas::Scorer> make_scorer(const ScorerOptions& opt,
                                          const pcas::Corpus& corpus,
                                          std::uint64_t seed) {
  check_bm25(opt.bm25);
  const pcas::Similarity sim = pcas::parse_similarity(opt.similarity);
  if (opt.kind == "lexical") {
    return std::make_unique<pcas::LexicalScorer>(corpus, opt.bm25);
  }
  if (opt.kind == "hash") {
    return std::make_unique<pcas::DenseScorer>(
        pcas::DenseScorer::hashed(corpus, opt.hash_dim, seed, sim));
  }
  if (opt.embeddings.empty()) {
    pcas::fail(pcas::errc::bad_argument,
               "--scorer embedding requires --embeddings");
  }
  pcas::EmbeddingTable table = pcas::load_embeddings(opt.embeddings, sim);
  return std::make_unique<pcas::DenseScorer>(pcas::DenseScorer::from_table(
      corpus, std::move(table), opt.hash_fallback, opt.hash_dim, seed));
}

pcas::Composition parse_composition(const std::string& name) {
  if (name == "text") return pcas::Composition::text;
  if (name == "vector-mean") return pcas::Composition::vector_mean;
  pcas::fail(pcas::errc::bad_argument, "unknown composition '" + name + "'");
}

std::vector<pcas::Example> load_examples_checked(const std::string& path) {
  std::vector<pcas::Example> examples = pcas::load_examples(path);
  if (examples.empty()) {
    pcas::fail(pcas::errc::bad_argument,
               "examples file '" + path + "' has no examples");
  }
  return examples;
}

// ---------------------------------------------------------------------------
// index

struct IndexOptions {
  std::string corpus;
  std::string out = default_out_dir();
  ScorerOptions scorer;
};

int cmd_index(const IndexOptions& opt) {
  check_bm25(opt.scorer.bm25);
  const pcas::Corpus corpus = pcas::load_corpus(opt.corpus);
  const pcas::LexicalIndex index(corpus, opt.scorer.bm25);
  const std::string path = join_path(subdir(opt.out, "indexes"), "lexical.json");
  index.save(path);
  std::printf("wrote %s (%zu documents)\n", path.c_str(), index.size());
  return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string corpus;
  std::string examples;
  std::vector<std::string> methods{"pcas"};
  double lambda = 0.6;
  std::size_t beam = 5;
  std::size_t k = 5;
  bool normalize = false;
  std::string composition = "text";
  std::string separator = " ";
  std::size_t b2_depth = 1;
  std::uint64_t seed = 0;
  std::string out = default_out_dir();
  ScorerOptions scorer;
};

pcas::MethodConfig make_config(const RunOptions& opt, pcas::Method method) {
  pcas::MethodConfig cfg;
  cfg.method = method;
  cfg.k_out = opt.k;
  cfg.beam = opt.beam;
  cfg.lambda = opt.lambda;
  cfg.normalize_combination = opt.normalize;
  cfg.composition = parse_composition(opt.composition);
  cfg.separator = opt.separator;
  cfg.b2_context_source_depth = opt.b2_depth;
  return cfg;
}

int cmd_run(const RunOptions& opt) {
  const pcas::Corpus corpus = pcas::load_corpus(opt.corpus);
  const std::vector<pcas::Example> examples = load_examples_checked(opt.examples);
  const std::unique_ptr<pcas::Scorer> scorer =
      make_scorer(opt.scorer, corpus, opt.seed);

  const std::string runs_dir = subdir(opt.out, "runs");
  const std::string qrels_dir = subdir(opt.out, "qrels");
  pcas::write_qrels(pcas::doc_qrels(examples),
                    join_path(qrels_dir, "docs.qrels"));
  pcas::write_qrels(pcas::context_qrels(examples),
                    join_path(qrels_dir, "contexts.qrels"));

  for (const std::string& name : opt.methods) {
    const pcas::MethodConfig cfg = make_config(opt, pcas::parse_method(name));
    const std::string tag = method_tag(cfg);
    pcas::Run doc_run;
    pcas::Run ctx_run;
    for (const pcas::Example& ex : examples) {
      if (!pcas::method_applicable(ex, cfg.method)) {
        std::fprintf(stderr,
                     "warning: skipping example '%s' for %s: preconditions "
                     "not met\n",
                     ex.example_id.c_str(), tag.c_str());
        continue;
      }
      pcas::MethodResult result = pcas::run_method(ex, *scorer, cfg);
      doc_run[ex.example_id] = std::move(result.ranked_docs);
      if (result.predicted_context) {
        pcas::RankedList prediction;
        prediction.items.push_back({result.predicted_context->ctx_id,
                                    result.predicted_context->score});
        ctx_run[ex.example_id] = std::move(prediction);
      }
    }
    const std::string stem =
        tag + "-" + opt.scorer.kind + "-seed" + std::to_string(opt.seed);
    const std::string doc_path = join_path(runs_dir, "docs-" + stem + ".trec");
    pcas::write_trec_run(doc_run, tag, doc_path);
    std::printf("wrote %s (%zu queries)\n", doc_path.c_str(), doc_run.size());
    if (pcas::method_predicts_context(cfg.method)) {
      const std::string ctx_path = join_path(runs_dir, "ctx-" + stem + ".trec");
      pcas::write_trec_run(ctx_run, tag, ctx_path);
      std::printf("wrote %s (%zu queries)\n", ctx_path.c_str(),
                  ctx_run.size());
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::vector<std::string> runs;
  std::vector<std::string> ctx_runs;
  std::string qrels;
  std::string ctx_qrels;
  std::string metrics = "recall@1,recall@5,map@5";
  std::string name = "report";
  std::string out = default_out_dir();
};

std::string short_metric_name(const pcas::MetricSpec& spec) {
  return std::string(spec.kind == pcas::MetricSpec::Kind::recall ? "R@"
                                                                 : "M@") +
         std::to_string(spec.k);
}

struct ReportRow {
  std::string tag;
  std::map<std::string, double> doc_values;  // metric name -> value
  std::size_t doc_queries = 0;
  std::optional<double> ctx_recall1;
  std::size_t ctx_queries = 0;
};

int cmd_eval(const EvalOptions& opt) {
  const std::string qrels_path =
      opt.qrels.empty() ? join_path(join_path(opt.out, "qrels"), "docs.qrels")
                        : opt.qrels;
  const pcas::Qrels doc_qrels = pcas::parse_qrels(qrels_path);
  const std::vector<pcas::MetricSpec> specs =
      pcas::parse_metric_list(opt.metrics);

  std::vector<ReportRow> rows;
  auto row_for = [&rows](const std::string& tag) -> ReportRow& {
    for (ReportRow& row : rows) {
      if (row.tag == tag) return row;
    }
    rows.push_back(ReportRow{tag, {}, 0, std::nullopt, 0});
    return rows.back();
  };

  for (const std::string& path : opt.runs) {
    std::string tag;
    const pcas::Run run = pcas::parse_trec_run(path, &tag);
    if (tag.empty()) tag = fs::path(path).stem().string();
    const pcas::MetricsReport report =
        pcas::evaluate_run(run, doc_qrels, specs);
    ReportRow& row = row_for(tag);
    row.doc_values = report.aggregate;
    row.doc_queries = report.query_count;
  }

  if (!opt.ctx_runs.empty()) {
    const std::string ctx_qrels_path =
        opt.ctx_qrels.empty()
            ? join_path(join_path(opt.out, "qrels"), "contexts.qrels")
            : opt.ctx_qrels;
    const pcas::Qrels ctx_qrels = pcas::parse_qrels(ctx_qrels_path);
    for (const std::string& path : opt.ctx_runs) {
      std::string tag;
      const pcas::Run run = pcas::parse_trec_run(path, &tag);
      if (tag.empty()) tag = fs::path(path).stem().string();
      const pcas::MetricsReport report = pcas::recall_at_k(run, ctx_qrels, 1);
      ReportRow& row = row_for(tag);
      row.ctx_recall1 = report.aggregate.at("recall@1");
      row.ctx_queries = report.query_count;
    }
  }

  if (rows.empty()) {
    pcas::fail(pcas::errc::bad_argument, "no run files to evaluate");
  }

  // fixed-width table: one row per method tag, one column per metric,
  // plus the context prediction column
  std::size_t tag_width = 6;
  for (const ReportRow& row : rows) {
    tag_width = std::max(tag_width, row.tag.size());
  }
  std::string table = "method";
  table.append(tag_width - 6, ' ');
  for (const pcas::MetricSpec& spec : specs) {
    std::string head = short_metric_name(spec);
    table += "  ";
    table.append(head.size() < 8 ? 8 - head.size() : 0, ' ');
    table += head;
  }
  table += "  ";
  table.append(1, ' ');
  table += "ctx R@1";
  table += '\n';
  for (const ReportRow& row : rows) {
    table += row.tag;
    table.append(tag_width - row.tag.size(), ' ');
    for (const pcas::MetricSpec& spec : specs) {
      const auto it = row.doc_values.find(pcas::metric_name(spec));
      const std::string cell =
          it == row.doc_values.end() ? "n/a" : format_fixed(it->second, 4);
      table += "  ";
      table.append(cell.size() < 8 ? 8 - cell.size() : 0, ' ');
      table += cell;
    }
    const std::string ctx_cell =
        row.ctx_recall1 ? format_fixed(*row.ctx_recall1, 4) : "n/a";
    table += "  ";
    table.append(ctx_cell.size() < 8 ? 8 - ctx_cell.size() : 0, ' ');
    table += ctx_cell;
    table += '\n';
  }

  const std::string reports_dir = subdir(opt.out, "reports");
  const std::string table_path = join_path(reports_dir, opt.name + ".txt");
  {
    std::ofstream file(table_path, std::ios::binary);
    if (!file) {
      pcas::fail(pcas::errc::io_failure, "cannot write '" + table_path + "'");
    }
    file << table;
  }

  const std::string jsonl_path = join_path(reports_dir, opt.name + ".jsonl");
  {
    std::ofstream file(jsonl_path, std::ios::binary);
    if (!file) {
      pcas::fail(pcas::errc::io_failure, "cannot write '" + jsonl_path + "'");
    }
    for (const ReportRow& row : rows) {
      for (const pcas::MetricSpec& spec : specs) {
        const auto it = row.doc_values.find(pcas::metric_name(spec));
        if (it == row.doc_values.end()) continue;
        json record;
        record["kind"] = "docs";
        record["method"] = row.tag;
        record["metric"] = it->first;
        record["queries"] = row.doc_queries;
        record["value"] = it->second;
        file << record.dump() << '\n';
      }
      if (row.ctx_recall1) {
        json record;
        record["kind"] = "contexts";
        record["method"] = row.tag;
        record["metric"] = "recall@1";
        record["queries"] = row.ctx_queries;
        record["value"] = *row.ctx_recall1;
        file << record.dump() << '\n';
      }
    }
  }

  std::fputs(table.c_str(), stdout);
  std::printf("wrote %s\nwrote %s\n", table_path.c_str(), jsonl_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string corpus;
  std::string examples;
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::size_t> beams{1, 3, 5, 10};
  std::string metric = "recall@1";
  std::size_t k = 5;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::string name = "sweep";
  std::string out = default_out_dir();
  ScorerOptions scorer;
};

int cmd_sweep(const SweepOptions& opt) {
  const pcas::Corpus corpus = pcas::load_corpus(opt.corpus);
  const std::vector<pcas::Example> examples = load_examples_checked(opt.examples);
  const std::unique_ptr<pcas::Scorer> scorer =
      make_scorer(opt.scorer, corpus, opt.seed);
  const pcas::MetricSpec metric = pcas::parse_metric(opt.metric);

  pcas::MethodConfig base;
  base.method = pcas::Method::PCAS;
  base.k_out = opt.k;
  base.normalize_combination = opt.normalize;

  const std::vector<pcas::SweepRow> rows =
      pcas::sweep(examples, *scorer, base, opt.lambdas, opt.beams, metric);

  const std::string path =
      join_path(subdir(opt.out, "reports"), opt.name + ".tsv");
  std::ofstream file(path, std::ios::binary);
  if (!file) pcas::fail(pcas::errc::io_failure, "cannot write '" + path + "'");
  file << "lambda\tbeam\t" << pcas::metric_name(metric) << '\n';
  for (const pcas::SweepRow& row : rows) {
    file << format_fixed(row.lambda, 4) << '\t' << row.beam << '\t'
         << format_fixed(row.value, 6) << '\n';
  }
  file.close();
  if (!file) pcas::fail(pcas::errc::io_failure, "write failed for '" + path + "'");

  std::printf("best: lambda=%s beam=%zu %s=%s\n",
              format_fixed(rows.front().lambda, 4).c_str(), rows.front().beam,
              pcas::metric_name(metric).c_str(),
              format_fixed(rows.front().value, 6).c_str());
  std::printf("wrote %s (%zu rows)\n", path.c_str(), rows.size());
  return 0;
}

// ---------------------------------------------------------------------------
// build-dataset

struct BuildOptions {
  std::string examples;
  std::string judge = "heuristic";
  std::size_t target = 10;
  std::size_t min_size = 6;
  std::size_t attempts = 10;
  std::string check = "all";
  std::uint64_t seed = 0;
  std::string name = "dataset";
  std::string out = default_out_dir();
};

int cmd_build_dataset(const BuildOptions& opt) {
  const std::vector<pcas::Example> source = load_examples_checked(opt.examples);
  const std::unique_ptr<pcas::ContradictionJudge> judge =
      pcas::make_judge(opt.judge);

  pcas::BuildConfig cfg;
  cfg.target_size = opt.target;
  cfg.min_size = opt.min_size;
  cfg.max_attempts_per_slot = opt.attempts;
  cfg.seed = opt.seed;
  cfg.check_against = opt.check == "gold" ? pcas::CheckAgainst::gold_only
                                          : pcas::CheckAgainst::all_accepted;

  const auto [built, report] = pcas::build_dataset(source, *judge, cfg);

  const std::string datasets_dir = subdir(opt.out, "datasets");
  const std::string data_path = join_path(datasets_dir, opt.name + ".jsonl");
  pcas::save_examples(built, data_path);

  json summary;
  summary["examples"] = report.examples;
  summary["mean_size"] = report.mean_size;
  summary["short_sets"] = report.short_sets;
  summary["saturated"] = report.saturated;
  summary["seed"] = report.seed;
  summary["judge"] = report.judge;
  const std::string report_path =
      join_path(datasets_dir, opt.name + ".report.json");
  {
    std::ofstream file(report_path, std::ios::binary);
    if (!file) {
      pcas::fail(pcas::errc::io_failure, "cannot write '" + report_path + "'");
    }
    file << summary.dump(2) << '\n';
  }

  std::printf("examples: %zu\n", report.examples);
  std::printf("mean context set size: %s\n",
              format_fixed(report.mean_size, 2).c_str());
  std::printf("short sets (size < %zu): %zu\n", cfg.min_size,
              report.short_sets);
  std::printf("saturated sets (size = %zu): %zu\n", cfg.target_size,
              report.saturated);
  std::printf("judge: %s, seed: %llu\n", report.judge.c_str(),
              static_cast<unsigned long long>(report.seed));
  std::printf("wrote %s\nwrote %s\n", data_path.c_str(), report_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// compose-queries

struct ComposeOptions {
  std::string examples;
  std::vector<std::string> methods{"or", "b1", "b3"};
  std::string separator = " ";
  std::string name = "composed";
  std::string out = default_out_dir();
};

int cmd_compose_queries(const ComposeOptions& opt) {
  const std::vector<pcas::Example> examples = load_examples_checked(opt.examples);

  std::vector<std::pair<std::string, std::string>> records;
  for (const std::string& name : opt.methods) {
    const pcas::Method method = pcas::parse_method(name);
    for (const pcas::Example& ex : examples) {
      if (!pcas::method_applicable(ex, method)) continue;
      switch (method) {
        case pcas::Method::OR: {
          const pcas::ContextItem* gold = ex.find_context(*ex.gold_ctx_id);
          records.emplace_back(
              "or:" + ex.example_id,
              pcas::compose_text(ex.question, {gold, 1}, opt.separator));
          break;
        }
        case pcas::Method::B1:
          records.emplace_back(
              "b1:" + ex.example_id,
              pcas::compose_text(ex.question, ex.contexts, opt.separator));
          break;
        case pcas::Method::B3:
          for (const pcas::ContextItem& c : ex.contexts) {
            records.emplace_back(
                "b3:" + ex.example_id + ":" + c.ctx_id,
                pcas::compose_text(ex.question, {&c, 1}, opt.separator));
          }
          break;
        case pcas::Method::B2:
        case pcas::Method::PCAS:
          // these methods issue only bare questions and per-item lookups
          break;
      }
    }
  }

  const std::string path =
      join_path(subdir(opt.out, "datasets"), opt.name + ".jsonl");
  std::ofstream file(path, std::ios::binary);
  if (!file) pcas::fail(pcas::errc::io_failure, "cannot write '" + path + "'");
  for (const auto& [id, text] : records) {
    json record;
    record["composed_id"] = id;
    record["text"] = text;
    file << record.dump() << '\n';
  }
  file.close();
  if (!file) pcas::fail(pcas::errc::io_failure, "write failed for '" + path + "'");

  std::printf("wrote %s (%zu composed queries)\n", path.c_str(),
              records.size());
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOptions {
  std::string corpus;
  std::string examples;
};

int cmd_validate(const ValidateOptions& opt) {
  const pcas::Corpus corpus = pcas::load_corpus(opt.corpus);
  const std::vector<pcas::Example> examples = pcas::load_examples(opt.examples);
  const pcas::ValidationReport report = pcas::validate(corpus, examples);
  if (report.empty()) {
    std::printf("ok: %zu documents, %zu examples\n", corpus.size(),
                examples.size());
    return 0;
  }
  for (const pcas::Finding& finding : report.findings) {
    std::printf("%s: example '%s': %s\n",
                pcas::finding_kind_name(finding.kind),
                finding.example_id.c_str(), finding.detail.c_str());
  }
  std::printf("%zu findings\n", report.findings.size());
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-aware passage retrieval experiments"};
  app.require_subcommand(1);
  app.set_config("--config");

  IndexOptions index_opt;
  CLI::App* index = app.add_subcommand("index", "Build and save a BM25 index");
  index->add_option("--corpus", index_opt.corpus, "Corpus jsonl")->required();
  index->add_option("--out", index_opt.out, "Output directory")
      ->capture_default_str();
  index->add_option("--k1", index_opt.scorer.bm25.k1, "BM25 k1")
      ->capture_default_str();
  index->add_option("--b", index_opt.scorer.bm25.b, "BM25 b")
      ->capture_default_str();

  RunOptions run_opt;
  CLI::App* run =
      app.add_subcommand("run", "Run retrieval methods, write TREC run files");
  run->add_option("--corpus", run_opt.corpus, "Corpus jsonl")->required();
  run->add_option("--examples", run_opt.examples, "Examples jsonl")->required();
  run->add_option("--method", run_opt.methods,
                  "Methods to run (or, b1, b2, b3, pcas); repeatable")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--lambda", run_opt.lambda, "PCAS combination weight")
      ->capture_default_str();
  run->add_option("--beam", run_opt.beam, "PCAS document beam")
      ->capture_default_str();
  run->add_option("--k", run_opt.k, "Ranking depth")->capture_default_str();
  run->add_flag("--normalize-combination", run_opt.normalize,
                "Min-max normalize both score columns inside the beam");
  run->add_option("--composition", run_opt.composition,
                  "How question and contexts combine into a query")
      ->check(CLI::IsMember({"text", "vector-mean"}))
      ->capture_default_str();
  run->add_option("--separator", run_opt.separator,
                  "Separator for text composition")
      ->capture_default_str();
  run->add_option("--b2-depth", run_opt.b2_depth,
                  "How many top docs feed B2's context prediction")
      ->capture_default_str();
  run->add_option("--seed", run_opt.seed, "Seed for hashed embeddings")
      ->capture_default_str();
  run->add_option("--out", run_opt.out, "Output directory")
      ->capture_default_str();
  add_scorer_flags(run, run_opt.scorer);

  EvalOptions eval_opt;
  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate run files and write a report");
  eval->add_option("--run", eval_opt.runs, "Document run file; repeatable")
      ->required();
  eval->add_option("--ctx-run", eval_opt.ctx_runs,
                   "Context run file; repeatable");
  eval->add_option("--qrels", eval_opt.qrels,
                   "Document qrels (default: <out>/qrels/docs.qrels)");
  eval->add_option("--ctx-qrels", eval_opt.ctx_qrels,
                   "Context qrels (default: <out>/qrels/contexts.qrels)");
  eval->add_option("--metrics", eval_opt.metrics, "Comma-separated metrics")
      ->capture_default_str();
  eval->add_option("--name", eval_opt.name, "Report name")
      ->capture_default_str();
  eval->add_option("--out", eval_opt.out, "Output directory")
      ->capture_default_str();

  SweepOptions sweep_opt;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Grid-search PCAS lambda and beam");
  sweep_cmd->add_option("--corpus", sweep_opt.corpus, "Corpus jsonl")
      ->required();
  sweep_cmd->add_option("--examples", sweep_opt.examples, "Examples jsonl")
      ->required();
  sweep_cmd->add_option("--lambdas", sweep_opt.lambdas, "Lambda grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--beams", sweep_opt.beams, "Beam grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--metric", sweep_opt.metric, "Selection metric")
      ->capture_default_str();
  sweep_cmd->add_option("--k", sweep_opt.k, "Base ranking depth")
      ->capture_default_str();
  sweep_cmd->add_flag("--normalize-combination", sweep_opt.normalize,
                      "Min-max normalize both score columns inside the beam");
  sweep_cmd->add_option("--seed", sweep_opt.seed, "Seed for hashed embeddings")
      ->capture_default_str();
  sweep_cmd->add_option("--name", sweep_opt.name, "Sweep table name")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_opt.out, "Output directory")
      ->capture_default_str();
  add_scorer_flags(sweep_cmd, sweep_opt.scorer);

  BuildOptions build_opt;
  CLI::App* build = app.add_subcommand(
      "build-dataset", "Expand single-gold examples into context sets");
  build->add_option("--examples", build_opt.examples, "Source examples jsonl")
      ->required();
  build->add_option("--judge", build_opt.judge, "Contradiction judge")
      ->check(CLI::IsMember({"permissive", "heuristic"}))
      ->capture_default_str();
  build->add_option("--target", build_opt.target, "Context set size target")
      ->capture_default_str();
  build->add_option("--min", build_opt.min_size,
                    "Sets below this size are flagged short")
      ->capture_default_str();
  build->add_option("--attempts", build_opt.attempts,
                    "Sampling attempts per context slot")
      ->capture_default_str();
  build->add_option("--check", build_opt.check,
                    "Judge candidates against all accepted or gold only")
      ->check(CLI::IsMember({"all", "gold"}))
      ->capture_default_str();
  build->add_option("--seed", build_opt.seed, "Sampling seed")
      ->capture_default_str();
  build->add_option("--name", build_opt.name, "Dataset name")
      ->capture_default_str();
  build->add_option("--out", build_opt.out, "Output directory")
      ->capture_default_str();

  ComposeOptions compose_opt;
  CLI::App* compose = app.add_subcommand(
      "compose-queries", "Export composed query texts for external embedding");
  compose->add_option("--examples", compose_opt.examples, "Examples jsonl")
      ->required();
  compose->add_option("--method", compose_opt.methods,
                      "Methods whose compositions to export; repeatable")
      ->delimiter(',')
      ->capture_default_str();
  compose->add_option("--separator", compose_opt.separator,
                      "Separator for text composition")
      ->capture_default_str();
  compose->add_option("--name", compose_opt.name, "Manifest name")
      ->capture_default_str();
  compose->add_option("--out", compose_opt.out, "Output directory")
      ->capture_default_str();

  ValidateOptions validate_opt;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Check corpus and examples for consistency");
  validate_cmd->add_option("--corpus", validate_opt.corpus, "Corpus jsonl")
      ->required();
  validate_cmd->add_option("--examples", validate_opt.examples,
                           "Examples jsonl")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (index->parsed()) return cmd_index(index_opt);
    if (run->parsed()) return cmd_run(run_opt);
    if (eval->parsed()) return cmd_eval(eval_opt);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt);
    if (build->parsed()) return cmd_build_dataset(build_opt);
    if (compose->parsed()) return cmd_compose_queries(compose_opt);
    if (validate_cmd->parsed()) return cmd_validate(validate_opt);
  } catch (const pcas::error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", pcas::errc_name(e.code()),
                 e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
