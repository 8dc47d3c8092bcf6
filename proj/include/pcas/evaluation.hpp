#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pcas/corpus.hpp"
#include "pcas/error.hpp"
#include "pcas/pipelines.hpp"
#include "pcas/ranked_list.hpp"
#include "pcas/scorer.hpp"

namespace pcas {

/// Binary-or-graded relevance judgments: query -> item -> grade >= 1.
using Qrels = std::map<std::string, std::map<std::string, int>>;

/// System output: query -> ranked items.
using Run = std::map<std::string, RankedList>;

struct MetricSpec {
  enum class Kind { recall, map };
  Kind kind = Kind::recall;
  std::size_t k = 5;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

inline std::string metric_name(const MetricSpec& spec) {
  return std::string(spec.kind == MetricSpec::Kind::recall ? "recall@"
                                                           : "map@") +
         std::to_string(spec.k);
}

inline MetricSpec parse_metric(std::string_view name) {
  const auto at = name.find('@');
  if (at == std::string_view::npos) {
    fail(errc::unknown_metric, "metric '" + std::string(name) +
                                   "' (expected recall@K or map@K)");
  }
  const std::string_view head = name.substr(0, at);
  const std::string_view tail = name.substr(at + 1);
  MetricSpec spec;
  if (head == "recall") {
    spec.kind = MetricSpec::Kind::recall;
  } else if (head == "map") {
    spec.kind = MetricSpec::Kind::map;
  } else {
    fail(errc::unknown_metric, "metric '" + std::string(name) + "'");
  }
  std::size_t k = 0;
  for (char ch : tail) {
    if (ch < '0' || ch > '9') {
      fail(errc::unknown_metric, "metric '" + std::string(name) + "'");
    }
    k = k * 10 + static_cast<std::size_t>(ch - '0');
  }
  if (k == 0) fail(errc::unknown_metric, "metric cutoff must be positive");
  spec.k = k;
  return spec;
}

inline std::vector<MetricSpec> parse_metric_list(std::string_view csv) {
  std::vector<MetricSpec> specs;
  std::string item;
  std::stringstream stream{std::string(csv)};
  while (std::getline(stream, item, ',')) {
    const std::string trimmed = trim(item);
    if (!trimmed.empty()) specs.push_back(parse_metric(trimmed));
  }
  if (specs.empty()) fail(errc::unknown_metric, "empty metric list");
  return specs;
}

namespace detail {

inline double recall_for_query(const RankedList& list,
                               const std::map<std::string, int>& relevant,
                               std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < list.size() && i < k; ++i) {
    if (relevant.count(list[i].item_id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

inline double ap_for_query(const RankedList& list,
                           const std::map<std::string, int>& relevant,
                           std::size_t k) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < list.size() && i < k; ++i) {
    if (relevant.count(list[i].item_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

}  // namespace detail

struct MetricsReport {
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, double> aggregate;
  std::size_t query_count = 0;
};

/// Evaluates a run against qrels. Every qrels query contributes: queries
/// missing from the run score zero, and run-only queries are ignored.
/// Aggregation is the arithmetic mean in sorted query-id order.
inline MetricsReport evaluate_run(const Run& run, const Qrels& qrels,
                                  std::span<const MetricSpec> metrics) {
  if (metrics.empty()) fail(errc::unknown_metric, "no metrics requested");
  if (qrels.empty()) fail(errc::bad_argument, "qrels has no queries");
  static const RankedList kEmpty;
  MetricsReport report;
  report.query_count = qrels.size();
  std::map<std::string, double> sums;
  for (const auto& [query_id, relevant] : qrels) {
    if (relevant.empty()) {
      fail(errc::bad_argument, "query '" + query_id + "' has no relevant items");
    }
    auto run_it = run.find(query_id);
    const RankedList& list = run_it == run.end() ? kEmpty : run_it->second;
    auto& row = report.per_query[query_id];
    for (const MetricSpec& spec : metrics) {
      const double value = spec.kind == MetricSpec::Kind::recall
                               ? detail::recall_for_query(list, relevant, spec.k)
                               : detail::ap_for_query(list, relevant, spec.k);
      row[metric_name(spec)] = value;
      sums[metric_name(spec)] += value;
    }
  }
  for (const auto& [name, sum] : sums) {
    report.aggregate[name] = sum / static_cast<double>(qrels.size());
  }
  return report;
}

inline MetricsReport recall_at_k(const Run& run, const Qrels& qrels,
                                 std::size_t k) {
  const MetricSpec spec{MetricSpec::Kind::recall, k};
  return evaluate_run(run, qrels, {&spec, 1});
}

inline MetricsReport map_at_k(const Run& run, const Qrels& qrels,
                              std::size_t k) {
  const MetricSpec spec{MetricSpec::Kind::map, k};
  return evaluate_run(run, qrels, {&spec, 1});
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (stream >> field) fields.push_back(field);
  return fields;
}

inline std::string format_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return buf;
}

}  // namespace detail

/// Writes "query_id Q0 item_id rank score tag" lines, queries in sorted id
/// order, ranks from 1, scores at 6 decimals.
inline void write_trec_run(const Run& run, const std::string& tag,
                           const std::string& path) {
  if (tag.empty()) fail(errc::bad_argument, "run tag must be non-empty");
  for (char ch : tag) {
    if (detail::is_ascii_space(ch)) {
      fail(errc::bad_argument, "run tag must not contain whitespace");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  for (const auto& [query_id, list] : run) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      out << query_id << " Q0 " << list[i].item_id << ' ' << i + 1 << ' '
          << detail::format_score(list[i].score) << ' ' << tag << '\n';
    }
  }
  if (!out) fail(errc::io_failure, "write failed for '" + path + "'");
}

/// Parses a TREC run file, checking per-query rank contiguity from 1,
/// non-increasing scores, and duplicate items. Returns the run plus the
/// tag seen on the lines.
inline Run parse_trec_run(const std::string& path, std::string* tag_out = nullptr) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  Run run;
  std::map<std::string, std::set<std::string>> seen_items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string at = path + ":" + std::to_string(line_no);
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != 6) {
      fail(errc::parse_failure, at + ": expected 6 fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[1] != "Q0") {
      fail(errc::parse_failure, at + ": second field must be 'Q0'");
    }
    std::size_t rank = 0;
    try {
      rank = std::stoul(fields[3]);
    } catch (const std::exception&) {
      fail(errc::parse_failure, at + ": bad rank '" + fields[3] + "'");
    }
    double score = 0.0;
    try {
      score = std::stod(fields[4]);
    } catch (const std::exception&) {
      fail(errc::parse_failure, at + ": bad score '" + fields[4] + "'");
    }
    if (!std::isfinite(score)) {
      fail(errc::parse_failure, at + ": non-finite score");
    }
    RankedList& list = run[fields[0]];
    if (rank != list.size() + 1) {
      fail(errc::parse_failure, at + ": rank " + std::to_string(rank) +
                                    " breaks contiguity (expected " +
                                    std::to_string(list.size() + 1) + ")");
    }
    if (!list.empty() && score > list.items.back().score) {
      fail(errc::parse_failure, at + ": score increases within query '" +
                                    fields[0] + "'");
    }
    if (!seen_items[fields[0]].insert(fields[2]).second) {
      fail(errc::parse_failure, at + ": duplicate item '" + fields[2] +
                                    "' for query '" + fields[0] + "'");
    }
    list.items.push_back({fields[2], score});
    if (tag_out != nullptr) *tag_out = fields[5];
  }
  return run;
}

/// Qrels lines: "query_id 0 item_id grade". Grade 0 lines are accepted and
/// skipped; negative grades are malformed.
inline void write_qrels(const Qrels& qrels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  for (const auto& [query_id, items] : qrels) {
    for (const auto& [item_id, grade] : items) {
      out << query_id << " 0 " << item_id << ' ' << grade << '\n';
    }
  }
  if (!out) fail(errc::io_failure, "write failed for '" + path + "'");
}

inline Qrels parse_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string at = path + ":" + std::to_string(line_no);
    const std::vector<std::string> fields = detail::split_fields(line);
    if (fields.size() != 4) {
      fail(errc::parse_failure, at + ": expected 4 fields, got " +
                                    std::to_string(fields.size()));
    }
    int grade = 0;
    try {
      grade = std::stoi(fields[3]);
    } catch (const std::exception&) {
      fail(errc::parse_failure, at + ": bad grade '" + fields[3] + "'");
    }
    if (grade < 0) {
      fail(errc::parse_failure, at + ": negative grade");
    }
    if (grade == 0) continue;
    auto& items = qrels[fields[0]];
    if (items.count(fields[2])) {
      fail(errc::parse_failure, at + ": duplicate judgment for item '" +
                                    fields[2] + "'");
    }
    items[fields[2]] = grade;
  }
  return qrels;
}

/// Document ground truth: each example's gold document at grade 1.
inline Qrels doc_qrels(std::span<const Example> examples) {
  Qrels qrels;
  for (const Example& ex : examples) {
    qrels[ex.example_id][ex.gold_doc_id] = 1;
  }
  return qrels;
}

/// Context ground truth, restricted to examples that carry a gold context.
inline Qrels context_qrels(std::span<const Example> examples) {
  Qrels qrels;
  for (const Example& ex : examples) {
    if (ex.gold_ctx_id) qrels[ex.example_id][*ex.gold_ctx_id] = 1;
  }
  return qrels;
}

struct SweepRow {
  double lambda = 0.0;
  std::size_t beam = 0;
  double value = 0.0;
};

/// Evaluates PCAS on every (lambda, beam) grid point and sorts rows by
/// metric value descending, then lambda, then beam.
inline std::vector<SweepRow> sweep(std::span<const Example> examples,
                                   const Scorer& scorer,
                                   const MethodConfig& base,
                                   std::span<const double> lambdas,
                                   std::span<const std::size_t> beams,
                                   const MetricSpec& metric) {
  if (lambdas.empty() || beams.empty()) {
    fail(errc::bad_argument, "sweep grid is empty");
  }
  if (examples.empty()) fail(errc::bad_argument, "sweep needs examples");
  const Qrels qrels = doc_qrels(examples);
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size() * beams.size());
  for (double lambda : lambdas) {
    for (std::size_t beam : beams) {
      MethodConfig cfg = base;
      cfg.method = Method::PCAS;
      cfg.lambda = lambda;
      cfg.beam = beam;
      cfg.k_out = std::max(base.k_out, metric.k);
      Run run;
      for (const Example& ex : examples) {
        run[ex.example_id] = run_pcas(ex, scorer, cfg).ranked_docs;
      }
      const MetricsReport report = evaluate_run(run, qrels, {&metric, 1});
      rows.push_back({lambda, beam, report.aggregate.at(metric_name(metric))});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.beam < b.beam;
  });
  return rows;
}

}  // namespace pcas
