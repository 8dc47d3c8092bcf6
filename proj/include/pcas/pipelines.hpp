#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pcas/corpus.hpp"
#include "pcas/error.hpp"
#include "pcas/ranked_list.hpp"
#include "pcas/scorer.hpp"

namespace pcas {

enum class Method { OR, B1, B2, B3, PCAS };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::OR: return "or";
    case Method::B1: return "b1";
    case Method::B2: return "b2";
    case Method::B3: return "b3";
    case Method::PCAS: return "pcas";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  std::string lower;
  lower.reserve(name.size());
  for (char ch : name) lower.push_back(detail::ascii_lower(ch));
  if (lower == "or") return Method::OR;
  if (lower == "b1") return Method::B1;
  if (lower == "b2") return Method::B2;
  if (lower == "b3") return Method::B3;
  if (lower == "pcas") return Method::PCAS;
  fail(errc::bad_argument, "unknown method '" + std::string(name) + "'");
}

enum class Composition { text, vector_mean };

inline const char* composition_name(Composition c) {
  return c == Composition::text ? "text" : "vector-mean";
}

struct MethodConfig {
  Method method = Method::PCAS;
  std::size_t k_out = 5;
  std::size_t beam = 5;
  double lambda = 0.6;
  bool normalize_combination = false;
  Composition composition = Composition::text;
  std::string separator = " ";
  std::size_t b2_context_source_depth = 1;
};

struct ContextPrediction {
  std::string ctx_id;
  double score = 0.0;

  friend bool operator==(const ContextPrediction&,
                         const ContextPrediction&) = default;
};

struct MethodResult {
  std::string example_id;
  RankedList ranked_docs;
  std::optional<ContextPrediction> predicted_context;
  std::map<std::string, ContextPrediction> per_doc_best_context;
};

/// Question first, then each context text, joined by the separator.
inline std::string compose_text(std::string_view question,
                                std::span<const ContextItem> contexts,
                                std::string_view separator) {
  std::string out(question);
  for (const ContextItem& c : contexts) {
    out += separator;
    out += c.text;
  }
  return out;
}

/// Builds the query a method issues for `contexts` appended to the
/// question. Text mode composes the string; vector-mean averages the
/// question and context vectors and renormalizes.
inline Query compose_query(const Example& ex,
                           std::span<const ContextItem> contexts,
                           const std::string& composed_id,
                           const Scorer& scorer, const MethodConfig& cfg) {
  Query query;
  query.text = compose_text(ex.question, contexts, cfg.separator);
  query.id = composed_id;
  if (cfg.composition == Composition::vector_mean) {
    if (!scorer.has_vectors()) {
      fail(errc::bad_argument,
           "vector-mean composition requires an embedding scorer");
    }
    std::vector<double> mean = scorer.question_vector(ex);
    for (const ContextItem& c : contexts) {
      const std::vector<double> cv = scorer.context_vector(ex, c);
      if (cv.size() != mean.size()) {
        fail(errc::dimension_mismatch, "context vector dim mismatch");
      }
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += cv[i];
    }
    const double count = static_cast<double>(contexts.size() + 1);
    for (double& x : mean) x /= count;
    const double len = norm(mean);
    if (len < 1e-12) {
      fail(errc::zero_vector, "vector-mean composition collapsed to zero");
    }
    for (double& x : mean) x /= len;
    query.vec = std::move(mean);
  }
  return query;
}

namespace detail {

inline void require_contexts(const Example& ex, const char* method) {
  if (ex.contexts.empty()) {
    fail(errc::empty_candidates, std::string(method) + " requires contexts; example '" +
                                     ex.example_id + "' has none");
  }
}

}  // namespace detail

/// Upper bound: compose the question with the annotated gold context.
inline MethodResult run_or(const Example& ex, const Scorer& scorer,
                           const MethodConfig& cfg) {
  if (!ex.gold_ctx_id) {
    fail(errc::bad_argument,
         "OR requires gold_ctx_id; example '" + ex.example_id + "' has none");
  }
  const ContextItem* gold = ex.find_context(*ex.gold_ctx_id);
  if (gold == nullptr) {
    fail(errc::missing_reference, "gold_ctx_id '" + *ex.gold_ctx_id +
                                      "' names no context in example '" +
                                      ex.example_id + "'");
  }
  const Query query = compose_query(ex, {gold, 1}, "or:" + ex.example_id,
                                    scorer, cfg);
  MethodResult result;
  result.example_id = ex.example_id;
  result.ranked_docs = scorer.rank_docs(query, cfg.k_out);
  return result;
}

/// Compose the question with every context in example order.
inline MethodResult run_b1(const Example& ex, const Scorer& scorer,
                           const MethodConfig& cfg) {
  detail::require_contexts(ex, "B1");
  const Query query = compose_query(ex, ex.contexts, "b1:" + ex.example_id,
                                    scorer, cfg);
  MethodResult result;
  result.example_id = ex.example_id;
  result.ranked_docs = scorer.rank_docs(query, cfg.k_out);
  return result;
}

/// Question-only document ranking, then pick the context closest to the
/// top-ranked document(s).
inline MethodResult run_b2(const Example& ex, const Scorer& scorer,
                           const MethodConfig& cfg) {
  detail::require_contexts(ex, "B2");
  if (cfg.b2_context_source_depth == 0) {
    fail(errc::bad_argument, "b2_context_source_depth must be positive");
  }
  MethodResult result;
  result.example_id = ex.example_id;
  result.ranked_docs = scorer.rank_docs(bare_question(ex), cfg.k_out);
  const std::size_t depth =
      std::min(cfg.b2_context_source_depth, result.ranked_docs.size());
  RankedList best_by_context;
  for (std::size_t d = 0; d < depth; ++d) {
    const RankedList per_doc =
        scorer.rank_contexts_by_doc(result.ranked_docs[d].item_id, ex);
    if (d == 0) {
      best_by_context = per_doc;
      continue;
    }
    for (const ScoredItem& entry : per_doc.items) {
      for (ScoredItem& best : best_by_context.items) {
        if (best.item_id == entry.item_id) {
          best.score = std::max(best.score, entry.score);
          break;
        }
      }
    }
  }
  sort_ranked(best_by_context);
  result.predicted_context =
      ContextPrediction{best_by_context.front().item_id,
                        best_by_context.front().score};
  return result;
}

/// Pick the context closest to the question, then retrieve documents with
/// the question composed with that single context.
inline MethodResult run_b3(const Example& ex, const Scorer& scorer,
                           const MethodConfig& cfg) {
  detail::require_contexts(ex, "B3");
  const RankedList by_question =
      scorer.rank_contexts_by_query(bare_question(ex), ex);
  const ScoredItem& chosen = by_question.front();
  const ContextItem* ctx = ex.find_context(chosen.item_id);
  if (ctx == nullptr) {
    fail(errc::internal, "ranked context '" + chosen.item_id +
                             "' missing from example '" + ex.example_id + "'");
  }
  const Query query =
      compose_query(ex, {ctx, 1},
                    "b3:" + ex.example_id + ":" + chosen.item_id, scorer, cfg);
  MethodResult result;
  result.example_id = ex.example_id;
  result.ranked_docs = scorer.rank_docs(query, cfg.k_out);
  result.predicted_context = ContextPrediction{chosen.item_id, chosen.score};
  return result;
}

namespace detail {

/// Min-max to [0,1] within the beam; a constant column maps to all zeros.
inline void min_max_normalize(std::vector<double>& values) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;  // copy before the loop overwrites the slot
  const double span = *hi_it - lo;
  for (double& v : values) {
    v = span == 0.0 ? 0.0 : (v - lo) / span;
  }
}

}  // namespace detail

/// Joint (document, context) selection: beam of documents by question
/// score, best context per beam document, convex combination of the two
/// scores, rerank. When k_out exceeds the beam, the question-only ranking
/// fills the tail; tail scores are shifted below the combined block so the
/// output stays a valid ranked list while preserving their order.
inline MethodResult run_pcas(const Example& ex, const Scorer& scorer,
                             const MethodConfig& cfg) {
  detail::require_contexts(ex, "PCAS");
  if (cfg.beam == 0) fail(errc::bad_argument, "beam must be positive");
  if (cfg.k_out == 0) fail(errc::bad_argument, "k_out must be positive");
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
    fail(errc::bad_argument, "lambda must lie in [0, 1]");
  }

  const Query question = bare_question(ex);
  const std::size_t fetch = std::max(cfg.k_out, cfg.beam);
  const RankedList question_ranking = scorer.rank_docs(question, fetch);
  const std::size_t beam_size = std::min(cfg.beam, question_ranking.size());

  MethodResult result;
  result.example_id = ex.example_id;

  std::vector<double> dq_scores;
  std::vector<double> dc_scores;
  dq_scores.reserve(beam_size);
  dc_scores.reserve(beam_size);
  for (std::size_t i = 0; i < beam_size; ++i) {
    const std::string& doc_id = question_ranking[i].item_id;
    const RankedList contexts = scorer.rank_contexts_by_doc(doc_id, ex);
    result.per_doc_best_context[doc_id] =
        ContextPrediction{contexts.front().item_id, contexts.front().score};
    dq_scores.push_back(question_ranking[i].score);
    dc_scores.push_back(contexts.front().score);
  }
  if (cfg.normalize_combination) {
    detail::min_max_normalize(dq_scores);
    detail::min_max_normalize(dc_scores);
  }

  RankedList combined;
  combined.items.reserve(beam_size);
  for (std::size_t i = 0; i < beam_size; ++i) {
    combined.items.push_back(
        {question_ranking[i].item_id,
         cfg.lambda * dq_scores[i] + (1.0 - cfg.lambda) * dc_scores[i]});
  }
  sort_ranked(combined);
  if (combined.items.size() > cfg.k_out) combined.items.resize(cfg.k_out);

  if (cfg.k_out > beam_size && question_ranking.size() > beam_size) {
    const double floor = combined.items.back().score - 1.0;
    const double offset = floor - question_ranking[beam_size].score;
    for (std::size_t i = beam_size;
         i < std::min(cfg.k_out, question_ranking.size()); ++i) {
      combined.items.push_back({question_ranking[i].item_id,
                                question_ranking[i].score + offset});
    }
  }

  result.ranked_docs = std::move(combined);
  result.predicted_context =
      result.per_doc_best_context.at(result.ranked_docs.front().item_id);
  return result;
}

inline MethodResult run_method(const Example& ex, const Scorer& scorer,
                               const MethodConfig& cfg) {
  switch (cfg.method) {
    case Method::OR: return run_or(ex, scorer, cfg);
    case Method::B1: return run_b1(ex, scorer, cfg);
    case Method::B2: return run_b2(ex, scorer, cfg);
    case Method::B3: return run_b3(ex, scorer, cfg);
    case Method::PCAS: return run_pcas(ex, scorer, cfg);
  }
  fail(errc::internal, "unhandled method");
}

/// True when the example satisfies the method's preconditions.
inline bool method_applicable(const Example& ex, Method method) {
  if (method == Method::OR) {
    return ex.gold_ctx_id.has_value() &&
           ex.find_context(*ex.gold_ctx_id) != nullptr;
  }
  return !ex.contexts.empty();
}

/// Whether the method predicts a context alongside the document ranking.
inline bool method_predicts_context(Method method) {
  return method == Method::B2 || method == Method::B3 ||
         method == Method::PCAS;
}

}  // namespace pcas
