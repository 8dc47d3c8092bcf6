#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcas/corpus.hpp"
#include "pcas/embedding.hpp"
#include "pcas/error.hpp"
#include "pcas/lexical.hpp"
#include "pcas/ranked_list.hpp"

namespace pcas {

/// A query as the pipelines hand it to a scorer. `text` is the raw or
/// composed string; `id` is the canonical lookup key for table-backed dense
/// scoring ("q:<example_id>" for bare questions, "b1:<example_id>" etc. for
/// compositions); `vec` is set only by vector-mean composition.
struct Query {
  std::string text;
  std::string id;
  std::optional<std::vector<double>> vec;
};

inline Query bare_question(const Example& ex) {
  return Query{ex.question, "q:" + ex.example_id, std::nullopt};
}

/// One relevance function used in three roles: query against documents,
/// query against an example's contexts, and context-as-query against one
/// document.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const std::vector<std::string>& doc_ids() const = 0;

  virtual double score_doc(const Query& query,
                           const std::string& doc_id) const = 0;

  /// Top-k documents for a query; ties break ascending by doc id.
  virtual RankedList rank_docs(const Query& query, std::size_t k) const {
    return top_k(
        [&](const std::string& doc_id) { return score_doc(query, doc_id); },
        std::span<const std::string>(doc_ids()), k);
  }

  /// All of an example's contexts ranked against a query (score_cq role).
  virtual RankedList rank_contexts_by_query(const Query& query,
                                            const Example& ex) const = 0;

  /// All of an example's contexts ranked against one document, with the
  /// context text on the query side (score_cd role).
  virtual RankedList rank_contexts_by_doc(const std::string& doc_id,
                                          const Example& ex) const = 0;

  /// Vector access for vector-mean query composition.
  virtual bool has_vectors() const { return false; }
  virtual std::vector<double> question_vector(const Example&) const {
    fail(errc::bad_argument, "scorer has no embedding vectors");
  }
  virtual std::vector<double> context_vector(const Example&,
                                             const ContextItem&) const {
    fail(errc::bad_argument, "scorer has no embedding vectors");
  }
};

/// BM25 over the corpus documents; context-vs-query scoring uses a
/// transient BM25 index over the example's own contexts.
class LexicalScorer : public Scorer {
 public:
  explicit LexicalScorer(const Corpus& corpus, Bm25Params params = {})
      : index_(corpus, params) {}

  const LexicalIndex& index() const { return index_; }

  const std::vector<std::string>& doc_ids() const override {
    return index_.ids();
  }

  double score_doc(const Query& query,
                   const std::string& doc_id) const override {
    return index_.score(query.text, doc_id);
  }

  RankedList rank_docs(const Query& query, std::size_t k) const override {
    return index_.rank(query.text, k);
  }

  RankedList rank_contexts_by_query(const Query& query,
                                    const Example& ex) const override {
    if (ex.contexts.empty()) {
      fail(errc::empty_candidates,
           "example '" + ex.example_id + "' has no contexts");
    }
    std::vector<std::pair<std::string, std::string>> items;
    items.reserve(ex.contexts.size());
    for (const ContextItem& c : ex.contexts) items.emplace_back(c.ctx_id, c.text);
    LexicalIndex ctx_index(items, index_.params());
    return ctx_index.rank(query.text, ex.contexts.size());
  }

  RankedList rank_contexts_by_doc(const std::string& doc_id,
                                  const Example& ex) const override {
    if (ex.contexts.empty()) {
      fail(errc::empty_candidates,
           "example '" + ex.example_id + "' has no contexts");
    }
    RankedList out;
    out.items.reserve(ex.contexts.size());
    for (const ContextItem& c : ex.contexts) {
      out.items.push_back({c.ctx_id, index_.score(c.text, doc_id)});
    }
    sort_ranked(out);
    return out;
  }

 private:
  LexicalIndex index_;
};

/// Dense scorer over precomputed or hashed vectors.
///
/// Table mode resolves ids by convention: documents by doc_id, contexts by
/// "<example_id>:<ctx_id>", bare questions by "q:<example_id>", composed
/// queries by the composed id the pipelines set on the Query. Missing
/// entries are errors naming the id, unless hash fallback is enabled.
class DenseScorer : public Scorer {
 public:
  static DenseScorer hashed(const Corpus& corpus, std::size_t dim,
                            std::uint64_t seed,
                            Similarity similarity = Similarity::cosine) {
    DenseScorer scorer(dim, seed, similarity, /*hashed=*/true,
                       /*fallback=*/true);
    scorer.doc_ids_ = corpus.ids();
    scorer.doc_vectors_.reserve(corpus.size());
    for (const Document& doc : corpus) {
      scorer.doc_vectors_.push_back(hash_embedding(doc.text, dim, seed));
    }
    scorer.index_docs();
    return scorer;
  }

  static DenseScorer from_table(const Corpus& corpus, EmbeddingTable table,
                                bool hash_fallback = false,
                                std::size_t fallback_dim = 0,
                                std::uint64_t fallback_seed = 0) {
    const std::size_t dim = table.dim();
    if (dim == 0) fail(errc::bad_argument, "embedding table is empty");
    DenseScorer scorer(dim, fallback_seed, table.similarity(),
                       /*hashed=*/false, hash_fallback);
    if (hash_fallback && fallback_dim != 0 && fallback_dim != dim) {
      fail(errc::dimension_mismatch,
           "hash fallback dim " + std::to_string(fallback_dim) +
               " differs from table dim " + std::to_string(dim));
    }
    scorer.doc_ids_ = corpus.ids();
    scorer.doc_vectors_.reserve(corpus.size());
    for (const std::string& doc_id : scorer.doc_ids_) {
      scorer.doc_vectors_.push_back(table.get(doc_id));
    }
    scorer.index_docs();
    scorer.table_ = std::move(table);
    return scorer;
  }

  const std::vector<std::string>& doc_ids() const override {
    return doc_ids_;
  }

  double score_doc(const Query& query,
                   const std::string& doc_id) const override {
    return score_pair(query_vector(query), doc_vector(doc_id));
  }

  RankedList rank_docs(const Query& query, std::size_t k) const override {
    const std::vector<double> qv = query_vector(query);
    return top_k(
        [&](const std::string& doc_id) {
          return score_pair(qv, doc_vector(doc_id));
        },
        std::span<const std::string>(doc_ids_), k);
  }

  RankedList rank_contexts_by_query(const Query& query,
                                    const Example& ex) const override {
    if (ex.contexts.empty()) {
      fail(errc::empty_candidates,
           "example '" + ex.example_id + "' has no contexts");
    }
    const std::vector<double> qv = query_vector(query);
    RankedList out;
    out.items.reserve(ex.contexts.size());
    for (const ContextItem& c : ex.contexts) {
      out.items.push_back({c.ctx_id, score_pair(qv, context_vector(ex, c))});
    }
    sort_ranked(out);
    return out;
  }

  RankedList rank_contexts_by_doc(const std::string& doc_id,
                                  const Example& ex) const override {
    if (ex.contexts.empty()) {
      fail(errc::empty_candidates,
           "example '" + ex.example_id + "' has no contexts");
    }
    const std::vector<double>& dv = doc_vector(doc_id);
    RankedList out;
    out.items.reserve(ex.contexts.size());
    for (const ContextItem& c : ex.contexts) {
      out.items.push_back({c.ctx_id, score_pair(context_vector(ex, c), dv)});
    }
    sort_ranked(out);
    return out;
  }

  bool has_vectors() const override { return true; }

  std::vector<double> question_vector(const Example& ex) const override {
    return item_vector("q:" + ex.example_id, ex.question);
  }

  std::vector<double> context_vector(const Example& ex,
                                     const ContextItem& c) const override {
    return item_vector(ex.example_id + ":" + c.ctx_id, c.text);
  }

  std::vector<double> query_vector(const Query& query) const {
    if (query.vec) {
      if (query.vec->size() != dim_) {
        fail(errc::dimension_mismatch,
             "query vector has dim " + std::to_string(query.vec->size()) +
                 ", expected " + std::to_string(dim_));
      }
      return *query.vec;
    }
    return item_vector(query.id, query.text);
  }

 private:
  DenseScorer(std::size_t dim, std::uint64_t seed, Similarity similarity,
              bool hashed, bool fallback)
      : dim_(dim),
        seed_(seed),
        similarity_(similarity),
        hashed_(hashed),
        fallback_(fallback) {
    if (dim == 0) fail(errc::bad_argument, "embedding dim must be positive");
  }

  const std::vector<double>& doc_vector(const std::string& doc_id) const {
    auto it = doc_index_.find(doc_id);
    if (it == doc_index_.end()) {
      fail(errc::missing_id, "unknown doc_id '" + doc_id + "'");
    }
    return doc_vectors_[it->second];
  }

  std::vector<double> item_vector(const std::string& id,
                                  const std::string& text) const {
    if (hashed_) return hash_embedding(text, dim_, seed_);
    if (table_.contains(id)) return table_.get(id);
    if (fallback_) return hash_embedding(text, dim_, seed_);
    fail(errc::missing_embedding, "no embedding for id '" + id + "'");
  }

  double score_pair(std::span<const double> a,
                    std::span<const double> b) const {
    return similarity_ == Similarity::dot ? dot(a, b) : cosine(a, b);
  }

  void index_docs() {
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
      doc_index_.emplace(doc_ids_[i], i);
    }
  }

  std::size_t dim_;
  std::uint64_t seed_;
  Similarity similarity_;
  bool hashed_;
  bool fallback_;
  std::vector<std::string> doc_ids_;
  std::vector<std::vector<double>> doc_vectors_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  EmbeddingTable table_;
};

}  // namespace pcas
