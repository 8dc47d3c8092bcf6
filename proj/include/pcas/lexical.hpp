#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcas/corpus.hpp"
#include "pcas/error.hpp"
#include "pcas/ranked_list.hpp"
#include "pcas/text.hpp"

namespace pcas {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

/// BM25 index over a fixed set of (id, text) items.
///
/// The idf uses ln(1 + (N - df + 0.5) / (df + 0.5)), which stays positive
/// even when a term appears in most documents. Query terms contribute once
/// per occurrence, so repeated tokens in the query scale their term's
/// weight.
class LexicalIndex {
 public:
  LexicalIndex() = default;

  LexicalIndex(std::span<const std::pair<std::string, std::string>> items,
               Bm25Params params = {})
      : params_(params) {
    for (const auto& [id, text] : items) add_item(id, text);
    finalize();
  }

  explicit LexicalIndex(const Corpus& corpus, Bm25Params params = {})
      : params_(params) {
    for (const Document& doc : corpus) add_item(doc.doc_id, doc.text);
    finalize();
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Bm25Params& params() const { return params_; }
  double avg_length() const { return avg_len_; }

  bool contains(const std::string& id) const {
    return position_.count(id) > 0;
  }

  double idf(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    const double df =
        it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(ids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  }

  /// BM25 score of one item for the query. The summation order is fixed
  /// (query tokens outermost) so that score() and rank() produce bitwise
  /// identical values for the same pair.
  double score(std::string_view query, const std::string& id) const {
    auto pos = position_.find(id);
    if (pos == position_.end()) {
      fail(errc::missing_id, "unknown item '" + id + "' in lexical index");
    }
    double total = 0.0;
    for (const std::string& token : tokenize(query)) {
      auto postings = postings_.find(token);
      if (postings == postings_.end()) continue;
      auto tf_it = postings->second.find(pos->second);
      if (tf_it == postings->second.end()) continue;
      total += term_weight(idf(token), tf_it->second, lengths_[pos->second]);
    }
    return total;
  }

  /// Scores every item and returns the k best, ties broken by ascending id.
  RankedList rank(std::string_view query, std::size_t k) const {
    if (k == 0) fail(errc::bad_argument, "rank requires k > 0");
    if (ids_.empty()) fail(errc::empty_candidates, "lexical index is empty");
    std::vector<double> scores(ids_.size(), 0.0);
    for (const std::string& token : tokenize(query)) {
      auto postings = postings_.find(token);
      if (postings == postings_.end()) continue;
      const double token_idf = idf(token);
      for (const auto& [item, tf] : postings->second) {
        scores[item] += term_weight(token_idf, tf, lengths_[item]);
      }
    }
    RankedList out;
    out.items.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      out.items.push_back({ids_[i], scores[i]});
    }
    sort_ranked(out);
    if (out.items.size() > k) out.items.resize(k);
    return out;
  }

  void save(const std::string& path) const {
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, plist] : postings_) {
      nlohmann::json entries = nlohmann::json::array();
      std::vector<std::pair<std::size_t, std::size_t>> sorted(plist.begin(),
                                                              plist.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [item, tf] : sorted) entries.push_back({item, tf});
      postings[term] = std::move(entries);
    }
    nlohmann::json blob{{"format", kFormat},
                        {"k1", params_.k1},
                        {"b", params_.b},
                        {"ids", ids_},
                        {"lengths", lengths_},
                        {"postings", std::move(postings)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
    out << blob.dump() << '\n';
  }

  static LexicalIndex load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
    nlohmann::json blob = nlohmann::json::parse(in, nullptr, false);
    if (blob.is_discarded() || !blob.is_object() ||
        blob.value("format", "") != kFormat) {
      fail(errc::parse_failure, path + ": not a lexical index file");
    }
    LexicalIndex index;
    index.params_.k1 = blob.at("k1").get<double>();
    index.params_.b = blob.at("b").get<double>();
    index.ids_ = blob.at("ids").get<std::vector<std::string>>();
    index.lengths_ = blob.at("lengths").get<std::vector<double>>();
    if (index.ids_.size() != index.lengths_.size()) {
      fail(errc::parse_failure, path + ": ids/lengths size mismatch");
    }
    for (std::size_t i = 0; i < index.ids_.size(); ++i) {
      if (!index.position_.emplace(index.ids_[i], i).second) {
        fail(errc::duplicate_id,
             path + ": duplicate id '" + index.ids_[i] + "'");
      }
    }
    for (const auto& [term, entries] : blob.at("postings").items()) {
      auto& plist = index.postings_[term];
      for (const nlohmann::json& entry : entries) {
        const auto item = entry.at(0).get<std::size_t>();
        if (item >= index.ids_.size()) {
          fail(errc::parse_failure, path + ": posting references item " +
                                        std::to_string(item) +
                                        " out of range");
        }
        plist[item] = entry.at(1).get<std::size_t>();
      }
    }
    index.recompute_avg_length();
    return index;
  }

  friend bool operator==(const LexicalIndex& a, const LexicalIndex& b) {
    return a.params_ == b.params_ && a.ids_ == b.ids_ &&
           a.lengths_ == b.lengths_ && a.postings_ == b.postings_;
  }

 private:
  static constexpr const char* kFormat = "pcas-lexical-index-v1";

  void add_item(const std::string& id, std::string_view text) {
    if (!position_.emplace(id, ids_.size()).second) {
      fail(errc::duplicate_id, "duplicate id '" + id + "' in lexical index");
    }
    const std::vector<std::string> tokens = tokenize(text);
    for (const std::string& token : tokens) {
      auto& plist = postings_[token];
      ++plist[ids_.size()];
    }
    ids_.push_back(id);
    lengths_.push_back(static_cast<double>(tokens.size()));
  }

  void finalize() {
    if (ids_.empty()) fail(errc::empty_corpus, "lexical index needs items");
    recompute_avg_length();
  }

  void recompute_avg_length() {
    double total = 0.0;
    for (double len : lengths_) total += len;
    avg_len_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
  }

  double term_weight(double token_idf, std::size_t tf, double doc_len) const {
    const double tfd = static_cast<double>(tf);
    const double norm =
        params_.k1 * (1.0 - params_.b + params_.b * doc_len / avg_len_);
    return token_idf * tfd * (params_.k1 + 1.0) / (tfd + norm);
  }

  Bm25Params params_;
  std::vector<std::string> ids_;
  std::vector<double> lengths_;
  std::unordered_map<std::string, std::unordered_map<std::size_t, std::size_t>>
      postings_;
  std::unordered_map<std::string, std::size_t> position_;
  double avg_len_ = 0.0;
};

}  // namespace pcas
