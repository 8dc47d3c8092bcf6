#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pcas/error.hpp"

namespace pcas {

struct ScoredItem {
  std::string item_id;
  double score = 0.0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Ordering used everywhere a ranking is produced: higher score first,
/// ties broken by ascending item id so results are reproducible.
inline bool ranked_before(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item_id < b.item_id;
}

/// Ranking with non-increasing scores, unique item ids and ascending ids
/// within equal scores.
struct RankedList {
  std::vector<ScoredItem> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  const ScoredItem& front() const { return items.front(); }
  const ScoredItem& operator[](std::size_t i) const { return items[i]; }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

inline void sort_ranked(std::vector<ScoredItem>& items) {
  std::sort(items.begin(), items.end(), ranked_before);
}

inline void sort_ranked(RankedList& list) { sort_ranked(list.items); }

/// Checks the RankedList contract; `where` names the list in error messages.
inline void validate_ranked(const RankedList& list, const std::string& where) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < list.items.size(); ++i) {
    const ScoredItem& item = list.items[i];
    if (!std::isfinite(item.score)) {
      fail(errc::non_finite, where + ": non-finite score for item '" +
                                 item.item_id + "'");
    }
    if (!seen.insert(item.item_id).second) {
      fail(errc::duplicate_id,
           where + ": duplicate item '" + item.item_id + "'");
    }
    if (i == 0) continue;
    const ScoredItem& prev = list.items[i - 1];
    if (item.score > prev.score) {
      fail(errc::bad_argument, where + ": scores increase at rank " +
                                   std::to_string(i + 1));
    }
    if (item.score == prev.score && !(prev.item_id < item.item_id)) {
      fail(errc::bad_argument, where + ": tied items out of id order at rank " +
                                   std::to_string(i + 1));
    }
  }
}

/// Selects the k best candidates under `score`, ordered by (score desc,
/// id asc). Keeps a bounded pool of size k, so candidates are scored once
/// and only k items are ever sorted.
template <typename ScoreFn>
RankedList top_k(ScoreFn&& score, std::span<const std::string> candidates,
                 std::size_t k) {
  if (k == 0) fail(errc::bad_argument, "top_k: k must be >= 1");
  if (candidates.empty()) {
    fail(errc::empty_candidates, "top_k: empty candidate set");
  }

  // Max-heap on "worst first" so the weakest survivor sits at the top.
  auto worse = [](const ScoredItem& a, const ScoredItem& b) {
    return ranked_before(a, b);
  };
  std::vector<ScoredItem> pool;
  pool.reserve(std::min(k, candidates.size()) + 1);
  for (const std::string& id : candidates) {
    ScoredItem item{id, score(id)};
    if (pool.size() < k) {
      pool.push_back(std::move(item));
      std::push_heap(pool.begin(), pool.end(), worse);
    } else if (ranked_before(item, pool.front())) {
      std::pop_heap(pool.begin(), pool.end(), worse);
      pool.back() = std::move(item);
      std::push_heap(pool.begin(), pool.end(), worse);
    }
  }
  sort_ranked(pool);
  return RankedList{std::move(pool)};
}

}  // namespace pcas
