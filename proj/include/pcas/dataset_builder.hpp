#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pcas/corpus.hpp"
#include "pcas/error.hpp"
#include "pcas/random.hpp"
#include "pcas/text.hpp"

namespace pcas {

/// Decides whether a candidate statement can join an already accepted set.
/// A lone statement never contradicts, so judge(x, {}) is always
/// compatible.
class ContradictionJudge {
 public:
  virtual ~ContradictionJudge() = default;
  virtual bool contradicts(const std::string& candidate,
                           std::span<const std::string> accepted) const = 0;
  virtual std::string name() const = 0;
};

class PermissiveJudge : public ContradictionJudge {
 public:
  bool contradicts(const std::string&,
                   std::span<const std::string>) const override {
    return false;
  }
  std::string name() const override { return "permissive"; }
};

namespace detail {

/// Token sequence with "n't" spelled out and negation tokens removed.
inline std::vector<std::string> negation_stripped_tokens(
    std::string_view text) {
  std::string expanded = normalize_text(text);
  for (std::size_t pos = expanded.find("n't"); pos != std::string::npos;
       pos = expanded.find("n't", pos)) {
    expanded.replace(pos, 3, " not");
    pos += 4;
  }
  std::vector<std::string> tokens = tokenize(expanded);
  std::erase_if(tokens, [](const std::string& t) {
    return t == "not" || t == "no" || t == "never";
  });
  return tokens;
}

}  // namespace detail

/// Flags a candidate as contradicting when it duplicates an accepted
/// statement or differs from one only in negation tokens ("not", "n't",
/// "no", "never").
class HeuristicJudge : public ContradictionJudge {
 public:
  bool contradicts(const std::string& candidate,
                   std::span<const std::string> accepted) const override {
    const std::string cand_norm = normalize_text(candidate);
    const std::vector<std::string> cand_stripped =
        detail::negation_stripped_tokens(candidate);
    for (const std::string& prior : accepted) {
      if (normalize_text(prior) == cand_norm) return true;
      if (detail::negation_stripped_tokens(prior) == cand_stripped) {
        return true;
      }
    }
    return false;
  }
  std::string name() const override { return "heuristic"; }
};

inline std::unique_ptr<ContradictionJudge> make_judge(std::string_view name) {
  if (name == "permissive") return std::make_unique<PermissiveJudge>();
  if (name == "heuristic") return std::make_unique<HeuristicJudge>();
  fail(errc::unknown_judge, "unknown judge '" + std::string(name) + "'");
}

enum class CheckAgainst { all_accepted, gold_only };

struct BuildConfig {
  std::size_t target_size = 10;
  std::size_t min_size = 6;
  std::size_t max_attempts_per_slot = 10;
  std::uint64_t seed = 0;
  CheckAgainst check_against = CheckAgainst::all_accepted;
};

inline void validate_build_config(const BuildConfig& cfg) {
  if (cfg.target_size == 0) {
    fail(errc::bad_argument, "target_size must be positive");
  }
  if (cfg.min_size == 0 || cfg.min_size > cfg.target_size) {
    fail(errc::bad_argument, "min_size must lie in [1, target_size]");
  }
  if (cfg.max_attempts_per_slot == 0) {
    fail(errc::bad_argument, "max_attempts_per_slot must be positive");
  }
}

/// All context texts across the examples, deduplicated by normalized text,
/// in first-occurrence order.
inline std::vector<std::string> collect_pool(
    std::span<const Example> examples) {
  std::vector<std::string> pool;
  std::unordered_set<std::string> seen;
  for (const Example& ex : examples) {
    for (const ContextItem& c : ex.contexts) {
      if (seen.insert(normalize_text(c.text)).second) {
        pool.push_back(c.text);
      }
    }
  }
  return pool;
}

/// Grows a context set around the gold statement by sampling the pool
/// without replacement. The gold member is never duplicated, each accepted
/// member passes the judge against the configured reference set, and the
/// total number of draws is bounded by max_attempts_per_slot * target_size.
inline std::vector<std::string> build_context_set(
    const std::string& gold_context, std::span<const std::string> pool,
    const ContradictionJudge& judge, const BuildConfig& cfg,
    SplitMix64& rng) {
  validate_build_config(cfg);
  if (trim(gold_context).empty()) {
    fail(errc::empty_text, "gold context is empty");
  }
  std::vector<std::string> result{gold_context};
  std::unordered_set<std::string> taken{normalize_text(gold_context)};

  std::vector<std::size_t> remaining;
  remaining.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!taken.count(normalize_text(pool[i]))) remaining.push_back(i);
  }

  const std::size_t budget = cfg.max_attempts_per_slot * cfg.target_size;
  std::size_t attempts = 0;
  while (result.size() < cfg.target_size && !remaining.empty() &&
         attempts < budget) {
    ++attempts;
    const std::size_t pick = rng.below(remaining.size());
    const std::string& candidate = pool[remaining[pick]];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    if (taken.count(normalize_text(candidate))) continue;
    const std::span<const std::string> reference =
        cfg.check_against == CheckAgainst::gold_only
            ? std::span<const std::string>(result.data(), 1)
            : std::span<const std::string>(result);
    if (judge.contradicts(candidate, reference)) continue;
    taken.insert(normalize_text(candidate));
    result.push_back(candidate);
  }
  return result;
}

struct BuildReport {
  std::size_t examples = 0;
  double mean_size = 0.0;
  std::size_t short_sets = 0;
  std::size_t saturated = 0;
  std::uint64_t seed = 0;
  std::string judge;
};

/// Expands each single-gold-context source example into a full context
/// set. Per-example randomness derives from (cfg.seed, example index) so
/// builds are reproducible and insertion order independent of pool size.
/// The final context order is shuffled, so the gold context does not sit
/// at a fixed position; ids are positional ("c1".."cN").
inline std::pair<std::vector<Example>, BuildReport> build_dataset(
    std::span<const Example> source, const ContradictionJudge& judge,
    const BuildConfig& cfg) {
  validate_build_config(cfg);
  const std::vector<std::string> pool = collect_pool(source);
  std::vector<Example> built;
  built.reserve(source.size());
  BuildReport report;
  report.examples = source.size();
  report.seed = cfg.seed;
  report.judge = judge.name();
  std::size_t total_size = 0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Example& src = source[i];
    if (!src.gold_ctx_id) {
      fail(errc::bad_argument, "source example '" + src.example_id +
                                   "' has no gold_ctx_id");
    }
    const ContextItem* gold = src.find_context(*src.gold_ctx_id);
    if (gold == nullptr) {
      fail(errc::missing_reference, "gold_ctx_id '" + *src.gold_ctx_id +
                                        "' names no context in example '" +
                                        src.example_id + "'");
    }
    SplitMix64 rng(derive_seed(cfg.seed, i));
    std::vector<std::string> texts =
        build_context_set(gold->text, pool, judge, cfg, rng);
    shuffle(texts, rng);

    Example out;
    out.example_id = src.example_id;
    out.question = src.question;
    out.gold_doc_id = src.gold_doc_id;
    for (std::size_t j = 0; j < texts.size(); ++j) {
      const std::string ctx_id = "c" + std::to_string(j + 1);
      if (texts[j] == gold->text) out.gold_ctx_id = ctx_id;
      out.contexts.push_back({ctx_id, std::move(texts[j])});
    }
    total_size += out.contexts.size();
    if (out.contexts.size() < cfg.min_size) ++report.short_sets;
    if (out.contexts.size() == cfg.target_size) ++report.saturated;
    built.push_back(std::move(out));
  }
  report.mean_size = built.empty() ? 0.0
                                   : static_cast<double>(total_size) /
                                         static_cast<double>(built.size());
  return {std::move(built), report};
}

}  // namespace pcas
