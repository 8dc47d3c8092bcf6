#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcas/error.hpp"
#include "pcas/jsonl.hpp"
#include "pcas/text.hpp"

namespace pcas {

struct Document {
  std::string doc_id;
  std::string text;
  std::optional<std::string> source;

  friend bool operator==(const Document&, const Document&) = default;
};

struct ContextItem {
  std::string ctx_id;
  std::string text;

  friend bool operator==(const ContextItem&, const ContextItem&) = default;
};

/// One evaluation unit: a question, the user's candidate context set, and
/// the annotated gold document (plus gold context when known).
struct Example {
  std::string example_id;
  std::string question;
  std::vector<ContextItem> contexts;
  std::string gold_doc_id;
  std::optional<std::string> gold_ctx_id;

  const ContextItem* find_context(const std::string& ctx_id) const {
    for (const ContextItem& c : contexts) {
      if (c.ctx_id == ctx_id) return &c;
    }
    return nullptr;
  }

  friend bool operator==(const Example&, const Example&) = default;
};

/// Immutable document collection. Iteration follows insertion order, which
/// for a loaded corpus is the file order.
class Corpus {
 public:
  void add(Document doc) {
    if (doc.doc_id.empty()) fail(errc::bad_argument, "empty doc_id");
    if (trim(doc.text).empty()) {
      fail(errc::empty_text, "document '" + doc.doc_id + "' has empty text");
    }
    auto [it, inserted] = index_.emplace(doc.doc_id, docs_.size());
    if (!inserted) {
      fail(errc::duplicate_id, "duplicate doc_id '" + doc.doc_id + "'");
    }
    ids_.push_back(doc.doc_id);
    docs_.push_back(std::move(doc));
  }

  bool contains(const std::string& doc_id) const {
    return index_.count(doc_id) > 0;
  }

  const Document& at(const std::string& doc_id) const {
    auto it = index_.find(doc_id);
    if (it == index_.end()) {
      fail(errc::missing_id, "unknown doc_id '" + doc_id + "'");
    }
    return docs_[it->second];
  }

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const std::vector<Document>& documents() const { return docs_; }
  const std::vector<std::string>& ids() const { return ids_; }

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.docs_ == b.docs_;
  }

 private:
  std::vector<Document> docs_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Loads a corpus from a JSONL file of {doc_id, text, source?} records.
inline Corpus load_corpus(const std::string& path) {
  Corpus corpus;
  detail::for_each_record(path, [&](const nlohmann::json& record,
                                    std::size_t line_no) {
    Document doc;
    doc.doc_id = detail::require_string(record, "doc_id", path, line_no);
    doc.text = detail::require_string(record, "text", path, line_no);
    if (auto it = record.find("source");
        it != record.end() && !it->is_null()) {
      if (!it->is_string()) {
        fail(errc::parse_failure, path + ":" + std::to_string(line_no) +
                                      ": field 'source' must be a string");
      }
      doc.source = it->get<std::string>();
    }
    if (trim(doc.text).empty()) {
      fail(errc::empty_text, path + ":" + std::to_string(line_no) +
                                 ": document '" + doc.doc_id +
                                 "' has empty text");
    }
    if (corpus.contains(doc.doc_id)) {
      fail(errc::duplicate_id, path + ":" + std::to_string(line_no) +
                                   ": duplicate doc_id '" + doc.doc_id + "'");
    }
    corpus.add(std::move(doc));
  });
  return corpus;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  for (const Document& doc : corpus) {
    nlohmann::json record{{"doc_id", doc.doc_id}, {"text", doc.text}};
    if (doc.source) record["source"] = *doc.source;
    out << record.dump() << '\n';
  }
}

/// Loads examples from a JSONL file of
/// {example_id, question, contexts: [{ctx_id, text}], gold_doc_id,
///  gold_ctx_id?} records. Duplicate example ids are rejected since every
/// downstream run and qrels file keys on them.
inline std::vector<Example> load_examples(const std::string& path) {
  std::vector<Example> examples;
  std::unordered_set<std::string> seen_ids;
  detail::for_each_record(path, [&](const nlohmann::json& record,
                                    std::size_t line_no) {
    const std::string at = path + ":" + std::to_string(line_no);
    Example ex;
    ex.example_id = detail::require_string(record, "example_id", path, line_no);
    ex.question = detail::require_string(record, "question", path, line_no);
    ex.gold_doc_id =
        detail::require_string(record, "gold_doc_id", path, line_no);
    if (!seen_ids.insert(ex.example_id).second) {
      fail(errc::duplicate_id,
           at + ": duplicate example_id '" + ex.example_id + "'");
    }
    if (auto it = record.find("contexts"); it != record.end()) {
      if (!it->is_array()) {
        fail(errc::parse_failure, at + ": field 'contexts' must be an array");
      }
      std::unordered_set<std::string> ctx_ids;
      for (const nlohmann::json& centry : *it) {
        if (!centry.is_object()) {
          fail(errc::parse_failure, at + ": context entries must be objects");
        }
        ContextItem ctx;
        ctx.ctx_id = detail::require_string(centry, "ctx_id", path, line_no);
        ctx.text = detail::require_string(centry, "text", path, line_no);
        if (trim(ctx.text).empty()) {
          fail(errc::empty_text,
               at + ": context '" + ctx.ctx_id + "' has empty text");
        }
        if (!ctx_ids.insert(ctx.ctx_id).second) {
          fail(errc::duplicate_id,
               at + ": duplicate ctx_id '" + ctx.ctx_id + "'");
        }
        ex.contexts.push_back(std::move(ctx));
      }
    }
    if (auto it = record.find("gold_ctx_id");
        it != record.end() && !it->is_null()) {
      if (!it->is_string()) {
        fail(errc::parse_failure, at + ": field 'gold_ctx_id' must be a string");
      }
      ex.gold_ctx_id = it->get<std::string>();
      if (ex.find_context(*ex.gold_ctx_id) == nullptr) {
        fail(errc::missing_reference, at + ": gold_ctx_id '" +
                                          *ex.gold_ctx_id +
                                          "' names no context");
      }
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

inline void save_examples(std::span<const Example> examples,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  for (const Example& ex : examples) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const ContextItem& c : ex.contexts) {
      contexts.push_back({{"ctx_id", c.ctx_id}, {"text", c.text}});
    }
    nlohmann::json record{{"example_id", ex.example_id},
                          {"question", ex.question},
                          {"contexts", std::move(contexts)},
                          {"gold_doc_id", ex.gold_doc_id}};
    if (ex.gold_ctx_id) record["gold_ctx_id"] = *ex.gold_ctx_id;
    out << record.dump() << '\n';
  }
}

enum class FindingKind {
  missing_gold_doc,
  duplicate_context_text,
  empty_context_set,
  missing_gold_context,
};

inline const char* finding_kind_name(FindingKind kind) {
  switch (kind) {
    case FindingKind::missing_gold_doc: return "missing-gold-doc";
    case FindingKind::duplicate_context_text: return "duplicate-context-text";
    case FindingKind::empty_context_set: return "empty-context-set";
    case FindingKind::missing_gold_context: return "missing-gold-context";
  }
  return "unknown";
}

struct Finding {
  FindingKind kind;
  std::string example_id;
  std::string detail;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  std::size_t count(FindingKind kind) const {
    std::size_t n = 0;
    for (const Finding& f : findings) {
      if (f.kind == kind) ++n;
    }
    return n;
  }
};

/// Cross-checks a corpus/examples pair. An empty report means every method
/// can run on every example: gold documents resolve, context sets are
/// non-empty and duplicate-free, and each example carries its gold context.
inline ValidationReport validate(const Corpus& corpus,
                                 std::span<const Example> examples) {
  ValidationReport report;
  for (const Example& ex : examples) {
    if (!corpus.contains(ex.gold_doc_id)) {
      report.findings.push_back({FindingKind::missing_gold_doc, ex.example_id,
                                 "gold_doc_id '" + ex.gold_doc_id +
                                     "' not in corpus"});
    }
    if (ex.contexts.empty()) {
      report.findings.push_back(
          {FindingKind::empty_context_set, ex.example_id, "no contexts"});
    }
    std::unordered_map<std::string, std::string> normalized;
    for (const ContextItem& c : ex.contexts) {
      auto [it, inserted] = normalized.emplace(normalize_text(c.text), c.ctx_id);
      if (!inserted) {
        report.findings.push_back({FindingKind::duplicate_context_text,
                                   ex.example_id,
                                   "contexts '" + it->second + "' and '" +
                                       c.ctx_id + "' have identical text"});
      }
    }
    if (!ex.gold_ctx_id) {
      report.findings.push_back({FindingKind::missing_gold_context,
                                 ex.example_id,
                                 "no gold_ctx_id (OR cannot run; context "
                                 "metrics not applicable)"});
    }
  }
  return report;
}

}  // namespace pcas
