#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pcas {

// Machine-parseable error codes. The CLI prints failures as
// "error[<code>]: <message>" on a single line.
enum class errc {
  bad_argument,
  io_failure,
  parse_failure,
  duplicate_id,
  empty_text,
  missing_id,
  missing_reference,
  dimension_mismatch,
  non_finite,
  zero_vector,
  empty_corpus,
  empty_candidates,
  unknown_metric,
  unknown_judge,
  missing_embedding,
  internal,
};

inline const char* errc_name(errc code) {
  switch (code) {
    case errc::bad_argument: return "bad-argument";
    case errc::io_failure: return "io-failure";
    case errc::parse_failure: return "parse-failure";
    case errc::duplicate_id: return "duplicate-id";
    case errc::empty_text: return "empty-text";
    case errc::missing_id: return "missing-id";
    case errc::missing_reference: return "missing-reference";
    case errc::dimension_mismatch: return "dimension-mismatch";
    case errc::non_finite: return "non-finite";
    case errc::zero_vector: return "zero-vector";
    case errc::empty_corpus: return "empty-corpus";
    case errc::empty_candidates: return "empty-candidates";
    case errc::unknown_metric: return "unknown-metric";
    case errc::unknown_judge: return "unknown-judge";
    case errc::missing_embedding: return "missing-embedding";
    case errc::internal: return "internal";
  }
  return "internal";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace pcas
