#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pcas/error.hpp"
#include "pcas/text.hpp"

namespace pcas::detail {

inline nlohmann::json parse_json_line(const std::string& line,
                                      const std::string& path,
                                      std::size_t line_no) {
  nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    fail(errc::parse_failure, path + ":" + std::to_string(line_no) +
                                  ": malformed record");
  }
  return record;
}

inline std::string require_string(const nlohmann::json& record,
                                  const char* key, const std::string& path,
                                  std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    fail(errc::parse_failure, path + ":" + std::to_string(line_no) +
                                  ": missing or non-string field '" + key +
                                  "'");
  }
  return it->get<std::string>();
}

/// Calls fn(record, line_no) for every non-blank line of a JSONL file.
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    fn(parse_json_line(line, path, line_no), line_no);
  }
}

}  // namespace pcas::detail
