#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcas/error.hpp"
#include "pcas/jsonl.hpp"
#include "pcas/random.hpp"
#include "pcas/text.hpp"

namespace pcas {

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(errc::dimension_mismatch,
         "dot: dimensions " + std::to_string(a.size()) + " vs " +
             std::to_string(b.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

inline double norm(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return std::sqrt(total);
}

/// Cosine similarity. A zero vector has no direction, so comparing against
/// one is an error rather than a silent NaN.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    fail(errc::zero_vector, "cosine of zero vector");
  }
  return dot(a, b) / (na * nb);
}

/// Deterministic bag-of-tokens embedding. Each distinct token maps to a
/// fixed pseudo-random direction derived from (seed, token hash); the text
/// embedding is the normalized sum over token occurrences. Texts with no
/// tokens, or whose token vectors cancel, fall back to a unit vector keyed
/// by the seed alone so the result is always usable with cosine.
inline std::vector<double> hash_embedding(std::string_view text,
                                          std::size_t dim,
                                          std::uint64_t seed) {
  if (dim == 0) fail(errc::bad_argument, "embedding dim must be positive");
  std::vector<double> acc(dim, 0.0);
  bool any = false;
  for (const std::string& token : tokenize(text)) {
    any = true;
    SplitMix64 rng(derive_seed(seed, fnv1a64(token)));
    for (std::size_t i = 0; i < dim; ++i) {
      acc[i] += rng.next_double() * 2.0 - 1.0;
    }
  }
  double len = any ? norm(acc) : 0.0;
  if (len < 1e-12) {
    SplitMix64 rng(derive_seed(seed, 0x66616c6c6261636bULL));
    for (std::size_t i = 0; i < dim; ++i) {
      acc[i] = rng.next_double() * 2.0 - 1.0;
    }
    len = norm(acc);
  }
  for (double& x : acc) x /= len;
  return acc;
}

enum class Similarity { dot, cosine };

inline const char* similarity_name(Similarity sim) {
  return sim == Similarity::dot ? "dot" : "cosine";
}

inline Similarity parse_similarity(std::string_view name) {
  if (name == "dot") return Similarity::dot;
  if (name == "cosine") return Similarity::cosine;
  fail(errc::bad_argument, "unknown similarity '" + std::string(name) + "'");
}

/// Id -> float32 vector store. Vectors keep their file precision; scoring
/// paths widen to double on read. The similarity setting travels with the
/// table so every consumer scores pairs the same way.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim,
                          Similarity similarity = Similarity::cosine)
      : dim_(dim), similarity_(similarity) {
    if (dim == 0) fail(errc::bad_argument, "embedding dim must be positive");
  }

  Similarity similarity() const { return similarity_; }
  void set_similarity(Similarity sim) { similarity_ = sim; }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }

  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  void add(const std::string& id, std::span<const float> vec) {
    if (id.empty()) fail(errc::bad_argument, "empty embedding id");
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) {
      fail(errc::dimension_mismatch,
           "embedding '" + id + "' has dim " + std::to_string(vec.size()) +
               ", expected " + std::to_string(dim_));
    }
    for (float x : vec) {
      if (!std::isfinite(x)) {
        fail(errc::non_finite, "embedding '" + id + "' has non-finite value");
      }
    }
    if (!index_.emplace(id, ids_.size()).second) {
      fail(errc::duplicate_id, "duplicate embedding id '" + id + "'");
    }
    ids_.push_back(id);
    data_.insert(data_.end(), vec.begin(), vec.end());
  }

  void add(const std::string& id, std::span<const double> vec) {
    std::vector<float> narrowed(vec.begin(), vec.end());
    add(id, std::span<const float>(narrowed));
  }

  std::vector<double> get(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      fail(errc::missing_embedding, "no embedding for id '" + id + "'");
    }
    const float* row = data_.data() + it->second * dim_;
    return std::vector<double>(row, row + dim_);
  }

  std::span<const float> raw(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      fail(errc::missing_embedding, "no embedding for id '" + id + "'");
    }
    return {data_.data() + it->second * dim_, dim_};
  }

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    if (a.dim_ != b.dim_ || a.ids_ != b.ids_) return false;
    if (a.data_.size() != b.data_.size()) return false;
    return std::memcmp(a.data_.data(), b.data_.data(),
                       a.data_.size() * sizeof(float)) == 0;
  }

 private:
  std::size_t dim_ = 0;
  Similarity similarity_ = Similarity::cosine;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline double embedding_score(const EmbeddingTable& table,
                              std::span<const double> left,
                              const std::string& right_id) {
  const std::vector<double> right = table.get(right_id);
  return table.similarity() == Similarity::dot ? dot(left, right)
                                               : cosine(left, right);
}

inline double embedding_score(const EmbeddingTable& table,
                              const std::string& left_id,
                              const std::string& right_id) {
  const std::vector<double> left = table.get(left_id);
  return embedding_score(table, left, right_id);
}

namespace detail {

constexpr char kEmbeddingMagic[8] = {'P', 'C', 'A', 'S',
                                     'E', 'M', 'B', '1'};

template <typename T>
void write_le(std::ofstream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    fail(errc::parse_failure, path + ": truncated embedding file");
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// Binary layout: 8-byte magic "PCASEMB1", u32 LE dimension, then records
/// of u16 LE id length, id bytes, dim float32 LE values.
inline void save_embeddings_binary(const EmbeddingTable& table,
                                   const std::string& path) {
  static_assert(sizeof(float) == 4);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  out.write(detail::kEmbeddingMagic, sizeof(detail::kEmbeddingMagic));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim()));
  for (const std::string& id : table.ids()) {
    if (id.size() > 0xFFFF) {
      fail(errc::bad_argument, "embedding id too long for binary format");
    }
    detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float x : table.raw(id)) detail::write_le<float>(out, x);
  }
  if (!out) fail(errc::io_failure, "write failed for '" + path + "'");
}

inline EmbeddingTable load_embeddings_binary(
    const std::string& path, Similarity similarity = Similarity::cosine) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, detail::kEmbeddingMagic, sizeof(magic)) != 0) {
    fail(errc::parse_failure, path + ": not an embedding file");
  }
  const auto dim = detail::read_le<std::uint32_t>(in, path);
  if (dim == 0) fail(errc::parse_failure, path + ": zero dimension");
  EmbeddingTable table(dim, similarity);
  std::vector<float> row(dim);
  while (true) {
    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) break;
    std::uint16_t id_len;
    std::memcpy(&id_len, len_bytes, 2);
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len)) {
      fail(errc::parse_failure, path + ": truncated embedding file");
    }
    for (std::uint32_t i = 0; i < dim; ++i) {
      row[i] = detail::read_le<float>(in, path);
    }
    table.add(id, std::span<const float>(row));
  }
  return table;
}

inline void save_embeddings_jsonl(const EmbeddingTable& table,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_failure, "cannot write '" + path + "'");
  for (const std::string& id : table.ids()) {
    nlohmann::json vec = nlohmann::json::array();
    for (float x : table.raw(id)) vec.push_back(x);
    out << nlohmann::json{{"id", id}, {"vector", std::move(vec)}}.dump()
        << '\n';
  }
}

inline EmbeddingTable load_embeddings_jsonl(
    const std::string& path, Similarity similarity = Similarity::cosine) {
  EmbeddingTable table;
  table.set_similarity(similarity);
  detail::for_each_record(path, [&](const nlohmann::json& record,
                                    std::size_t line_no) {
    const std::string at = path + ":" + std::to_string(line_no);
    const std::string id = detail::require_string(record, "id", path, line_no);
    auto it = record.find("vector");
    if (it == record.end() || !it->is_array() || it->empty()) {
      fail(errc::parse_failure, at + ": missing or empty 'vector'");
    }
    std::vector<float> vec;
    vec.reserve(it->size());
    for (const nlohmann::json& x : *it) {
      if (!x.is_number()) {
        fail(errc::parse_failure, at + ": vector entries must be numbers");
      }
      vec.push_back(x.get<float>());
    }
    if (table.contains(id)) {
      fail(errc::duplicate_id, at + ": duplicate embedding id '" + id + "'");
    }
    table.add(id, std::span<const float>(vec));
  });
  if (table.empty()) fail(errc::parse_failure, path + ": no embeddings");
  return table;
}

/// Loads either format, sniffing the binary magic first.
inline EmbeddingTable load_embeddings(
    const std::string& path, Similarity similarity = Similarity::cosine) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(errc::io_failure, "cannot open '" + path + "'");
  char magic[8] = {};
  probe.read(magic, sizeof(magic));
  if (probe.gcount() == 8 &&
      std::memcmp(magic, detail::kEmbeddingMagic, sizeof(magic)) == 0) {
    probe.close();
    return load_embeddings_binary(path, similarity);
  }
  probe.close();
  return load_embeddings_jsonl(path, similarity);
}

}  // namespace pcas
