#pragma once

// Pre-trained aligned word vectors in the common text format:
//
//   <count> <dim>
//   <word> <f1> ... <fdim>
//
// Rows are ordered by decreasing corpus frequency, so the 1-based row
// position doubles as a frequency rank.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "genremb/error.hpp"
#include "genremb/linalg.hpp"
#include "genremb/text.hpp"

namespace genremb {

namespace detail {

inline std::string_view trim_line_end(std::string_view line) {
  while (!line.empty() &&
         (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) {
    line.remove_suffix(1);
  }
  return line;
}

inline std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

struct VectorHeader {
  std::size_t count = 0;
  std::size_t dim = 0;
};

// Streams rows of a vector text file to `on_row(line_number, key, values)`.
// Stops after min(count, limit) rows.
inline VectorHeader read_vector_rows(
    std::istream& in, std::optional<std::size_t> limit,
    const std::function<void(std::size_t, std::string_view,
                             std::span<const double>)>& on_row) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::parse, "missing header line", 1);
  }
  const std::string_view header = trim_line_end(line);
  const auto space = header.find(' ');
  if (space == std::string_view::npos) {
    throw Error(ErrorKind::parse, "header must be '<count> <dim>'", 1);
  }
  const auto count = parse_size(header.substr(0, space));
  const auto dim = parse_size(header.substr(space + 1));
  if (!count || !dim || *dim == 0) {
    throw Error(ErrorKind::parse, "header must be '<count> <dim>'", 1);
  }
  if (limit && *limit == 0) {
    throw Error(ErrorKind::invalid_argument, "limit must be positive");
  }
  const std::size_t wanted = limit ? std::min(*count, *limit) : *count;

  std::vector<double> values(*dim);
  std::size_t line_no = 1;
  for (std::size_t row = 0; row < wanted; ++row) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw Error(ErrorKind::parse,
                  "expected " + std::to_string(*count) + " rows, found " +
                      std::to_string(row),
                  line_no);
    }
    std::string_view rest = trim_line_end(line);
    const auto key_end = rest.find(' ');
    if (key_end == 0 || key_end == std::string_view::npos) {
      throw Error(ErrorKind::parse, "row has no components", line_no);
    }
    const std::string_view key = rest.substr(0, key_end);
    rest.remove_prefix(key_end + 1);
    std::size_t k = 0;
    while (!rest.empty()) {
      const auto end = rest.find(' ');
      const std::string_view field = rest.substr(0, end);
      if (k >= *dim) {
        throw Error(ErrorKind::parse,
                    "row has more than " + std::to_string(*dim) + " components",
                    line_no);
      }
      const auto v = parse_double(field);
      if (!v) {
        throw Error(ErrorKind::parse,
                    "bad number '" + std::string(field) + "'", line_no);
      }
      values[k++] = *v;
      if (end == std::string_view::npos) break;
      rest.remove_prefix(end + 1);
    }
    if (k != *dim) {
      throw Error(ErrorKind::parse,
                  "row has " + std::to_string(k) + " components, expected " +
                      std::to_string(*dim),
                  line_no);
    }
    on_row(line_no, key, values);
  }
  return {*count, *dim};
}

inline void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace detail

struct VectorLoadOptions {
  std::optional<std::size_t> limit;
  // When set, only rows whose folded word is in `keep` are stored. Ranks
  // still count every row, so frequencies are unaffected.
  std::optional<std::unordered_set<std::string>> keep;
};

/// Immutable store of word vectors indexed by folded word.
class WordVectorStore {
 public:
  struct Entry {
    std::span<const float> vector;
    std::size_t rank;  // 1-based
  };

  WordVectorStore() = default;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  // Rows dropped because they collided with an earlier word after folding.
  std::size_t dropped_duplicates() const noexcept { return dropped_; }

  // Entries in file order: folded word, vector and rank.
  const std::string& word_at(std::size_t slot) const { return words_.at(slot); }
  std::size_t rank_at(std::size_t slot) const { return ranks_.at(slot); }
  std::span<const float> vector_at(std::size_t slot) const {
    if (slot >= words_.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "entry out of range: " + std::to_string(slot));
    }
    return {data_.data() + slot * dim_, dim_};
  }

  std::optional<Entry> lookup(std::string_view word) const {
    auto it = index_.find(text::fold(word));
    if (it == index_.end()) return std::nullopt;
    return Entry{vector_at(it->second), ranks_[it->second]};
  }

  bool contains(std::string_view word) const { return lookup(word).has_value(); }

 private:
  friend WordVectorStore load_vectors(std::istream&, const VectorLoadOptions&);

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<std::size_t> ranks_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dropped_ = 0;
};

/// Parse a vector text stream. Stored words are NFC-normalized and
/// lowercased; a word repeated verbatim is an error, a word that only
/// collides after folding is dropped and counted. Ranks are 1-based over
/// the rows that remain.
inline WordVectorStore load_vectors(std::istream& in, const VectorLoadOptions& options) {
  WordVectorStore store;
  std::unordered_set<std::string> raw_seen;
  std::unordered_set<std::string> folded_seen;
  std::size_t rank = 0;
  const auto header = detail::read_vector_rows(
      in, options.limit,
      [&](std::size_t line_no, std::string_view key,
          std::span<const double> values) {
        if (!raw_seen.emplace(key).second) {
          throw Error(ErrorKind::parse,
                      "duplicate word '" + std::string(key) + "'", line_no);
        }
        std::string folded = text::fold(key);
        if (!folded_seen.insert(folded).second) {
          ++store.dropped_;
          return;
        }
        ++rank;
        if (options.keep && !options.keep->contains(folded)) return;
        store.index_.emplace(folded, store.words_.size());
        store.words_.push_back(std::move(folded));
        store.ranks_.push_back(rank);
        for (double v : values) store.data_.push_back(static_cast<float>(v));
      });
  store.dim_ = header.dim;
  return store;
}

inline WordVectorStore load_vectors(std::istream& in,
                                    std::optional<std::size_t> limit = std::nullopt) {
  return load_vectors(in, VectorLoadOptions{limit, std::nullopt});
}

/// Mandelbrot's generalization of Zipf's law: f(rank) = 1 / (rank + 2.7).
inline double estimate_frequency(std::int64_t rank) {
  if (rank < 1) {
    throw Error(ErrorKind::invalid_argument,
                "rank must be >= 1, got " + std::to_string(rank));
  }
  return 1.0 / (static_cast<double>(rank) + 2.7);
}

/// Write keyed rows in the vector text format. Keys are escaped with
/// text::escape_key; numbers use the shortest round-trip representation.
inline void write_vectors(std::ostream& out, std::span<const std::string> keys,
                          const Matrix& rows) {
  if (keys.size() != rows.rows()) {
    throw Error(ErrorKind::invalid_argument, "key count does not match rows");
  }
  std::string line;
  line = std::to_string(rows.rows()) + " " + std::to_string(rows.cols()) + "\n";
  out << line;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    line = text::escape_key(keys[i]);
    for (double v : rows.row(i)) {
      line += ' ';
      detail::append_number(line, v);
    }
    line += '\n';
    out << line;
  }
}

struct KeyedRows {
  std::vector<std::string> keys;
  Matrix rows;
};

/// Read keyed rows written by write_vectors. Keys are kept verbatim
/// (unescaped, not folded).
inline KeyedRows read_keyed_rows(std::istream& in) {
  std::vector<std::string> keys;
  std::vector<double> flat;
  const auto header = detail::read_vector_rows(
      in, std::nullopt,
      [&](std::size_t, std::string_view key, std::span<const double> values) {
        keys.push_back(text::unescape_key(key));
        flat.insert(flat.end(), values.begin(), values.end());
      });
  KeyedRows out{std::move(keys), Matrix(header.count, header.dim)};
  for (std::size_t i = 0; i < out.rows.rows(); ++i) {
    for (std::size_t k = 0; k < header.dim; ++k) {
      out.rows(i, k) = flat[i * header.dim + k];
    }
  }
  return out;
}

}  // namespace genremb
