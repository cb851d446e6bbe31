#pragma once

// Initial concept embeddings for multi-word tags, composed from word
// vectors either by plain averaging or by smooth inverse frequency (SIF)
// weighting followed by removal of the common component.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "genremb/error.hpp"
#include "genremb/linalg.hpp"
#include "genremb/wordvec.hpp"

namespace genremb {

/// Per-concept embeddings with a known flag. A concept is known when at
/// least one constituent word had a pre-trained vector (or, after
/// retrofitting, when its vector is nonzero).
class ConceptEmbeddingMatrix {
 public:
  ConceptEmbeddingMatrix() = default;

  ConceptEmbeddingMatrix(std::vector<std::string> concepts, Matrix vectors,
                         std::vector<bool> known)
      : concepts_(std::move(concepts)),
        vectors_(std::move(vectors)),
        known_(std::move(known)) {
    if (vectors_.rows() != concepts_.size() || known_.size() != concepts_.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "concepts, vectors and known flags differ in length");
    }
    index_.reserve(concepts_.size());
    for (std::size_t i = 0; i < concepts_.size(); ++i) {
      if (!index_.emplace(concepts_[i], i).second) {
        throw Error(ErrorKind::invalid_argument,
                    "duplicate concept id '" + concepts_[i] + "'");
      }
    }
  }

  std::size_t size() const noexcept { return concepts_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }

  const std::vector<std::string>& concepts() const noexcept { return concepts_; }
  const Matrix& vectors() const noexcept { return vectors_; }
  const std::vector<bool>& known() const noexcept { return known_; }
  bool known(std::size_t i) const { return known_.at(i); }

  std::span<const double> row(std::size_t i) const { return vectors_.row(i); }

  std::optional<std::size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const double> vector_of(const std::string& id) const {
    auto i = index_of(id);
    if (!i) throw Error(ErrorKind::not_found, "unknown concept '" + id + "'");
    return row(*i);
  }

 private:
  std::vector<std::string> concepts_;
  Matrix vectors_;
  std::vector<bool> known_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One concept to compose: its id, normalized tokens, and the word
/// vectors of its language.
struct ConceptSpec {
  std::string id;
  std::vector<std::string> tokens;
  const WordVectorStore* store = nullptr;
};

namespace detail {

inline std::size_t common_dim(std::span<const ConceptSpec> specs) {
  std::size_t dim = 0;
  for (const auto& spec : specs) {
    if (spec.store == nullptr) {
      throw Error(ErrorKind::invalid_argument,
                  "concept '" + spec.id + "' has no word vector store");
    }
    if (spec.tokens.empty()) {
      throw Error(ErrorKind::invalid_argument,
                  "concept '" + spec.id + "' has no tokens");
    }
    if (dim == 0) dim = spec.store->dim();
    require_same_dim(dim, spec.store->dim());
  }
  return dim;
}

inline std::vector<std::string> ids_of(std::span<const ConceptSpec> specs) {
  std::vector<std::string> ids;
  ids.reserve(specs.size());
  for (const auto& spec : specs) ids.push_back(spec.id);
  return ids;
}

}  // namespace detail

/// q_i = (1/M) sum_m w_m. An out-of-vocabulary token contributes the zero
/// vector and still counts in M.
inline ConceptEmbeddingMatrix compose_avg(std::span<const ConceptSpec> specs) {
  const std::size_t dim = detail::common_dim(specs);
  Matrix vectors(specs.size(), dim);
  std::vector<bool> known(specs.size(), false);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    // Running mean: exact when all tokens share one vector.
    auto row = vectors.row(i);
    std::size_t m = 0;
    for (const auto& token : specs[i].tokens) {
      ++m;
      const auto entry = specs[i].store->lookup(token);
      if (entry) known[i] = true;
      for (std::size_t k = 0; k < dim; ++k) {
        const double x = entry ? static_cast<double>(entry->vector[k]) : 0.0;
        row[k] += (x - row[k]) / static_cast<double>(m);
      }
    }
  }
  return {detail::ids_of(specs), std::move(vectors), std::move(known)};
}

/// SIF word weight a / (a + f(rank)).
inline double sif_weight(std::size_t rank, double a) {
  if (!(a > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "sif parameter a must be positive");
  }
  return a / (a + estimate_frequency(static_cast<std::int64_t>(rank)));
}

/// Leading right singular vector of `rows` (the top eigenvector of
/// rows^T rows) by power iteration. Starts from the normalized all-ones
/// vector; the sign is fixed so the largest-magnitude component is positive.
inline std::vector<double> leading_singular_direction(const Matrix& rows,
                                                      int max_iters = 1000,
                                                      double tolerance = 1e-10) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n == 0 || d == 0) {
    throw Error(ErrorKind::numerical, "empty matrix has no singular direction");
  }
  std::vector<double> u(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> projected(n);
  std::vector<double> next(d);
  auto normalize = [](std::vector<double>& v) {
    const double len = norm2(v);
    if (len == 0.0) return false;
    for (double& x : v) x /= len;
    return true;
  };
  for (int iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) projected[i] = dot(rows.row(i), u);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = rows.row(i);
      for (std::size_t k = 0; k < d; ++k) next[k] += projected[i] * r[k];
    }
    if (!normalize(next)) {
      if (iter == 0) {
        // The all-ones start is orthogonal to the row space; restart from
        // the first nonzero row.
        for (std::size_t i = 0; i < n; ++i) {
          if (!is_zero(rows.row(i))) {
            next.assign(rows.row(i).begin(), rows.row(i).end());
            break;
          }
        }
        if (!normalize(next)) {
          throw Error(ErrorKind::numerical, "zero matrix has no singular direction");
        }
      } else {
        throw Error(ErrorKind::numerical, "power iteration collapsed to zero");
      }
    }
    double change = 0.0;
    for (std::size_t k = 0; k < d; ++k) change = std::max(change, std::abs(next[k] - u[k]));
    u.swap(next);
    if (change <= tolerance) break;
  }
  const auto largest = std::max_element(u.begin(), u.end(), [](double x, double y) {
    return std::abs(x) < std::abs(y);
  });
  if (*largest < 0.0) {
    for (double& x : u) x = -x;
  }
  return u;
}

/// q <- q - u u^T q for the selected rows.
inline void remove_component(Matrix& rows, std::span<const double> u,
                             const std::vector<bool>& selected) {
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (!selected[i]) continue;
    auto r = rows.row(i);
    const double c = dot(r, u);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= c * u[k];
  }
}

struct SifResult {
  ConceptEmbeddingMatrix embeddings;
  std::vector<double> common_direction;
};

/// SIF composition. Step 1 averages a/(a+f) weighted vectors over the
/// in-vocabulary tokens only; step 2 removes the projection on the leading
/// singular direction of all known rows (one direction across languages).
inline SifResult compose_sif_detailed(std::span<const ConceptSpec> specs,
                                      double a = 1e-3) {
  if (!(a > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "sif parameter a must be positive");
  }
  const std::size_t dim = detail::common_dim(specs);
  Matrix vectors(specs.size(), dim);
  std::vector<bool> known(specs.size(), false);
  std::size_t known_count = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto row = vectors.row(i);
    std::size_t m = 0;
    for (const auto& token : specs[i].tokens) {
      const auto entry = specs[i].store->lookup(token);
      if (!entry) continue;
      ++m;
      const double w = sif_weight(entry->rank, a);
      for (std::size_t k = 0; k < dim; ++k) row[k] += w * entry->vector[k];
    }
    if (m == 0) continue;
    known[i] = true;
    ++known_count;
    for (double& x : row) x /= static_cast<double>(m);
  }
  if (known_count < 2) {
    throw Error(ErrorKind::invalid_argument,
                "sif needs at least 2 known concepts, got " +
                    std::to_string(known_count));
  }
  Matrix known_rows(known_count, dim);
  for (std::size_t i = 0, r = 0; i < specs.size(); ++i) {
    if (!known[i]) continue;
    std::copy(vectors.row(i).begin(), vectors.row(i).end(), known_rows.row(r++).begin());
  }
  auto u = leading_singular_direction(known_rows);
  remove_component(vectors, u, known);
  return {{detail::ids_of(specs), std::move(vectors), std::move(known)}, std::move(u)};
}

inline ConceptEmbeddingMatrix compose_sif(std::span<const ConceptSpec> specs,
                                          double a = 1e-3) {
  return std::move(compose_sif_detailed(specs, a).embeddings);
}

}  // namespace genremb
