#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "genremb/error.hpp"

namespace genremb {

// Dense row-major matrix of doubles. Rows are concept or word vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::invalid_argument,
                "dimension mismatch: " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u.size(), v.size());
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

inline double norm2(std::span<const double> u) { return std::sqrt(dot(u, u)); }

inline double squared_distance(std::span<const double> u,
                               std::span<const double> v) {
  require_same_dim(u.size(), v.size());
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    s += d * d;
  }
  return s;
}

inline bool is_zero(std::span<const double> u) {
  for (double x : u) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace genremb
