#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

/// Dense row-major matrix of exact scalars.
class ScalarMatrix {
 public:
  ScalarMatrix() = default;
  ScalarMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ScalarMatrix identity(std::size_t n) {
    ScalarMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Scalar& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend ScalarMatrix operator*(const ScalarMatrix& l, const ScalarMatrix& r) {
    if (l.cols_ != r.rows_) throw Error(ErrorCode::dimension_mismatch, "scalar matrix product");
    ScalarMatrix out(l.rows_, r.cols_);
    for (std::size_t i = 0; i < l.rows_; ++i) {
      for (std::size_t k = 0; k < l.cols_; ++k) {
        if (l(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < r.cols_; ++j) out(i, j) += l(i, k) * r(k, j);
      }
    }
    return out;
  }

  ScalarMatrix transpose() const {
    ScalarMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    }
    return out;
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = i + 1; j < cols_; ++j) {
        if (!((*this)(i, j) == (*this)(j, i))) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ScalarMatrix&, const ScalarMatrix&) = default;

  std::vector<double> to_doubles() const {
    std::vector<double> out;
    out.reserve(data_.size());
    for (const auto& s : data_) out.push_back(s.to_double());
    return out;
  }

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<Scalar> data_;
};

/// Rank by exact Gaussian elimination.
inline std::size_t exact_rank(ScalarMatrix m) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.rows() && m(pivot, col).is_zero()) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != rank) {
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(pivot, j), m(rank, j));
    }
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      if (m(i, col).is_zero()) continue;
      Scalar f = m(i, col) / m(rank, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= f * m(rank, j);
    }
    ++rank;
  }
  return rank;
}

inline Scalar exact_determinant(ScalarMatrix m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::dimension_mismatch, "determinant of a non-square matrix");
  const std::size_t n = m.rows();
  Scalar det(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m(pivot, col).is_zero()) ++pivot;
    if (pivot == n) return Scalar();
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(pivot, j), m(col, j));
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (m(i, col).is_zero()) continue;
      Scalar f = m(i, col) / m(col, col);
      for (std::size_t j = col; j < n; ++j) m(i, j) -= f * m(col, j);
    }
  }
  return det;
}

/// Pivots of the symmetric LDLᵀ factorization without pivoting. Empty when a
/// zero pivot is met before the end.
inline std::vector<Scalar> ldlt_pivots(const ScalarMatrix& a) {
  const std::size_t n = a.rows();
  ScalarMatrix l = ScalarMatrix::identity(n);
  std::vector<Scalar> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    Scalar dj = a(j, j);
    for (std::size_t k = 0; k < j; ++k) dj -= l(j, k) * l(j, k) * d[k];
    if (dj.is_zero()) return {};
    d[j] = dj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Scalar v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k) * d[k];
      l(i, j) = v / dj;
    }
  }
  return d;
}

/// Exact certificate of symmetric positive definiteness.
inline bool is_positive_definite(const ScalarMatrix& a) {
  if (!a.is_symmetric()) return false;
  auto pivots = ldlt_pivots(a);
  if (pivots.size() != a.rows()) return false;
  for (const auto& p : pivots) {
    if (p.sign() <= 0) return false;
  }
  return true;
}

/// Exact certificate of positive semidefiniteness: every principal minor is
/// non-negative. Exponential in the size; covariances here are tiny.
inline bool is_positive_semidefinite(const ScalarMatrix& a) {
  if (!a.is_symmetric()) return false;
  const std::size_t n = a.rows();
  if (n > 20) throw Error(ErrorCode::invalid_argument, "semidefiniteness check limited to 20x20");
  for (std::uint32_t set = 1; set < (1U << n); ++set) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (set & (1U << i)) idx.push_back(i);
    }
    ScalarMatrix sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = a(idx[i], idx[j]);
    }
    if (exact_determinant(sub).sign() < 0) return false;
  }
  return true;
}

/// Rectangular matrix of polynomials sharing one variable count.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(std::size_t rows, std::size_t cols, std::size_t nvars)
      : rows_(rows), cols_(cols), nvars_(nvars), entries_(rows * cols, MultiPoly(nvars)) {}

  static PolyMatrix from_scalars(const ScalarMatrix& m, std::size_t nvars) {
    PolyMatrix out(m.rows(), m.cols(), nvars);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = MultiPoly::constant(nvars, m(i, j));
    }
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nvars() const noexcept { return nvars_; }

  MultiPoly& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const MultiPoly& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<const MultiPoly> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

  bool row_is_zero(std::size_t r) const {
    for (const auto& e : row(r)) {
      if (!e.is_zero()) return false;
    }
    return true;
  }

  /// Minimum lowest-degree over the entries of a row.
  Degree row_lowest_degree(std::size_t r) const {
    Degree d = kInfiniteDegree;
    for (const auto& e : row(r)) d = std::min(d, e.lowest_degree());
    return d;
  }

  PolyMatrix transpose() const {
    PolyMatrix out(cols_, rows_, nvars_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    }
    return out;
  }

  friend PolyMatrix operator*(const PolyMatrix& l, const PolyMatrix& r) {
    if (l.cols_ != r.rows_ || l.nvars_ != r.nvars_) {
      throw Error(ErrorCode::dimension_mismatch, "polynomial matrix product");
    }
    PolyMatrix out(l.rows_, r.cols_, l.nvars_);
    for (std::size_t i = 0; i < l.rows_; ++i) {
      for (std::size_t k = 0; k < l.cols_; ++k) {
        if (l(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < r.cols_; ++j) {
          if (!r(k, j).is_zero()) out(i, j) += l(i, k) * r(k, j);
        }
      }
    }
    return out;
  }

  friend PolyMatrix operator*(const ScalarMatrix& s, const PolyMatrix& m) {
    if (s.cols() != m.rows_) throw Error(ErrorCode::dimension_mismatch, "scalar times polynomial matrix");
    PolyMatrix out(s.rows(), m.cols_, m.nvars_);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t k = 0; k < s.cols(); ++k) {
        if (s(i, k).is_zero()) continue;
        for (std::size_t j = 0; j < m.cols_; ++j) out(i, j) += m(k, j) * s(i, k);
      }
    }
    return out;
  }

  friend PolyMatrix operator+(PolyMatrix l, const PolyMatrix& r) {
    if (l.rows_ != r.rows_ || l.cols_ != r.cols_) throw Error(ErrorCode::dimension_mismatch, "matrix sum");
    for (std::size_t i = 0; i < l.entries_.size(); ++i) l.entries_[i] += r.entries_[i];
    return l;
  }
  friend PolyMatrix operator-(PolyMatrix l, const PolyMatrix& r) {
    if (l.rows_ != r.rows_ || l.cols_ != r.cols_) throw Error(ErrorCode::dimension_mismatch, "matrix difference");
    for (std::size_t i = 0; i < l.entries_.size(); ++i) l.entries_[i] -= r.entries_[i];
    return l;
  }

  friend bool operator==(const PolyMatrix&, const PolyMatrix&) = default;

  ScalarMatrix evaluate(std::span<const Scalar> point) const {
    ScalarMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).evaluate(point);
    }
    return out;
  }

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::size_t nvars_{0};
  std::vector<MultiPoly> entries_;
};

/// Determinant of the submatrix of a square polynomial matrix on the given
/// row and column index sets, by Laplace expansion along the first row with
/// memoisation on (row set, column set). Sets are bitmasks; q is at most 32.
class MinorEvaluator {
 public:
  explicit MinorEvaluator(const PolyMatrix& m) : m_(m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::dimension_mismatch, "minors of a non-square matrix");
    if (m.rows() > 32) throw Error(ErrorCode::q_too_large, "matrix too large for minor expansion");
  }

  MultiPoly determinant(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0) return MultiPoly::constant(m_.nvars(), Scalar(1));
    std::uint64_t key = (static_cast<std::uint64_t>(rows) << 32) | cols;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::size_t first = static_cast<std::size_t>(std::countr_zero(rows));
    const std::uint32_t rest_rows = rows & (rows - 1);
    MultiPoly det(m_.nvars());
    int sign = 1;
    for (std::uint32_t c = cols; c != 0; c &= c - 1) {
      const std::size_t col = static_cast<std::size_t>(std::countr_zero(c));
      const MultiPoly& entry = m_(first, col);
      if (!entry.is_zero()) {
        MultiPoly term = entry * determinant(rest_rows, cols & ~(1U << col));
        if (sign > 0) {
          det += term;
        } else {
          det -= term;
        }
      }
      sign = -sign;
    }
    memo_.emplace(key, det);
    return det;
  }

 private:
  const PolyMatrix& m_;
  std::unordered_map<std::uint64_t, MultiPoly> memo_;
};

inline MultiPoly determinant(const PolyMatrix& m) {
  MinorEvaluator ev(m);
  std::uint32_t all = m.rows() == 32 ? ~0U : ((1U << m.rows()) - 1);
  return ev.determinant(all, all);
}

}  // namespace wdiv
