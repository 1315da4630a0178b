#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wdiv/error.hpp"

namespace wdiv::dense {

/// Small dense row-major matrix over a floating type.
template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error(ErrorCode::dimension_mismatch, "matrix data size");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Real(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Real& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const Real> data() const noexcept { return data_; }

  friend Matrix operator*(const Matrix& l, const Matrix& r) {
    if (l.cols_ != r.rows_) throw Error(ErrorCode::dimension_mismatch, "matrix product");
    Matrix out(l.rows_, r.cols_);
    for (std::size_t i = 0; i < l.rows_; ++i) {
      for (std::size_t k = 0; k < l.cols_; ++k) {
        const Real lik = l(i, k);
        if (lik == Real(0)) continue;
        for (std::size_t j = 0; j < r.cols_; ++j) out(i, j) += lik * r(k, j);
      }
    }
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<Real> data_;
};

template <typename Real>
Real abs_value(const Real& x) {
  using std::abs;
  return abs(x);
}

/// G·V·Gᵀ, symmetrised.
template <typename Real>
Matrix<Real> sandwich(const Matrix<Real>& g, const Matrix<Real>& v) {
  Matrix<Real> out = g * v * g.transpose();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = i + 1; j < out.cols(); ++j) {
      const Real avg = (out(i, j) + out(j, i)) / Real(2);
      out(i, j) = avg;
      out(j, i) = avg;
    }
  }
  return out;
}

/// Lower Cholesky factor of a symmetric matrix, or nullopt when a pivot is
/// not above `rel_tol` times the largest diagonal entry.
template <typename Real>
std::optional<Matrix<Real>> cholesky(const Matrix<Real>& a, Real rel_tol = Real(1e-12)) {
  using std::sqrt;
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::dimension_mismatch, "cholesky of a non-square matrix");
  Real scale(0);
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, Real(abs_value(a(i, i))));
  if (!(scale > Real(0))) return std::nullopt;
  Matrix<Real> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Real d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > rel_tol * scale)) return std::nullopt;
    const Real ljj = sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Real v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

/// Solves L·Lᵀ·x = b given the Cholesky factor.
template <typename Real>
std::vector<Real> cholesky_solve(const Matrix<Real>& l, std::span<const Real> b) {
  const std::size_t n = l.rows();
  std::vector<Real> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l(k, i) * y[k];
    y[i] /= l(i, i);
  }
  return y;
}

inline constexpr int kMaxJacobiSweeps = 100;

/// Eigenvalues of a symmetric matrix in descending order, by cyclic Jacobi
/// rotations. Stops once the off-diagonal Frobenius norm drops below
/// rel_tol·‖M‖_F.
template <typename Real>
std::vector<Real> symmetric_eigenvalues(Matrix<Real> a, Real rel_tol = Real(1e-12)) {
  using std::sqrt;
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::dimension_mismatch, "eigenvalues of a non-square matrix");
  Real norm(0);
  Real asym(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      norm += a(i, j) * a(i, j);
      const Real diff = a(i, j) - a(j, i);
      asym += diff * diff;
    }
  }
  norm = sqrt(norm);
  if (sqrt(asym) > Real(1e-10) * norm) throw Error(ErrorCode::invalid_argument, "matrix is not symmetric");

  auto off_norm = [&] {
    Real s(0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += Real(2) * a(i, j) * a(i, j);
    }
    return sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > rel_tol * norm) {
    if (++sweep > kMaxJacobiSweeps) {
      throw Error(ErrorCode::no_convergence, "Jacobi eigenvalue iteration did not converge");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Real apq = a(p, q);
        if (apq == Real(0)) continue;
        // rotation angle zeroing a(p,q)
        const Real theta = (a(q, q) - a(p, p)) / (Real(2) * apq);
        const Real sign = theta >= Real(0) ? Real(1) : Real(-1);
        const Real t = sign / (abs_value(theta) + sqrt(theta * theta + Real(1)));
        const Real c = Real(1) / sqrt(t * t + Real(1));
        const Real s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Real akp = a(k, p);
          const Real akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Real apk = a(p, k);
          const Real aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<Real> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<Real>());
  return eig;
}

}  // namespace wdiv::dense
