#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

/// Total degree of a polynomial. The zero polynomial has degree kInfiniteDegree.
using Degree = std::uint32_t;
inline constexpr Degree kInfiniteDegree = std::numeric_limits<Degree>::max();

/// Exponent tuple (j_1, ..., j_p).
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exps_(nvars, 0) {}
  explicit Monomial(std::vector<Degree> exps) : exps_(std::move(exps)) {}

  static Monomial variable(std::size_t nvars, std::size_t index) {
    Monomial m(nvars);
    m.exps_.at(index) = 1;
    return m;
  }

  std::size_t nvars() const noexcept { return exps_.size(); }
  Degree operator[](std::size_t i) const { return exps_[i]; }
  Degree& operator[](std::size_t i) { return exps_[i]; }
  const std::vector<Degree>& exponents() const noexcept { return exps_; }

  Degree degree() const { return std::accumulate(exps_.begin(), exps_.end(), Degree{0}); }

  friend Monomial operator*(const Monomial& l, const Monomial& r) {
    Monomial out(l.nvars());
    for (std::size_t i = 0; i < l.nvars(); ++i) out.exps_[i] = l.exps_[i] + r.exps_[i];
    return out;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Degree> exps_;
};

/// Graded lexicographic order: lower total degree first, ties broken
/// lexicographically with the first variable most significant.
struct GradedLex {
  bool operator()(const Monomial& l, const Monomial& r) const {
    Degree dl = l.degree();
    Degree dr = r.degree();
    if (dl != dr) return dl < dr;
    return std::lexicographical_compare(r.exponents().begin(), r.exponents().end(), l.exponents().begin(),
                                        l.exponents().end());
  }
};

class MultiPoly;

/// p = low + rest with low homogeneous of degree low_degree and every
/// monomial of rest of strictly higher degree.
struct HomogeneousDecomposition;

/// Sparse polynomial in a fixed number of variables with coefficients in
/// ℚ(√d). Zero coefficients are never stored.
class MultiPoly {
 public:
  using TermMap = std::map<Monomial, Scalar, GradedLex>;

  MultiPoly() = default;
  explicit MultiPoly(std::size_t nvars) : nvars_(nvars) {}

  static MultiPoly constant(std::size_t nvars, const Scalar& c) {
    MultiPoly p(nvars);
    if (!c.is_zero()) p.terms_.emplace(Monomial(nvars), c);
    return p;
  }

  static MultiPoly variable(std::size_t nvars, std::size_t index) {
    if (index >= nvars) throw Error(ErrorCode::index_out_of_range, "variable index out of range");
    MultiPoly p(nvars);
    p.terms_.emplace(Monomial::variable(nvars, index), Scalar(1));
    return p;
  }

  static MultiPoly monomial(const Monomial& m, const Scalar& c) {
    MultiPoly p(m.nvars());
    if (!c.is_zero()) p.terms_.emplace(m, c);
    return p;
  }

  std::size_t nvars() const noexcept { return nvars_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Coefficient of m, zero when absent.
  Scalar coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Scalar() : it->second;
  }

  /// Radicand shared by the irrational coefficients, 0 for a rational polynomial.
  std::int64_t field() const {
    for (const auto& [m, c] : terms_) {
      if (!c.is_rational()) return c.radicand();
    }
    return 0;
  }

  Degree total_degree() const { return terms_.empty() ? kInfiniteDegree : terms_.rbegin()->first.degree(); }
  Degree lowest_degree() const { return terms_.empty() ? kInfiniteDegree : terms_.begin()->first.degree(); }

  /// Adds c·m in place.
  void add_term(const Monomial& m, const Scalar& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  MultiPoly operator-() const {
    MultiPoly out(nvars_);
    for (const auto& [m, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), m, -c);
    return out;
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_compatible(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  MultiPoly& operator-=(const MultiPoly& o) {
    check_compatible(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  MultiPoly& operator*=(const Scalar& s) {
    if (s.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend MultiPoly operator+(MultiPoly l, const MultiPoly& r) { return l += r; }
  friend MultiPoly operator-(MultiPoly l, const MultiPoly& r) { return l -= r; }
  friend MultiPoly operator*(MultiPoly l, const Scalar& s) { return l *= s; }
  friend MultiPoly operator*(const Scalar& s, MultiPoly r) { return r *= s; }

  friend MultiPoly operator*(const MultiPoly& l, const MultiPoly& r) {
    l.check_compatible(r);
    MultiPoly out(l.nvars_);
    for (const auto& [ml, cl] : l.terms_) {
      for (const auto& [mr, cr] : r.terms_) out.add_term(ml * mr, cl * cr);
    }
    return out;
  }

  MultiPoly pow(unsigned n) const {
    MultiPoly result = constant(nvars_, Scalar(1));
    MultiPoly base = *this;
    while (n > 0) {
      if (n & 1U) result = result * base;
      n >>= 1U;
      if (n > 0) base = base * base;
    }
    return result;
  }

  friend bool operator==(const MultiPoly& l, const MultiPoly& r) {
    return l.nvars_ == r.nvars_ && l.terms_ == r.terms_;
  }

  MultiPoly partial_derivative(std::size_t var) const {
    if (var >= nvars_) throw Error(ErrorCode::index_out_of_range, "derivative variable out of range");
    MultiPoly out(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial dm = m;
      dm[var] -= 1;
      out.add_term(dm, c * Scalar(static_cast<int>(m[var])));
    }
    return out;
  }

  /// Sum of the terms of exactly the given total degree.
  MultiPoly homogeneous_component(Degree degree) const {
    MultiPoly out(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m.degree() == degree) out.terms_.emplace_hint(out.terms_.end(), m, c);
    }
    return out;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    return lowest_degree() == total_degree();
  }

  /// q(u) = p(shift + u), expanded exactly.
  MultiPoly shift_origin(std::span<const Scalar> shift) const {
    if (shift.size() != nvars_) {
      throw Error(ErrorCode::dimension_mismatch, "shift has " + std::to_string(shift.size()) +
                                                     " entries for " + std::to_string(nvars_) + " variables");
    }
    // (x_k + c_k)^j cached per variable
    std::vector<std::vector<MultiPoly>> powers(nvars_);
    for (std::size_t k = 0; k < nvars_; ++k) {
      powers[k].push_back(constant(nvars_, Scalar(1)));
    }
    auto power = [&](std::size_t k, Degree j) -> const MultiPoly& {
      auto& cache = powers[k];
      while (cache.size() <= j) {
        cache.push_back(cache.back() * (variable(nvars_, k) + constant(nvars_, shift[k])));
      }
      return cache[j];
    };
    MultiPoly out(nvars_);
    for (const auto& [m, c] : terms_) {
      MultiPoly term = constant(nvars_, c);
      for (std::size_t k = 0; k < nvars_; ++k) {
        if (m[k] > 0) term = term * power(k, m[k]);
      }
      out += term;
    }
    return out;
  }

  HomogeneousDecomposition lowest_homogeneous_part() const;

  /// Embeds the polynomial into a ring with `extra` trailing variables.
  MultiPoly extend(std::size_t extra) const {
    MultiPoly out(nvars_ + extra);
    for (const auto& [m, c] : terms_) {
      std::vector<Degree> e = m.exponents();
      e.resize(nvars_ + extra, 0);
      out.terms_.emplace(Monomial(std::move(e)), c);
    }
    return out;
  }

  /// Exact evaluation at a point of ℚ(√d).
  Scalar evaluate(std::span<const Scalar> point) const {
    check_point(point.size());
    Scalar sum;
    for (const auto& [m, c] : terms_) {
      Scalar term = c;
      for (std::size_t k = 0; k < nvars_; ++k) {
        for (Degree j = 0; j < m[k]; ++j) term *= point[k];
      }
      sum += term;
    }
    return sum;
  }

  /// Floating evaluation: plain term-by-term summation in graded-lex order.
  template <typename Real>
    requires(!std::is_same_v<Real, Scalar>)
  Real evaluate(std::span<const Real> point) const {
    check_point(point.size());
    Real sum(0);
    for (const auto& [m, c] : terms_) {
      Real term = to_real<Real>(c);
      for (std::size_t k = 0; k < nvars_; ++k) {
        for (Degree j = 0; j < m[k]; ++j) term *= point[k];
      }
      sum += term;
    }
    return sum;
  }

  Scalar evaluate(const std::vector<Scalar>& point) const { return evaluate(std::span<const Scalar>(point)); }
  template <typename Real>
    requires std::is_floating_point_v<Real>
  Real evaluate(const std::vector<Real>& point) const {
    return evaluate<Real>(std::span<const Real>(point));
  }

 private:
  void check_compatible(const MultiPoly& o) const {
    if (nvars_ != o.nvars_) {
      throw Error(ErrorCode::dimension_mismatch, "polynomials in " + std::to_string(nvars_) + " and " +
                                                     std::to_string(o.nvars_) + " variables");
    }
    std::int64_t d1 = field();
    std::int64_t d2 = o.field();
    if (d1 != 0 && d2 != 0 && d1 != d2) {
      throw Error(ErrorCode::field_mismatch,
                  "sqrt(" + std::to_string(d1) + ") and sqrt(" + std::to_string(d2) + ") coefficients");
    }
  }

  void check_point(std::size_t n) const {
    if (n != nvars_) {
      throw Error(ErrorCode::dimension_mismatch,
                  "point has " + std::to_string(n) + " coordinates for " + std::to_string(nvars_) + " variables");
    }
  }

  std::size_t nvars_{0};
  TermMap terms_;
};

struct HomogeneousDecomposition {
  MultiPoly low;
  MultiPoly rest;
  Degree low_degree{kInfiniteDegree};
};

inline HomogeneousDecomposition MultiPoly::lowest_homogeneous_part() const {
  HomogeneousDecomposition out{MultiPoly(nvars_), MultiPoly(nvars_), lowest_degree()};
  for (const auto& [m, c] : terms_) {
    auto& target = m.degree() == out.low_degree ? out.low : out.rest;
    target.terms_.emplace_hint(target.terms_.end(), m, c);
  }
  return out;
}

inline MultiPoly add(const MultiPoly& l, const MultiPoly& r) { return l + r; }
inline MultiPoly mul(const MultiPoly& l, const MultiPoly& r) { return l * r; }

/// A polynomial with coefficients converted to a floating type once, for
/// repeated evaluation in simulation loops.
template <typename Real>
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const MultiPoly& p) : nvars_(p.nvars()) {
    for (const auto& [m, c] : p.terms()) {
      coeffs_.push_back(to_real<Real>(c));
      exps_.insert(exps_.end(), m.exponents().begin(), m.exponents().end());
    }
  }

  std::size_t nvars() const noexcept { return nvars_; }

  Real operator()(std::span<const Real> point) const {
    Real sum(0);
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      Real term = coeffs_[t];
      const Degree* e = exps_.data() + t * nvars_;
      for (std::size_t k = 0; k < nvars_; ++k) {
        for (Degree j = 0; j < e[k]; ++j) term *= point[k];
      }
      sum += term;
    }
    return sum;
  }

 private:
  std::size_t nvars_{0};
  std::vector<Real> coeffs_;
  std::vector<Degree> exps_;
};

}  // namespace wdiv
