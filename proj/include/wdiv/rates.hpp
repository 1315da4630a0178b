#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/poly_matrix.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

enum class Definiteness { positive, semidefinite };

/// Exact symmetric p×p covariance, positive definite unless the caller opts
/// into the semidefinite boundary (limits of V̂_T may sit there).
class Covariance {
 public:
  /// Throws non_spd unless `u` is exactly symmetric with positive LDLᵀ pivots,
  /// or with non-negative principal minors under Definiteness::semidefinite.
  explicit Covariance(ScalarMatrix u, Definiteness kind = Definiteness::positive) : u_(std::move(u)) {
    if (u_.rows() != u_.cols()) throw Error(ErrorCode::dimension_mismatch, "covariance must be square");
    if (!u_.is_symmetric()) throw Error(ErrorCode::non_spd, "covariance is not symmetric");
    definite_ = is_positive_definite(u_);
    if (!definite_ && (kind == Definiteness::positive || !is_positive_semidefinite(u_))) {
      throw Error(ErrorCode::non_spd, kind == Definiteness::positive ? "covariance is not positive definite"
                                                                       : "covariance is not positive semidefinite");
    }
  }

  static Covariance identity(std::size_t p) { return Covariance(ScalarMatrix::identity(p)); }

  const ScalarMatrix& matrix() const noexcept { return u_; }
  std::size_t dim() const noexcept { return u_.rows(); }
  bool is_definite() const noexcept { return definite_; }

 private:
  ScalarMatrix u_;
  bool definite_{true};
};

inline constexpr std::size_t kMaxRestrictions = 8;

/// B(x, U) = G(x)·U·G(x)′.
inline PolyMatrix build_B(const PolyMatrix& g, const Covariance& u) {
  if (u.dim() != g.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "covariance is " + std::to_string(u.dim()) + "x" +
                                                   std::to_string(u.dim()) + " for " + std::to_string(g.cols()) +
                                                   " Jacobian columns");
  }
  return g * PolyMatrix::from_scalars(u.matrix(), g.nvars()) * g.transpose();
}

/// Coefficients of det(λI − B) = λ^q + Σ a_k λ^{q−k}.
struct CharPolyCoeffs {
  std::vector<MultiPoly> a;  ///< a[k-1] = a_k
  std::vector<Degree> m;     ///< lowest total degree of a_k, kInfiniteDegree when a_k = 0
};

/// a_k = (−1)^k · (sum of the k×k principal minors of B).
inline CharPolyCoeffs charpoly_coeffs(const PolyMatrix& b) {
  const std::size_t q = b.rows();
  if (b.cols() != q) throw Error(ErrorCode::dimension_mismatch, "characteristic polynomial of a non-square matrix");
  if (q > kMaxRestrictions) {
    throw Error(ErrorCode::q_too_large, "q = " + std::to_string(q) + " exceeds the supported maximum of " +
                                            std::to_string(kMaxRestrictions));
  }
  MinorEvaluator minors(b);
  CharPolyCoeffs out;
  out.a.assign(q, MultiPoly(b.nvars()));
  for (std::uint32_t set = 1; set < (1U << q); ++set) {
    const auto k = static_cast<std::size_t>(std::popcount(set));
    out.a[k - 1] += minors.determinant(set, set);
  }
  for (std::size_t k = 1; k <= q; ++k) {
    if (k % 2 == 1) out.a[k - 1] = -out.a[k - 1];
    out.m.push_back(out.a[k - 1].lowest_degree());
  }
  return out;
}

/// Coefficients of the t-graded matrix M(t, y) = D(t)·G(t·y)·U·G(t·y)′·D(t),
/// D(t) = diag(t^{−s̄_i}), as polynomials in (y, t) with t the last variable.
/// Setting t = T^{−1/2} recovers the scaled matrix of the rate analysis.
struct GradedCoeffs {
  CharPolyCoeffs coeffs;           ///< over p + 1 variables
  std::vector<Degree> t_degree;    ///< lowest power of t in ã_k
  std::vector<Rational> gamma;     ///< t_degree / 2
  std::vector<bool> indeterminate;  ///< ã_k identically zero
};

/// Multiplies every monomial of degree d in y by t^d, with t a new last variable.
inline MultiPoly grade_by_degree(const MultiPoly& p) {
  MultiPoly out(p.nvars() + 1);
  for (const auto& [m, c] : p.terms()) {
    std::vector<Degree> e = m.exponents();
    e.push_back(m.degree());
    out.add_term(Monomial(std::move(e)), c);
  }
  return out;
}

/// Substitutes t = 1 for the last variable.
inline MultiPoly drop_grading(const MultiPoly& p) {
  MultiPoly out(p.nvars() - 1);
  for (const auto& [m, c] : p.terms()) {
    std::vector<Degree> e = m.exponents();
    e.pop_back();
    out.add_term(Monomial(std::move(e)), c);
  }
  return out;
}

inline Degree min_t_degree(const MultiPoly& p) {
  Degree best = kInfiniteDegree;
  const std::size_t t = p.nvars() - 1;
  for (const auto& [m, c] : p.terms()) best = std::min(best, m[t]);
  return best;
}

/// `g` must be the echelonized Jacobian S·G with row degrees `row_degrees`.
inline GradedCoeffs t_graded_coeffs(const PolyMatrix& g, const Covariance& u, const std::vector<Degree>& row_degrees) {
  if (row_degrees.size() != g.rows()) throw Error(ErrorCode::dimension_mismatch, "one block degree per row");
  const std::size_t nv = g.nvars() + 1;
  PolyMatrix scaled(g.rows(), g.cols(), nv);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const Degree shift = row_degrees[i];
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const MultiPoly graded = grade_by_degree(g(i, j));
      for (const auto& [m, c] : graded.terms()) {
        std::vector<Degree> e = m.exponents();
        if (e.back() < shift) {
          throw Error(ErrorCode::negative_t_degree,
                      "row " + std::to_string(i + 1) + " has a term of degree " + std::to_string(e.back()) +
                          " below its block degree " + std::to_string(shift));
        }
        e.back() -= shift;
        scaled(i, j).add_term(Monomial(std::move(e)), c);
      }
    }
  }
  GradedCoeffs out;
  out.coeffs = charpoly_coeffs(build_B(scaled, u));
  for (const auto& ak : out.coeffs.a) {
    const Degree td = ak.is_zero() ? kInfiniteDegree : min_t_degree(ak);
    out.t_degree.push_back(td);
    out.indeterminate.push_back(ak.is_zero());
    out.gamma.push_back(ak.is_zero() ? Rational(0) : make_rational(static_cast<long>(td), 2));
  }
  for (std::size_t k = 1; k < out.gamma.size(); ++k) {
    if (out.indeterminate[k]) out.gamma[k] = out.gamma[k - 1];
  }
  return out;
}

inline GradedCoeffs t_graded_coeffs(const PolyMatrix& g, const Covariance& u, const EchelonForm& echelon) {
  return t_graded_coeffs(g, u, echelon.row_degrees);
}

struct RateReport {
  std::size_t q{0};
  std::size_t rank_r{0};
  std::vector<Degree> m_u;          ///< m_k(U) of the unscaled B(x, U)
  std::vector<Rational> gamma;      ///< γ_k
  std::vector<Rational> beta;       ///< β_l
  Rational beta_bar{0};             ///< β̄, 0 when FRALD-T holds
  std::vector<EchelonBlock> blocks;
  std::vector<Degree> row_degrees;
  std::vector<bool> indeterminate;  ///< β_k not pinned down by a non-zero ã_k
  bool conservative{false};         ///< some β was indeterminate

  friend bool operator==(const RateReport&, const RateReport&) = default;
};

/// Runs the FRALD check and the graded characteristic-polynomial analysis.
inline RateReport rate_report(const FraldVerdict& verdict, const Covariance& u) {
  const std::size_t q = verdict.echelon.full_matrix.rows();
  if (q > kMaxRestrictions) {
    throw Error(ErrorCode::q_too_large, "q = " + std::to_string(q) + " exceeds the supported maximum of " +
                                            std::to_string(kMaxRestrictions));
  }
  GradedCoeffs graded = t_graded_coeffs(verdict.echelon.full_matrix, u, verdict.echelon);

  RateReport out;
  out.q = q;
  out.rank_r = verdict.rank_r;
  out.blocks = verdict.echelon.blocks;
  out.row_degrees = verdict.echelon.row_degrees;
  out.gamma = graded.gamma;
  out.indeterminate = graded.indeterminate;
  out.m_u = charpoly_coeffs(build_B(jacobian(verdict.recentered), u)).m;

  for (std::size_t k = 0; k < out.rank_r && k < q; ++k) {
    if (out.gamma[k] != 0) {
      throw Error(ErrorCode::precondition_unmet, "graded coefficient " + std::to_string(k + 1) +
                                                     " vanishes at t = 0 although k <= rank " +
                                                     std::to_string(out.rank_r));
    }
  }
  Rational prev(0);
  for (std::size_t l = 0; l < q; ++l) {
    out.beta.push_back(out.gamma[l] - prev);
    prev = out.gamma[l];
    if (out.indeterminate[l]) out.conservative = true;
  }
  out.beta_bar = 0;
  for (std::size_t l = out.rank_r; l < q; ++l) out.beta_bar = std::max(out.beta_bar, out.beta[l]);
  return out;
}

inline RateReport rate_report(const RestrictionSystem& sys, const Covariance& u,
                              std::size_t trials = kDefaultRankTrials, std::uint64_t seed = 42) {
  if (sys.q() > kMaxRestrictions) {
    throw Error(ErrorCode::q_too_large, "q = " + std::to_string(sys.q()) + " exceeds the supported maximum of " +
                                            std::to_string(kMaxRestrictions));
  }
  return rate_report(frald_check(sys, trials, seed), u);
}

inline constexpr std::int64_t kSpdSampleRange = 1000;

/// Random SPD matrix L·diag(d)·Lᵀ with L unit lower triangular and d > 0,
/// all entries random rationals.
template <typename Rng>
ScalarMatrix random_spd(std::size_t p, Rng& rng, std::int64_t range = kSpdSampleRange) {
  ScalarMatrix l = ScalarMatrix::identity(p);
  ScalarMatrix d(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) l(i, j) = Scalar(random_rational(rng, range));
    Rational di;
    do {
      di = abs(random_rational(rng, range));
    } while (di == 0);
    d(i, i) = Scalar(di);
  }
  return l * d * l.transpose();
}

/// m_k(U) for k = 1..q of B(x, U) built from the recentred Jacobian.
inline std::vector<Degree> degree_profile(const RestrictionSystem& sys, const Covariance& u) {
  return charpoly_coeffs(build_B(jacobian(recenter(sys)), u)).m;
}

/// Generic degrees m_k: the minimum of m_k(U) over `samples` random SPD U.
/// By the almost-everywhere argument one generic U already attains it; the
/// minimum guards against an unlucky draw.
inline std::vector<Degree> generic_degrees(const RestrictionSystem& sys, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorCode::invalid_argument, "need at least one covariance sample");
  if (sys.q() > kMaxRestrictions) {
    throw Error(ErrorCode::q_too_large, "q = " + std::to_string(sys.q()) + " exceeds the supported maximum of " +
                                            std::to_string(kMaxRestrictions));
  }
  const PolyMatrix g = jacobian(recenter(sys));
  std::mt19937_64 rng(seed);
  std::vector<Degree> best(sys.q(), kInfiniteDegree);
  for (std::size_t s = 0; s < samples; ++s) {
    Covariance u(random_spd(sys.p(), rng));
    auto m = charpoly_coeffs(build_B(g, u)).m;
    for (std::size_t k = 0; k < m.size(); ++k) best[k] = std::min(best[k], m[k]);
  }
  return best;
}

/// m_k for a single k (1-based).
inline Degree min_degree_generic(const RestrictionSystem& sys, std::size_t k, std::size_t samples,
                                 std::uint64_t seed) {
  if (k == 0 || k > sys.q()) throw Error(ErrorCode::index_out_of_range, "k must lie in 1..q");
  return generic_degrees(sys, samples, seed)[k - 1];
}

/// Exponents (m_l − m_{l−1})/2 with m_0 = 0, for the eigenvalues of the
/// unscaled B(T^{−1/2}y, U): T^{β_l}·λ_l has a non-degenerate limit when the
/// degrees m_l are attained.
inline std::vector<Rational> unscaled_rate_exponents(const std::vector<Degree>& m) {
  std::vector<Rational> out;
  Degree prev = 0;
  for (Degree mk : m) {
    if (mk == kInfiniteDegree) throw Error(ErrorCode::precondition_unmet, "a characteristic coefficient vanishes");
    out.push_back(make_rational(static_cast<long>(mk) - static_cast<long>(prev), 2));
    prev = mk;
  }
  return out;
}

}  // namespace wdiv
