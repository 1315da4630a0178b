#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "wdiv/dense.hpp"
#include "wdiv/error.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/rates.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/scalar.hpp"
#include "wdiv/stats.hpp"

namespace wdiv {

/// 50 significant digits; the vanishing-eigenvalue runs need λ down to ~1e-15
/// relative to the largest eigenvalue.
using HighPrecision = boost::multiprecision::cpp_bin_float_50;

inline constexpr double kCholeskyTolerance = 1e-12;
inline constexpr double kConditionBound = 1e12;
inline constexpr int kMaxCovarianceRedraws = 10;
inline constexpr double kSingularFractionLimit = 0.05;
inline constexpr double kBoundSlack = 1e-9;

enum class VhatMode { exact, perturbed };

/// How V̂_T is produced from V: V itself, or V + c·T^{−1/2}·W.
struct VhatSpec {
  VhatMode mode{VhatMode::exact};
  double scale{0};

  friend bool operator==(const VhatSpec&, const VhatSpec&) = default;
};

/// "exact" or "perturbed:c".
inline VhatSpec parse_vhat(std::string_view text) {
  if (text == "exact") return {};
  constexpr std::string_view prefix = "perturbed:";
  if (text.starts_with(prefix)) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double c = 0;
    try {
      c = std::stod(rest, &used);
    } catch (...) {
      used = 0;
    }
    if (used == rest.size() && !rest.empty() && std::isfinite(c) && c >= 0) return {VhatMode::perturbed, c};
  }
  throw Error(ErrorCode::parse_error, "--vhat expects 'exact' or 'perturbed:c' with c >= 0, got '" +
                                          std::string(text) + "'");
}

inline std::string to_string(const VhatSpec& v) {
  if (v.mode == VhatMode::exact) return "exact";
  std::string c = std::to_string(v.scale);
  c.erase(c.find_last_not_of('0') + 1);
  if (c.back() == '.') c.pop_back();
  return "perturbed:" + c;
}

/// θ̄, V and the V̂ rule of the simulated estimator.
template <typename Real = double>
class EstimatorModel {
 public:
  /// Throws cholesky_failure unless V is symmetric with Cholesky pivots above
  /// the tolerance.
  EstimatorModel(std::vector<Real> theta_bar, dense::Matrix<Real> v, VhatSpec vhat = {})
      : theta_bar_(std::move(theta_bar)), v_(std::move(v)), vhat_(vhat) {
    if (v_.rows() != theta_bar_.size() || v_.cols() != theta_bar_.size()) {
      throw Error(ErrorCode::dimension_mismatch, "V must be p x p with p = dim(theta_bar)");
    }
    for (std::size_t i = 0; i < v_.rows(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (v_(i, j) != v_(j, i)) throw Error(ErrorCode::cholesky_failure, "V is not symmetric");
      }
    }
    auto l = dense::cholesky(v_, Real(kCholeskyTolerance));
    if (!l) throw Error(ErrorCode::cholesky_failure, "Cholesky factorization of V failed");
    chol_ = std::move(*l);
  }

  static EstimatorModel from_exact(std::span<const Scalar> theta_bar, const Covariance& v, VhatSpec vhat = {}) {
    std::vector<Real> tb;
    for (const auto& s : theta_bar) tb.push_back(to_real<Real>(s));
    dense::Matrix<Real> m(v.dim(), v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) {
      for (std::size_t j = 0; j < v.dim(); ++j) m(i, j) = to_real<Real>(v.matrix()(i, j));
    }
    return EstimatorModel(std::move(tb), std::move(m), vhat);
  }

  std::size_t dim() const noexcept { return theta_bar_.size(); }
  const std::vector<Real>& theta_bar() const noexcept { return theta_bar_; }
  const dense::Matrix<Real>& v() const noexcept { return v_; }
  const dense::Matrix<Real>& cholesky_factor() const noexcept { return chol_; }
  const VhatSpec& vhat() const noexcept { return vhat_; }

 private:
  std::vector<Real> theta_bar_;
  dense::Matrix<Real> v_;
  dense::Matrix<Real> chol_;
  VhatSpec vhat_;
};

template <typename Real>
struct Estimate {
  std::vector<Real> theta_hat;
  std::vector<Real> deviation;  ///< θ̂ − θ̄, computed directly rather than by subtraction
  dense::Matrix<Real> v_hat;
};

/// θ̂ = θ̄ + T^{−1/2}·L·z for given normals z; V̂ = V.
template <typename Real>
Estimate<Real> estimate_from_normals(const EstimatorModel<Real>& model, std::uint64_t t, std::span<const Real> z) {
  using std::sqrt;
  if (t < 1) throw Error(ErrorCode::invalid_argument, "T must be at least 1");
  const std::size_t p = model.dim();
  if (z.size() != p) throw Error(ErrorCode::dimension_mismatch, "need one normal per parameter");
  const Real root_t = sqrt(Real(t));
  Estimate<Real> out;
  out.deviation.assign(p, Real(0));
  out.theta_hat = model.theta_bar();
  const auto& l = model.cholesky_factor();
  for (std::size_t i = 0; i < p; ++i) {
    Real s(0);
    for (std::size_t k = 0; k <= i; ++k) s += l(i, k) * z[k];
    out.deviation[i] = s / root_t;
    out.theta_hat[i] += out.deviation[i];
  }
  out.v_hat = model.v();
  return out;
}

/// V + c·T^{−1/2}·W with W symmetric standard normal, redrawn until the
/// Cholesky factorization succeeds.
template <typename Real, typename Rng>
dense::Matrix<Real> perturbed_covariance(const dense::Matrix<Real>& v, double c, std::uint64_t t, Rng& rng) {
  using std::sqrt;
  std::normal_distribution<double> normal;
  const std::size_t p = v.rows();
  const Real step = Real(c) / sqrt(Real(t));
  for (int attempt = 0; attempt < kMaxCovarianceRedraws; ++attempt) {
    dense::Matrix<Real> out = v;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const Real w = Real(normal(rng)) * step;
        out(i, j) += w;
        if (i != j) out(j, i) += w;
      }
    }
    if (dense::cholesky(out, Real(kCholeskyTolerance))) return out;
  }
  throw Error(ErrorCode::cholesky_failure, "perturbed covariance stayed non-SPD after " +
                                               std::to_string(kMaxCovarianceRedraws) + " redraws");
}

template <typename Real, typename Rng>
Estimate<Real> draw_estimate(const EstimatorModel<Real>& model, std::uint64_t t, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<Real> z(model.dim());
  for (auto& v : z) v = Real(normal(rng));
  Estimate<Real> out = estimate_from_normals<Real>(model, t, z);
  if (model.vhat().mode == VhatMode::perturbed) {
    out.v_hat = perturbed_covariance(model.v(), model.vhat().scale, t, rng);
  }
  return out;
}

/// g and its Jacobian converted to floats once, in deviation coordinates.
template <typename Real = double>
class NumericSystem {
 public:
  NumericSystem() = default;
  explicit NumericSystem(const RestrictionSystem& sys) {
    const RestrictionSystem centred = recenter(sys);
    p_ = centred.p();
    for (const auto& s : sys.theta_bar) theta_bar_.push_back(to_real<Real>(s));
    for (const auto& gl : centred.g) {
      g_.emplace_back(gl);
      for (std::size_t j = 0; j < p_; ++j) jac_.emplace_back(gl.partial_derivative(j));
    }
  }

  std::size_t p() const noexcept { return p_; }
  std::size_t q() const noexcept { return g_.size(); }
  const std::vector<Real>& theta_bar() const noexcept { return theta_bar_; }

  std::vector<Real> g(std::span<const Real> u) const {
    std::vector<Real> out;
    out.reserve(g_.size());
    for (const auto& gl : g_) out.push_back(gl(u));
    return out;
  }

  dense::Matrix<Real> jacobian(std::span<const Real> u) const {
    dense::Matrix<Real> out(q(), p_);
    for (std::size_t i = 0; i < q(); ++i) {
      for (std::size_t j = 0; j < p_; ++j) out(i, j) = jac_[i * p_ + j](u);
    }
    return out;
  }

  std::vector<Real> deviation(std::span<const Real> theta_hat) const {
    if (theta_hat.size() != p_) throw Error(ErrorCode::dimension_mismatch, "theta_hat has the wrong length");
    std::vector<Real> u(p_);
    for (std::size_t i = 0; i < p_; ++i) u[i] = theta_hat[i] - theta_bar_[i];
    return u;
  }

 private:
  std::size_t p_{0};
  std::vector<Real> theta_bar_;
  std::vector<CompiledPoly<Real>> g_;
  std::vector<CompiledPoly<Real>> jac_;
};

/// Working precision for the inner solve: doubles are widened so that the
/// factorization of an ill-conditioned G V̂ G′ keeps ~1e-12 relative accuracy.
template <typename Real>
using WaldAccum = std::conditional_t<std::is_same_v<Real, double>, long double, Real>;

/// T·g′(G V̂ G′)⁻¹g from values already evaluated. The inner matrix is
/// equilibrated by its diagonal before factorization; the condition bound
/// applies to the equilibrated matrix.
template <typename Real>
Real wald_from_values(std::span<const Real> g, const dense::Matrix<Real>& jac, const dense::Matrix<Real>& v_hat,
                      Real t) {
  using std::sqrt;
  using Acc = WaldAccum<Real>;
  const std::size_t q = g.size();
  if (jac.rows() != q || v_hat.rows() != jac.cols() || v_hat.cols() != jac.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "Wald statistic inputs disagree in size");
  }
  auto widen = [](const dense::Matrix<Real>& m) {
    dense::Matrix<Acc> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Acc(m(i, j));
    }
    return out;
  };
  dense::Matrix<Acc> b = dense::sandwich(widen(jac), widen(v_hat));
  std::vector<Acc> scale(q);
  for (std::size_t i = 0; i < q; ++i) {
    if (!(b(i, i) > Acc(0))) {
      throw Error(ErrorCode::singular_metric, "restriction " + std::to_string(i + 1) + " has a zero gradient");
    }
    scale[i] = Acc(1) / sqrt(b(i, i));
  }
  std::vector<Acc> gs(q);
  for (std::size_t i = 0; i < q; ++i) {
    gs[i] = Acc(g[i]) * scale[i];
    for (std::size_t j = 0; j < q; ++j) b(i, j) *= scale[i] * scale[j];
  }
  auto l = dense::cholesky(b, Acc(kCholeskyTolerance));
  if (!l) throw Error(ErrorCode::singular_metric, "inner matrix G V G' is numerically singular");
  Acc lo = (*l)(0, 0);
  Acc hi = lo;
  for (std::size_t i = 1; i < q; ++i) {
    lo = std::min(lo, (*l)(i, i));
    hi = std::max(hi, (*l)(i, i));
  }
  const Acc ratio = hi / lo;
  if (ratio * ratio > Acc(kConditionBound)) {
    throw Error(ErrorCode::singular_metric, "inner matrix G V G' exceeds the condition bound");
  }
  const std::vector<Acc> x = dense::cholesky_solve<Acc>(*l, gs);
  Acc w(0);
  for (std::size_t i = 0; i < q; ++i) w += gs[i] * x[i];
  return Real(Acc(t) * w);
}

template <typename Real>
Real wald_at_deviation(const NumericSystem<Real>& sys, std::span<const Real> u, const dense::Matrix<Real>& v_hat,
                       std::uint64_t t) {
  const std::vector<Real> g = sys.g(u);
  return wald_from_values<Real>(g, sys.jacobian(u), v_hat, Real(t));
}

/// W_T at θ̂. Throws singular_metric rather than regularizing.
template <typename Real>
Real wald_statistic(std::span<const Real> theta_hat, const dense::Matrix<Real>& v_hat, const NumericSystem<Real>& sys,
                    std::uint64_t t) {
  const std::vector<Real> u = sys.deviation(theta_hat);
  return wald_at_deviation<Real>(sys, u, v_hat, t);
}

inline double wald_statistic(std::span<const double> theta_hat, const dense::Matrix<double>& v_hat,
                             const RestrictionSystem& sys, std::uint64_t t) {
  return wald_statistic<double>(theta_hat, v_hat, NumericSystem<double>(sys), t);
}

/// T(w²+y²)(x²+z²)/(w²+x²+y²+z²) for θ̂ = (x, y, z, w): the Wald statistic of
/// the restrictions xy = xw = yz = 0 with V̂ = I, where it is defined.
inline double closed_form_example1(std::span<const double> theta_hat, std::uint64_t t) {
  if (theta_hat.size() != 4) throw Error(ErrorCode::dimension_mismatch, "closed form needs (x, y, z, w)");
  const double x = theta_hat[0];
  const double y = theta_hat[1];
  const double z = theta_hat[2];
  const double w = theta_hat[3];
  return static_cast<double>(t) * (w * w + y * y) * (x * x + z * z) / (w * w + x * x + y * y + z * z);
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written to
/// per-index slots; the first exception by index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  std::size_t best = n;
  std::exception_ptr first;
  for (unsigned w = 0; w < workers; ++w) {
    if (errors[w] && error_index[w] < best) {
      best = error_index[w];
      first = errors[w];
    }
  }
  if (first) std::rethrow_exception(first);
}

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1U : hw;
}

/// Everything the divergence experiment needs, built once from exact inputs.
struct SimulationPlan {
  RestrictionSystem system;
  FraldVerdict verdict;
  RateReport rates;
  EstimatorModel<double> model;
  NumericSystem<double> original;     ///< g as given
  NumericSystem<double> transformed;  ///< S·g in echelon order
  std::vector<double> beta;           ///< β_l as floats
  double beta_bar{0};
};

inline SimulationPlan make_plan(const RestrictionSystem& sys, const Covariance& v, VhatSpec vhat = {},
                                std::size_t rank_trials = kDefaultRankTrials, std::uint64_t seed = 42) {
  sys.validate();
  FraldVerdict verdict = frald_check(sys, rank_trials, seed);
  RateReport rates = rate_report(verdict, v);
  EstimatorModel<double> model = EstimatorModel<double>::from_exact(sys.theta_bar, v, vhat);
  NumericSystem<double> original(sys);
  NumericSystem<double> transformed(verdict.transformed);
  std::vector<double> beta;
  for (const auto& b : rates.beta) beta.push_back(b.get_d());
  const double beta_bar = rates.beta_bar.get_d();
  return SimulationPlan{sys,
                        std::move(verdict),
                        std::move(rates),
                        std::move(model),
                        std::move(original),
                        std::move(transformed),
                        std::move(beta),
                        beta_bar};
}

/// Quantities attached to one draw through the echelonized restrictions.
struct ScaledDraw {
  std::vector<double> eigen;  ///< λ̄_l of Σ̄_T = Δ_T G_S V̂ G_S′ Δ_T, descending
  double mu{0};               ///< min_i [T^{(s̄_i+1)/2}(Sg)_i]² / max λ̃
};

inline ScaledDraw scaled_quantities(const SimulationPlan& plan, std::span<const double> u,
                                    const dense::Matrix<double>& v_hat, std::uint64_t t) {
  const std::size_t q = plan.transformed.q();
  const double td = static_cast<double>(t);
  const auto& degrees = plan.verdict.echelon.row_degrees;
  const std::vector<double> gs = plan.transformed.g(u);
  dense::Matrix<double> jac = plan.transformed.jacobian(u);
  for (std::size_t i = 0; i < q; ++i) {
    const double d = std::pow(td, 0.5 * degrees[i]);
    for (std::size_t j = 0; j < jac.cols(); ++j) jac(i, j) *= d;
  }
  ScaledDraw out;
  dense::Matrix<double> sigma = dense::sandwich(jac, v_hat);
  out.eigen = dense::symmetric_eigenvalues(sigma);

  for (std::size_t i = 0; i < q; ++i) {
    const double d = std::pow(td, 0.5 * plan.beta[i]);
    for (std::size_t j = 0; j < jac.cols(); ++j) jac(i, j) *= d;
  }
  const double lambda_max = dense::symmetric_eigenvalues(dense::sandwich(jac, v_hat)).front();
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q; ++i) {
    const double v = std::pow(td, 0.5 * (degrees[i] + 1.0)) * gs[i];
    smallest = std::min(smallest, v * v);
  }
  out.mu = smallest / lambda_max;
  return out;
}

struct SimResult {
  std::vector<std::uint64_t> t_grid;
  std::size_t reps{0};
  std::uint64_t seed{0};
  double beta_bar{0};
  std::vector<std::vector<double>> wald_samples;  ///< per T, successful draws in replication order
  std::vector<std::vector<std::vector<double>>> eig_trajectories;  ///< per T, per draw, λ̄ descending
  std::vector<std::vector<double>> mu_samples;
  std::vector<std::size_t> singular_counts;
  std::vector<std::size_t> bound_violations;
  std::vector<double> median_wald;
  std::vector<double> median_wald_over_t;
  std::vector<double> median_mu;
  std::vector<std::vector<double>> median_scaled_eigs;  ///< per T, median of T^{β_l}·λ̄_l
  double median_log_slope{0};
  double slope_stderr{0};

  double singular_fraction(std::size_t i) const {
    return reps == 0 ? 0.0 : static_cast<double>(singular_counts[i]) / static_cast<double>(reps);
  }
  double max_singular_fraction() const {
    double m = 0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) m = std::max(m, singular_fraction(i));
    return m;
  }
  bool exceeds_failure_threshold() const { return max_singular_fraction() > kSingularFractionLimit; }
  std::size_t total_bound_violations() const {
    std::size_t n = 0;
    for (auto v : bound_violations) n += v;
    return n;
  }
};

inline void check_grid(const std::vector<std::uint64_t>& t_grid, std::size_t min_points) {
  if (t_grid.size() < min_points) {
    throw Error(ErrorCode::invalid_argument, "grid needs at least " + std::to_string(min_points) + " points");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 1) throw Error(ErrorCode::invalid_argument, "grid values must be >= 1");
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) throw Error(ErrorCode::invalid_argument, "grid must be strictly increasing");
  }
}

inline constexpr std::size_t kMinReps = 200;
inline constexpr std::size_t kMinGridPoints = 4;

/// Median W_T per T and the log-log slope, with μ_T, the lower bound W >= T^β̄·μ_T and
/// the scaled eigenvalues recorded for each draw.
inline SimResult divergence_experiment(const SimulationPlan& plan, const std::vector<std::uint64_t>& t_grid,
                                       std::size_t reps, std::uint64_t seed, unsigned workers = 1) {
  check_grid(t_grid, kMinGridPoints);
  if (reps < kMinReps) throw Error(ErrorCode::invalid_argument, "need at least " + std::to_string(kMinReps) + " reps");
  const std::size_t q = plan.transformed.q();

  SimResult out;
  out.t_grid = t_grid;
  out.reps = reps;
  out.seed = seed;
  out.beta_bar = plan.beta_bar;
  for (const std::uint64_t t : t_grid) {
    struct Slot {
      std::optional<double> wald;
      ScaledDraw scaled;
    };
    std::vector<Slot> slots(reps);
    parallel_for(reps, workers, [&](std::size_t rep) {
      auto rng = substream(seed, t, rep);
      const Estimate<double> est = draw_estimate(plan.model, t, rng);
      Slot& slot = slots[rep];
      try {
        slot.wald = wald_at_deviation<double>(plan.original, est.deviation, est.v_hat, t);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_metric) throw;
        return;
      }
      slot.scaled = scaled_quantities(plan, est.deviation, est.v_hat, t);
    });

    const double td = static_cast<double>(t);
    const double lift = std::pow(td, plan.beta_bar);
    std::vector<double> wald;
    std::vector<std::vector<double>> eig;
    std::vector<double> mu;
    std::size_t singular = 0;
    std::size_t violations = 0;
    for (auto& s : slots) {
      if (!s.wald) {
        ++singular;
        continue;
      }
      if (*s.wald < lift * s.scaled.mu - kBoundSlack) ++violations;
      wald.push_back(*s.wald);
      eig.push_back(std::move(s.scaled.eigen));
      mu.push_back(s.scaled.mu);
    }

    std::vector<double> over_t;
    for (double w : wald) over_t.push_back(w / td);
    std::vector<double> scaled_medians;
    for (std::size_t l = 0; l < q; ++l) {
      std::vector<double> col;
      for (const auto& e : eig) col.push_back(std::pow(td, plan.beta[l]) * e[l]);
      scaled_medians.push_back(median(std::move(col)));
    }
    out.median_wald.push_back(median(wald));
    out.median_wald_over_t.push_back(median(std::move(over_t)));
    out.median_mu.push_back(median(mu));
    out.median_scaled_eigs.push_back(std::move(scaled_medians));
    out.wald_samples.push_back(std::move(wald));
    out.eig_trajectories.push_back(std::move(eig));
    out.mu_samples.push_back(std::move(mu));
    out.singular_counts.push_back(singular);
    out.bound_violations.push_back(violations);
  }

  std::vector<double> ts(t_grid.begin(), t_grid.end());
  for (double m : out.median_wald) {
    if (!(m > 0)) throw Error(ErrorCode::no_convergence, "median Wald statistic is not positive; cannot fit a slope");
  }
  const LinearFit fit = log_log_fit(ts, out.median_wald);
  out.median_log_slope = fit.slope;
  out.slope_stderr = fit.slope_stderr;
  return out;
}

/// Medians over replications of T^{β_l}·λ_l per grid point.
struct EigenTrajectory {
  std::vector<std::uint64_t> t_grid;
  std::vector<double> beta;
  std::vector<std::vector<double>> medians;  ///< [T][l]
};

/// Σ̄_T = Δ_T G_S V̂ G_S′ Δ_T along the grid, eigenvalue l rescaled by T^{β_l}
/// with β from the plan's rate report.
inline EigenTrajectory scaled_eigen_trajectory(const SimulationPlan& plan, const std::vector<std::uint64_t>& t_grid,
                                               std::size_t reps, std::uint64_t seed, unsigned workers = 1) {
  check_grid(t_grid, 2);
  if (reps == 0) throw Error(ErrorCode::invalid_argument, "need at least one replication");
  EigenTrajectory out;
  out.t_grid = t_grid;
  out.beta = plan.beta;
  const std::size_t q = plan.transformed.q();
  for (const std::uint64_t t : t_grid) {
    std::vector<std::vector<double>> eig(reps);
    parallel_for(reps, workers, [&](std::size_t rep) {
      auto rng = substream(seed, t, rep);
      const Estimate<double> est = draw_estimate(plan.model, t, rng);
      eig[rep] = scaled_quantities(plan, est.deviation, est.v_hat, t).eigen;
    });
    std::vector<double> med;
    for (std::size_t l = 0; l < q; ++l) {
      std::vector<double> col;
      for (const auto& e : eig) col.push_back(std::pow(static_cast<double>(t), plan.beta[l]) * e[l]);
      med.push_back(median(std::move(col)));
    }
    out.medians.push_back(std::move(med));
  }
  return out;
}

/// Eigenvalues of the unscaled B(T^{−1/2}z, Û_T) = G·Û_T·G′ with z ~ N(0, I),
/// eigenvalue l multiplied by T^{β_l}. Û_T = U, or U + c·T^{−1/2}·AA′/p with A
/// standard normal so that a semidefinite U stays semidefinite. Evaluated in
/// 50-digit arithmetic.
inline EigenTrajectory unscaled_eigen_trajectory(const RestrictionSystem& sys, const Covariance& u, VhatSpec mode,
                                                 const std::vector<Rational>& beta,
                                                 const std::vector<std::uint64_t>& t_grid, std::size_t reps,
                                                 std::uint64_t seed, unsigned workers = 1) {
  using Real = HighPrecision;
  check_grid(t_grid, 2);
  if (reps == 0) throw Error(ErrorCode::invalid_argument, "need at least one replication");
  if (beta.size() != sys.q()) throw Error(ErrorCode::dimension_mismatch, "one exponent per restriction");
  if (u.dim() != sys.p()) throw Error(ErrorCode::dimension_mismatch, "covariance does not match the parameter count");
  const NumericSystem<Real> numeric(sys);
  const std::size_t p = sys.p();
  const std::size_t q = sys.q();
  dense::Matrix<Real> base(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) base(i, j) = to_real<Real>(u.matrix()(i, j));
  }

  EigenTrajectory out;
  out.t_grid = t_grid;
  for (const auto& b : beta) out.beta.push_back(b.get_d());
  for (const std::uint64_t t : t_grid) {
    const Real root_t = sqrt(Real(t));
    std::vector<std::vector<double>> scaled(reps);
    parallel_for(reps, workers, [&](std::size_t rep) {
      auto rng = substream(seed, t, rep);
      std::normal_distribution<double> normal;
      std::vector<Real> dev(p);
      for (auto& d : dev) d = Real(normal(rng)) / root_t;
      dense::Matrix<Real> uhat = base;
      if (mode.mode == VhatMode::perturbed) {
        dense::Matrix<Real> a(p, p);
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < p; ++j) a(i, j) = Real(normal(rng));
        }
        const dense::Matrix<Real> w = a * a.transpose();
        const Real step = Real(mode.scale) / (root_t * Real(p));
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < p; ++j) uhat(i, j) += step * w(i, j);
        }
      }
      const dense::Matrix<Real> b = dense::sandwich(numeric.jacobian(dev), uhat);
      const std::vector<Real> eig = dense::symmetric_eigenvalues(b, Real(1e-40));
      std::vector<double> row(q);
      for (std::size_t l = 0; l < q; ++l) {
        row[l] = static_cast<double>(eig[l] * pow(Real(t), Real(out.beta[l])));
      }
      scaled[rep] = std::move(row);
    });
    std::vector<double> med;
    for (std::size_t l = 0; l < q; ++l) {
      std::vector<double> col;
      for (const auto& s : scaled) col.push_back(s[l]);
      med.push_back(median(std::move(col)));
    }
    out.medians.push_back(std::move(med));
  }
  return out;
}

struct VanishingResult {
  std::size_t k{0};              ///< first index (1-based) with m_k(U) > m_k
  std::vector<Degree> m;         ///< generic m_k
  std::vector<Degree> m_u;       ///< m_k(U)
  std::vector<Rational> beta;    ///< (m_l − m_{l−1})/2 from the generic degrees
  EigenTrajectory trajectory;
};

inline constexpr std::size_t kGenericCovarianceSamples = 5;

/// For a covariance whose degree profile exceeds the generic one, tracks
/// T^{β_l}·λ_l(T^{−1/2}y, Û_T) with β from the generic degrees.
inline VanishingResult vanishing_rate_experiment(const RestrictionSystem& sys, const Covariance& u, VhatSpec mode,
                                                 const std::vector<std::uint64_t>& t_grid, std::size_t reps,
                                                 std::uint64_t seed, unsigned workers = 1,
                                                 std::size_t generic_samples = kGenericCovarianceSamples) {
  VanishingResult out;
  out.m = generic_degrees(sys, generic_samples, seed);
  out.m_u = degree_profile(sys, u);
  for (std::size_t k = 0; k < out.m.size(); ++k) {
    if (out.m_u[k] > out.m[k]) {
      out.k = k + 1;
      break;
    }
  }
  if (out.k == 0) {
    throw Error(ErrorCode::precondition_unmet, "m_k(U) equals the generic m_k for every k; nothing vanishes");
  }
  out.beta = unscaled_rate_exponents(out.m);
  out.trajectory = unscaled_eigen_trajectory(sys, u, mode, out.beta, t_grid, reps, seed, workers);
  return out;
}

}  // namespace wdiv
