// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "wdiv/wdiv.hpp"

namespace {

using namespace wdiv;
using Clock = std::chrono::steady_clock;

std::string fixture(const std::string& name) { return std::string(WDIV_FIXTURE_DIR) + "/" + name; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// χ²_q median from the gamma series and bisection; no Boost involved.
double chi2_median(unsigned q) {
  const double s = q / 2.0;
  auto cdf = [s](double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < 1000 && term > sum * 1e-17; ++n) {
      term *= (x / 2) / (s + n);
      sum += term;
    }
    return std::exp(s * std::log(x / 2) - x / 2 - std::lgamma(s)) * sum;
  };
  double lo = 0;
  double hi = 10.0 + 4 * q;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const std::vector<std::string> kVars{"x", "y", "z", "w"};

MultiPoly poly(const std::string& text) { return parse_polynomial(text, kVars); }

struct Verdict {
  bool ok;
  std::string detail;
};

Verdict criterion1() {
  const auto start = Clock::now();
  const SpecFile spec = parse_spec(fixture("example1.spec"));
  const FraldVerdict v = frald_check(spec.system());
  const double secs = seconds_since(start);
  // Displayed echelon form: x(1+w), y(1+z) at degree 0, then xy at degree 1.
  const std::vector<MultiPoly> displayed{poly("x + x*w"), poly("y + y*z"), poly("x*y")};
  const bool blocks = v.echelon.blocks == std::vector<EchelonBlock>{{2, 0}, {1, 1}};
  const bool ok = !v.frald_t_holds && v.rank_r == 2 && blocks && v.transformed.g == displayed && secs < 1.0;
  std::ostringstream d;
  d << "FRALD-T " << (v.frald_t_holds ? "holds" : "fails") << ", r = " << v.rank_r
    << ", blocks";
  for (const auto& b : v.echelon.blocks) d << " (" << b.rows << " at deg " << b.degree << ")";
  d << ", S*g " << (v.transformed.g == displayed ? "matches" : "differs")
    << ", " << secs << " s";
  return {ok, d.str()};
}

Verdict criterion2() {
  const auto start = Clock::now();
  const SpecFile s1 = parse_spec(fixture("example1.spec"));
  const SpecFile s3 = parse_spec(fixture("example3.spec"));
  const PolyMatrix g = jacobian(recenter(s1.system()));
  const CharPolyCoeffs id = charpoly_coeffs(build_B(g, s1.covariance()));
  const CharPolyCoeffs ex3 = charpoly_coeffs(build_B(g, s3.covariance()));
  // The printed polynomial is det B = −a₃.
  const MultiPoly printed =
      poly("w^2*x^2*y^2 + 2*w*x^2*y^2 + x^4*y^2 + x^2*y^4 + x^2*y^2*z^2 + 2*x^2*y^2*z + 2*x^2*y^2");
  const bool exact = -id.a[2] == printed && printed.size() == 7 && id.m[2] == 4;
  struct Term {
    const char* monomial;
    double value;
  };
  const Term terms[] = {{"w^2*x^2*y^2", 0.01}, {"w*x^3*y^2", -0.19799}, {"w*x^2*y^3", -0.2},
                        {"w*x^2*y^2*z", -0.02}, {"x^4*y^2", 0.98},     {"x^3*y^3", 1.9799},
                        {"x^3*y^2*z", 0.19799}, {"x^2*y^4", 1},        {"x^2*y^3*z", 0.2},
                        {"x^2*y^2*z^2", 0.01}};
  const MultiPoly det3 = -ex3.a[2];
  double worst = 0;
  for (const auto& t : terms) {
    const Monomial m = poly(t.monomial).terms().begin()->first;
    worst = std::max(worst, std::abs(det3.coefficient(m).to_double() - t.value));
  }
  const bool coeffs = worst <= 1e-4 && det3.size() == std::size(terms);
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << "a3(I) " << (exact ? "exact" : "MISMATCH") << ", m3 = " << id.m[2] << ", m3(U) = " << ex3.m[2]
    << ", worst coefficient error " << worst << ", " << secs << " s";
  return {exact && ex3.m[2] == 6 && coeffs && secs < 5.0, d.str()};
}

const std::vector<std::uint64_t> kGrid{100, 1000, 10000, 100000};

Verdict criterion3(const SimResult& r, double secs) {
  const bool slope = std::abs(r.median_log_slope - 1.0) <= 0.15;
  bool band = true;
  std::ostringstream d;
  d << "slope " << r.median_log_slope << " (1 +- 0.15), median W/T";
  for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
    d << " " << r.median_wald_over_t[i];
    if (r.t_grid[i] >= 1000 && !(r.median_wald_over_t[i] >= 0.5 && r.median_wald_over_t[i] <= 2.0)) band = false;
  }
  d << " (band [0.5, 2] for T >= 1e3 " << (band ? "met" : "missed") << "), " << secs << " s";
  return {slope && band && secs < 120, d.str()};
}

Verdict criterion4() {
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (const char* name : {"linear_q1.spec", "linear_q2.spec"}) {
    const SpecFile spec = parse_spec(fixture(name));
    const SimulationPlan plan = make_plan(spec.system(), spec.covariance());
    const SimResult r = divergence_experiment(plan, kGrid, 2000, 42, 1);
    const double ref = chi2_median(static_cast<unsigned>(spec.g.size()));
    double dev = 0;
    for (double m : r.median_wald) dev = std::max(dev, std::abs(m - ref) / ref);
    ok = ok && std::abs(r.median_log_slope) <= 0.1 && dev <= 0.15;
    d << "q = " << spec.g.size() << ": slope " << r.median_log_slope << ", max deviation from chi2 median " << ref
      << " is " << 100 * dev << "%; ";
  }
  const double secs = seconds_since(start);
  d << secs << " s";
  return {ok && secs < 60, d.str()};
}

RestrictionSystem random_quadratic_system(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coef(-5, 5);
  RestrictionSystem sys{kVars, std::vector<Scalar>(4), {}};
  for (std::size_t l = 0; l < 3; ++l) {
    MultiPoly g = MultiPoly::variable(4, l) * MultiPoly::variable(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
      g += MultiPoly::variable(4, i) * Scalar(coef(rng));
      for (std::size_t j = i; j < 4; ++j) g += MultiPoly::variable(4, i) * MultiPoly::variable(4, j) * Scalar(coef(rng));
    }
    sys.g.push_back(g);
  }
  return sys;
}

Verdict criterion5() {
  const auto start = Clock::now();
  const CheckResult a = check_symmetric_identity(parse_spec(fixture("example1.spec")).system(), 20, 42);
  const CheckResult b = check_symmetric_identity(random_quadratic_system(5), 20, 42);
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << "example 1 max rel error " << a.max_error << " (" << a.cases << " cases), random degree-2 " << b.max_error << " ("
    << b.cases << " cases), tol 1e-8, " << secs << " s";
  const bool ok = a.status == CheckStatus::pass && b.status == CheckStatus::pass && a.cases == 20 && b.cases == 20 &&
                  a.max_error <= 1e-8 && b.max_error <= 1e-8 && secs < 10;
  return {ok, d.str()};
}

Verdict criterion6() {
  const SpecFile spec = parse_spec(fixture("example1.spec"));
  const CheckResult r = check_invariance(spec.system(), spec.v_matrix(), 10, 100, 42);
  std::ostringstream d;
  d << "max rel error " << r.max_error << " over " << r.cases << " draws, tol 1e-8";
  if (!r.detail.empty()) d << "; " << r.detail;
  return {r.status == CheckStatus::pass && r.max_error <= 1e-8, d.str()};
}

Verdict criterion7(const SimResult& r) {
  std::size_t draws = 0;
  std::size_t failures = 0;
  std::size_t singular = 0;
  for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
    const double lift = std::pow(static_cast<double>(r.t_grid[i]), r.beta_bar);
    for (std::size_t k = 0; k < r.wald_samples[i].size(); ++k) {
      ++draws;
      if (r.wald_samples[i][k] < lift * r.mu_samples[i][k] - 1e-9) ++failures;
    }
    singular += r.singular_counts[i];
  }
  std::ostringstream d;
  d << failures << " failures in " << draws << " draws (library count " << r.total_bound_violations() << ", "
    << singular << " draws with a singular inner matrix)";
  return {failures == 0 && r.total_bound_violations() == 0 && singular == 0, d.str()};
}

Verdict criterion8() {
  const SpecFile s3 = parse_spec(fixture("example3.spec"));
  const RestrictionSystem sys = s3.system();
  const std::vector<std::uint64_t> grid{1000, 10000, 100000};
  const VanishingResult v = vanishing_rate_experiment(sys, s3.covariance(), {}, grid, 2000, 42, 1);
  const auto& m = v.trajectory.medians;
  const bool decreasing = m[0][2] > m[1][2] && m[1][2] > m[2][2];

  std::mt19937_64 rng(9);
  const Covariance generic(random_spd(sys.p(), rng));
  const std::vector<Rational> beta = unscaled_rate_exponents(generic_degrees(sys, kGenericCovarianceSamples, 42));
  const EigenTrajectory g = unscaled_eigen_trajectory(sys, generic, {}, beta, grid, 2000, 42, 1);
  const double ratio = g.medians[2][2] / g.medians[1][2];
  std::ostringstream d;
  d << "example 3 U: T^" << v.beta[2] << " lambda3 medians " << m[0][2] << ", " << m[1][2] << ", " << m[2][2]
    << "; generic U: " << g.medians[0][2] << ", " << g.medians[1][2] << ", " << g.medians[2][2] << " (last ratio "
    << ratio << ")";
  return {v.beta[2] == Rational(2) && decreasing && ratio >= 0.5 && ratio <= 2.0, d.str()};
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

int main() {
  std::vector<Verdict> results;
  results.push_back(guarded(criterion1));
  results.push_back(guarded(criterion2));

  // Criteria 3 and 7 share the Example 1 run.
  std::optional<SimResult> ex1;
  double ex1_secs = 0;
  std::string ex1_error;
  try {
    const SpecFile spec = parse_spec(fixture("example1.spec"));
    const auto start = Clock::now();
    ex1 = divergence_experiment(make_plan(spec.system(), spec.covariance()), kGrid, 2000, 42, 1);
    ex1_secs = seconds_since(start);
  } catch (const std::exception& e) {
    ex1_error = std::string("threw: ") + e.what();
  }
  results.push_back(ex1 ? criterion3(*ex1, ex1_secs) : Verdict{false, ex1_error});
  results.push_back(guarded(criterion4));
  results.push_back(guarded(criterion5));
  results.push_back(guarded(criterion6));
  results.push_back(ex1 ? criterion7(*ex1) : Verdict{false, ex1_error});
  results.push_back(guarded(criterion8));

  bool all = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << (results[i].ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << results[i].detail << "\n";
    all = all && results[i].ok;
  }
  return all ? 0 : 1;
}
