#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wdiv/error.hpp"
#include "wdiv/rates.hpp"
#include "wdiv/report.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/simulate.hpp"
#include "wdiv/spec_file.hpp"
#include "wdiv/stats.hpp"
#include "wdiv/verify.hpp"

namespace wdiv::cli {

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kPrecondition = 3, kNumericalFailure = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::null_violated:
    case ErrorCode::non_spd:
    case ErrorCode::zero_row:
    case ErrorCode::rank_deficient_input:
    case ErrorCode::negative_t_degree:
    case ErrorCode::precondition_unmet:
    case ErrorCode::cholesky_failure:
      return kPrecondition;
    case ErrorCode::singular_metric:
    case ErrorCode::no_convergence:
      return kNumericalFailure;
    default:
      return kInvalidInput;
  }
}

struct CommonOptions {
  std::string spec_path;
  std::string json_path;
  std::uint64_t seed{42};
  std::size_t rank_trials{kDefaultRankTrials};
};

struct SimulateOptions {
  std::vector<std::uint64_t> grid{100, 1000, 10000, 100000};
  std::size_t reps{2000};
  std::string vhat{"exact"};
  unsigned workers{0};  ///< 0 picks the hardware concurrency
};

inline std::string blocks_text(const std::vector<EchelonBlock>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    out += "(" + std::to_string(b.rows) + (b.rows == 1 ? " row" : " rows") + " deg " + std::to_string(b.degree) + ")";
  }
  return out;
}

inline std::string degree_text(Degree d) { return d == kInfiniteDegree ? "inf" : std::to_string(d); }

template <typename T, typename F>
std::string list_text(const std::vector<T>& values, F&& fmt) {
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + fmt(values[i]);
  return out + ")";
}

inline std::string rational_list(const std::vector<Rational>& rs) {
  return list_text(rs, [](const Rational& r) { return r.get_str(); });
}

inline Report base_report(const std::string& command, const CommonOptions& opt, const SpecFile& spec) {
  Report r;
  r.provenance.command = command;
  r.provenance.seed = opt.seed;
  r.provenance.rank_trials = opt.rank_trials;
  r.spec = serialize(spec);
  return r;
}

inline void print_header(std::ostream& out, const std::string& command, const CommonOptions& opt, const SpecFile& spec) {
  out << command << " " << opt.spec_path << "  (p = " << spec.var_names.size() << ", q = " << spec.g.size()
      << ", seed = " << opt.seed << ")\n";
}

inline Report cmd_analyze(const SpecFile& spec, const CommonOptions& opt, std::ostream& out) {
  const RestrictionSystem sys = spec.system();
  print_header(out, "analyze", opt, spec);
  const FraldVerdict v = frald_check(sys, opt.rank_trials, opt.seed);
  const auto& names = sys.var_names;
  out << "recentred g (u = theta - theta_bar):\n";
  for (const auto& g : v.recentered.g) out << "  " << to_string(g, names) << "\n";
  out << "S =\n";
  for (std::size_t i = 0; i < v.echelon.s.rows(); ++i) {
    out << "  [";
    for (std::size_t j = 0; j < v.echelon.s.cols(); ++j) out << (j ? ", " : "") << to_string(v.echelon.s(i, j));
    out << "]\n";
  }
  out << "S*g in echelon order:\n";
  for (std::size_t i = 0; i < v.transformed.q(); ++i) {
    out << "  deg " << v.echelon.row_degrees[i] << ": " << to_string(v.transformed.g[i], names) << "\n";
  }
  out << "FRALD-T: " << (v.frald_t_holds ? "HOLDS" : "FAILS") << ", r = " << v.rank_r << ", blocks "
      << blocks_text(v.echelon.blocks) << "\n";
  Report r = base_report("analyze", opt, spec);
  r.verdict = summarize(v);
  return r;
}

inline Report cmd_rates(const SpecFile& spec, const CommonOptions& opt, std::size_t samples, std::ostream& out) {
  const RestrictionSystem sys = spec.system();
  print_header(out, "rates", opt, spec);
  const Covariance u = spec.covariance();
  const FraldVerdict v = frald_check(sys, opt.rank_trials, opt.seed);
  const RateReport rr = rate_report(v, u);
  Report r = base_report("rates", opt, spec);
  r.provenance.samples = samples;
  r.verdict = summarize(v);
  out << "FRALD-T: " << (v.frald_t_holds ? "HOLDS" : "FAILS") << ", r = " << rr.rank_r << ", blocks "
      << blocks_text(rr.blocks) << "\n";
  out << "m_k(U) = " << list_text(rr.m_u, degree_text) << "\n";
  if (samples > 0) {
    const std::vector<Degree> generic = generic_degrees(sys, samples, opt.seed);
    out << "generic m_k (min over " << samples << " random SPD U) = " << list_text(generic, degree_text) << "\n";
    for (std::size_t k = 0; k < generic.size(); ++k) {
      if (rr.m_u[k] > generic[k]) {
        out << "non-generic U: m_" << k + 1 << "(U) = " << degree_text(rr.m_u[k]) << " > m_" << k + 1 << " = "
            << degree_text(generic[k]) << "\n";
        break;
      }
    }
    r.m_generic = generic;
  }
  out << "gamma = " << rational_list(rr.gamma) << "\n";
  out << "beta = " << rational_list(rr.beta) << "\n";
  if (rr.conservative) out << "note: some graded coefficients vanish identically; beta is conservative\n";
  out << "predicted divergence exponent β̄ = " << rr.beta_bar.get_str();
  out << (rr.rank_r == rr.q ? " (no divergence predicted)\n" : "\n");
  r.rates = rr;
  return r;
}

/// Slope bands: ±0.15 when FRALD-T fails, ±0.1 around 0 in the χ² regime.
inline constexpr double kDivergenceSlopeTolerance = 0.15;
inline constexpr double kFullRankSlopeTolerance = 0.1;

inline Report cmd_simulate(const SpecFile& spec, const CommonOptions& opt, const SimulateOptions& sim,
                           std::ostream& out) {
  const RestrictionSystem sys = spec.system();
  print_header(out, "simulate", opt, spec);
  const VhatSpec vhat = parse_vhat(sim.vhat);
  const SimulationPlan plan = make_plan(sys, spec.covariance(), vhat, opt.rank_trials, opt.seed);
  const unsigned workers = sim.workers == 0 ? default_workers() : sim.workers;
  const SimResult res = divergence_experiment(plan, sim.grid, sim.reps, opt.seed, workers);

  Report r = base_report("simulate", opt, spec);
  r.provenance.grid = sim.grid;
  r.provenance.reps = sim.reps;
  r.provenance.vhat = to_string(vhat);
  r.verdict = summarize(plan.verdict);
  r.rates = plan.rates;
  const bool full_rank = plan.rates.rank_r == plan.rates.q;
  SimSummary summary = summarize(res, full_rank ? kFullRankSlopeTolerance : kDivergenceSlopeTolerance);

  out << "vhat = " << to_string(vhat) << ", reps = " << sim.reps << "\n";
  out << std::setw(10) << "T" << std::setw(16) << "median W" << std::setw(14) << "median W/T" << std::setw(14)
      << "median mu" << std::setw(12) << "singular" << std::setw(12) << "bound viol" << "\n";
  for (const auto& p : summary.points) {
    out << std::setw(10) << p.t << std::setw(16) << std::setprecision(6) << p.median_wald << std::setw(14)
        << p.median_wald_over_t << std::setw(14) << p.median_mu << std::setw(12) << p.singular_fraction
        << std::setw(12) << p.bound_violations << "\n";
  }
  out << "fitted slope of log median W on log T = " << std::setprecision(4) << summary.slope << " (stderr "
      << summary.slope_stderr << ")\n";
  out << (summary.matches ? "MATCHES" : "DOES NOT MATCH") << " prediction β̄ = " << plan.rates.beta_bar.get_str()
      << " (tolerance " << summary.tolerance << ")\n";
  if (full_rank) {
    ChiSquareCheck chi{plan.rates.q, chi_squared_median(static_cast<unsigned>(plan.rates.q)), 0};
    for (const auto& p : summary.points) {
      chi.max_relative_deviation =
          std::max(chi.max_relative_deviation, std::abs(p.median_wald - chi.median_reference) / chi.median_reference);
    }
    out << "chi-square sanity: chi2_" << chi.q << " median = " << std::setprecision(6) << chi.median_reference
        << ", max relative deviation of median W = " << std::setprecision(3) << 100 * chi.max_relative_deviation
        << "% (" << (chi.max_relative_deviation <= 0.15 ? "within" : "outside") << " 15%)\n";
    summary.chi_square = chi;
  }
  out << "bound W >= T^β̄ mu_T violations: " << res.total_bound_violations() << "\n";
  if (summary.failure_threshold_exceeded) {
    out << "singular inner matrix in " << std::setprecision(3) << 100 * res.max_singular_fraction()
        << "% of draws, above the 5% threshold\n";
  }
  r.sim = std::move(summary);
  return r;
}

inline Report cmd_verify(const SpecFile& spec, const CommonOptions& opt, std::ostream& out) {
  const RestrictionSystem sys = spec.system();
  print_header(out, "verify", opt, spec);
  VerifyOptions vo;
  vo.seed = opt.seed;
  const std::vector<CheckResult> checks = run_verify(sys, spec.v_matrix(), vo);
  for (const auto& c : checks) {
    std::string status(to_string(c.status));
    for (auto& ch : status) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    out << std::left << std::setw(32) << c.name << std::right << " " << status << "  max error " << std::setprecision(3)
        << c.max_error << " (tol " << c.tolerance << ", " << c.cases << " cases)";
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
  }
  Report r = base_report("verify", opt, spec);
  r.checks = checks;
  return r;
}

inline void write_json(const Report& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::invalid_argument, "cannot write '" + path + "'");
  f << to_json(r).dump(2) << "\n";
}

/// Full command-line entry point; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wald-test divergence analysis for polynomial restrictions"};
  app.require_subcommand(1);
  CommonOptions opt;
  SimulateOptions sim;
  std::size_t samples = 5;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", opt.spec_path, "restriction spec file")->required();
    sub->add_option("--json", opt.json_path, "write the machine-readable report here");
    sub->add_option("--seed", opt.seed, "random seed")->capture_default_str();
    sub->add_option("--rank-trials", opt.rank_trials, "random points for the rank test")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  CLI::App* analyze = app.add_subcommand("analyze", "FRALD-T check and echelon form");
  add_common(analyze);
  CLI::App* rates = app.add_subcommand("rates", "degree invariants and divergence exponents");
  add_common(rates);
  rates->add_option("--samples", samples, "random SPD covariances for the generic degrees")->capture_default_str();
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo divergence experiment");
  add_common(simulate);
  simulate->add_option("--grid", sim.grid, "sample sizes T")->delimiter(',')->capture_default_str();
  simulate->add_option("--reps", sim.reps, "replications per T")->capture_default_str();
  simulate->add_option("--vhat", sim.vhat, "exact | perturbed:c")->capture_default_str();
  simulate->add_option("--workers", sim.workers, "threads (0 = all cores)")->capture_default_str();
  CLI::App* verify = app.add_subcommand("verify", "cross-module invariant checks");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    const SpecFile spec = parse_spec(opt.spec_path);
    Report report;
    int status = kOk;
    if (analyze->parsed()) {
      report = cmd_analyze(spec, opt, out);
    } else if (rates->parsed()) {
      report = cmd_rates(spec, opt, samples, out);
    } else if (simulate->parsed()) {
      report = cmd_simulate(spec, opt, sim, out);
      if (report.sim->failure_threshold_exceeded) status = kNumericalFailure;
    } else {
      report = cmd_verify(spec, opt, out);
      for (const auto& c : *report.checks) {
        if (!c.ok()) status = kNumericalFailure;
      }
    }
    if (!opt.json_path.empty()) write_json(report, opt.json_path);
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
}

}  // namespace wdiv::cli
