#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wdiv/error.hpp"
#include "wdiv/poly_matrix.hpp"
#include "wdiv/poly_parse.hpp"
#include "wdiv/rates.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/scalar.hpp"
#include "wdiv/simulate.hpp"
#include "wdiv/verify.hpp"

namespace wdiv {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "1.0.0";

struct Provenance {
  std::string command;
  std::string tool_version{kToolVersion};
  std::uint64_t seed{42};
  std::size_t rank_trials{kDefaultRankTrials};
  std::vector<std::uint64_t> grid;
  std::size_t reps{0};
  std::string vhat;
  std::size_t samples{0};

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct VerdictSummary {
  std::size_t p{0};
  std::size_t q{0};
  std::size_t rank_r{0};
  bool frald_t_holds{false};
  ScalarMatrix s;
  std::vector<EchelonBlock> blocks;
  std::vector<Degree> row_degrees;
  std::vector<std::string> transformed_g;  ///< S·g in deviation coordinates

  friend bool operator==(const VerdictSummary&, const VerdictSummary&) = default;
};

inline VerdictSummary summarize(const FraldVerdict& v) {
  VerdictSummary out;
  out.p = v.recentered.p();
  out.q = v.recentered.q();
  out.rank_r = v.rank_r;
  out.frald_t_holds = v.frald_t_holds;
  out.s = v.echelon.s;
  out.blocks = v.echelon.blocks;
  out.row_degrees = v.echelon.row_degrees;
  for (const auto& g : v.transformed.g) out.transformed_g.push_back(to_string(g, v.transformed.var_names));
  return out;
}

struct SimPoint {
  std::uint64_t t{0};
  double median_wald{0};
  double median_wald_over_t{0};
  double median_mu{0};
  double singular_fraction{0};
  std::size_t bound_violations{0};
  std::vector<double> median_scaled_eigs;

  friend bool operator==(const SimPoint&, const SimPoint&) = default;
};

struct ChiSquareCheck {
  std::size_t q{0};
  double median_reference{0};
  double max_relative_deviation{0};

  friend bool operator==(const ChiSquareCheck&, const ChiSquareCheck&) = default;
};

struct SimSummary {
  std::vector<SimPoint> points;
  double slope{0};
  double slope_stderr{0};
  double predicted_exponent{0};
  double tolerance{0.15};
  bool matches{false};
  bool failure_threshold_exceeded{false};
  std::optional<ChiSquareCheck> chi_square;

  friend bool operator==(const SimSummary&, const SimSummary&) = default;
};

inline SimSummary summarize(const SimResult& r, double tolerance = 0.15) {
  SimSummary out;
  for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
    out.points.push_back({r.t_grid[i], r.median_wald[i], r.median_wald_over_t[i], r.median_mu[i],
                          r.singular_fraction(i), r.bound_violations[i], r.median_scaled_eigs[i]});
  }
  out.slope = r.median_log_slope;
  out.slope_stderr = r.slope_stderr;
  out.predicted_exponent = r.beta_bar;
  out.tolerance = tolerance;
  out.matches = std::abs(r.median_log_slope - r.beta_bar) <= tolerance;
  out.failure_threshold_exceeded = r.exceeds_failure_threshold();
  return out;
}

struct Report {
  Provenance provenance;
  std::string spec;  ///< canonical spec text
  std::optional<VerdictSummary> verdict;
  std::optional<RateReport> rates;
  std::optional<std::vector<Degree>> m_generic;
  std::optional<SimSummary> sim;
  std::optional<std::vector<CheckResult>> checks;

  friend bool operator==(const Report&, const Report&) = default;
};

namespace json_io {

inline Json rational(const Rational& r) { return r.get_str(); }

inline Rational rational(const Json& j) {
  if (!j.is_string()) throw Error(ErrorCode::parse_error, "expected a rational string");
  return parse_rational(j.get<std::string>());
}

/// Rationals as "num/den"; surds as {"a": "...", "b": "...", "d": n}.
inline Json scalar(const Scalar& s) {
  if (s.is_rational()) return rational(s.rational_part());
  Json j;
  j["a"] = rational(s.rational_part());
  j["b"] = rational(s.surd_part());
  j["d"] = s.radicand();
  return j;
}

inline Scalar scalar(const Json& j) {
  if (j.is_string()) return Scalar(rational(j));
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "expected a scalar");
  return Scalar(rational(j.at("a")), rational(j.at("b")), j.at("d").get<std::int64_t>());
}

inline Json matrix(const ScalarMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ScalarMatrix matrix(const Json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  ScalarMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw Error(ErrorCode::parse_error, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scalar(j.at(r).at(c));
  }
  return m;
}

/// kInfiniteDegree (a vanishing coefficient) is written as null.
inline Json degree(Degree d) { return d == kInfiniteDegree ? Json(nullptr) : Json(d); }
inline Degree degree(const Json& j) { return j.is_null() ? kInfiniteDegree : j.get<Degree>(); }

inline Json degrees(const std::vector<Degree>& ds) {
  Json out = Json::array();
  for (Degree d : ds) out.push_back(degree(d));
  return out;
}

inline std::vector<Degree> degrees(const Json& j) {
  std::vector<Degree> out;
  for (const auto& d : j) out.push_back(degree(d));
  return out;
}

/// Non-finite values become null.
inline Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double real(const Json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

inline Json rationals(const std::vector<Rational>& rs) {
  Json out = Json::array();
  for (const auto& r : rs) out.push_back(rational(r));
  return out;
}

inline std::vector<Rational> rationals(const Json& j) {
  std::vector<Rational> out;
  for (const auto& r : j) out.push_back(rational(r));
  return out;
}

inline Json blocks(const std::vector<EchelonBlock>& bs) {
  Json out = Json::array();
  for (const auto& b : bs) out.push_back({{"rows", b.rows}, {"degree", b.degree}});
  return out;
}

inline std::vector<EchelonBlock> blocks(const Json& j) {
  std::vector<EchelonBlock> out;
  for (const auto& b : j) out.push_back({b.at("rows").get<std::size_t>(), b.at("degree").get<Degree>()});
  return out;
}

}  // namespace json_io

inline Json to_json(const Report& r) {
  using namespace json_io;
  Json j;
  const auto& pv = r.provenance;
  j["provenance"] = {{"command", pv.command},      {"tool_version", pv.tool_version}, {"seed", pv.seed},
                     {"rank_trials", pv.rank_trials}, {"grid", pv.grid},            {"reps", pv.reps},
                     {"vhat", pv.vhat},            {"samples", pv.samples}};
  j["spec"] = r.spec;
  if (r.verdict) {
    const auto& v = *r.verdict;
    j["verdict"] = {{"p", v.p},
                    {"q", v.q},
                    {"rank_r", v.rank_r},
                    {"frald_t_holds", v.frald_t_holds},
                    {"S", matrix(v.s)},
                    {"blocks", blocks(v.blocks)},
                    {"row_degrees", v.row_degrees},
                    {"transformed_g", v.transformed_g}};
  }
  if (r.rates) {
    const auto& rr = *r.rates;
    j["rates"] = {{"q", rr.q},
                  {"rank_r", rr.rank_r},
                  {"m_u", degrees(rr.m_u)},
                  {"gamma", rationals(rr.gamma)},
                  {"beta", rationals(rr.beta)},
                  {"beta_bar", rational(rr.beta_bar)},
                  {"blocks", blocks(rr.blocks)},
                  {"row_degrees", rr.row_degrees},
                  {"indeterminate", rr.indeterminate},
                  {"conservative", rr.conservative}};
    if (r.m_generic) j["rates"]["m_generic"] = degrees(*r.m_generic);
  }
  if (r.sim) {
    const auto& s = *r.sim;
    Json points = Json::array();
    for (const auto& p : s.points) {
      Json eig = Json::array();
      for (double e : p.median_scaled_eigs) eig.push_back(real(e));
      points.push_back({{"t", p.t},
                        {"median_wald", real(p.median_wald)},
                        {"median_wald_over_t", real(p.median_wald_over_t)},
                        {"median_mu", real(p.median_mu)},
                        {"singular_fraction", p.singular_fraction},
                        {"bound_violations", p.bound_violations},
                        {"median_scaled_eigs", std::move(eig)}});
    }
    j["sim"] = {{"points", std::move(points)},
                {"slope", real(s.slope)},
                {"slope_stderr", real(s.slope_stderr)},
                {"predicted_exponent", s.predicted_exponent},
                {"tolerance", s.tolerance},
                {"matches", s.matches},
                {"failure_threshold_exceeded", s.failure_threshold_exceeded}};
    if (s.chi_square) {
      j["sim"]["chi_square"] = {{"q", s.chi_square->q},
                                {"median_reference", s.chi_square->median_reference},
                                {"max_relative_deviation", real(s.chi_square->max_relative_deviation)}};
    }
  }
  if (r.checks) {
    Json checks = Json::array();
    for (const auto& c : *r.checks) {
      checks.push_back({{"name", c.name},
                        {"status", std::string(to_string(c.status))},
                        {"max_error", real(c.max_error)},
                        {"tolerance", c.tolerance},
                        {"cases", c.cases},
                        {"detail", c.detail}});
    }
    j["checks"] = std::move(checks);
  }
  return j;
}

inline Report report_from_json(const Json& j) {
  using namespace json_io;
  Report r;
  const Json& pv = j.at("provenance");
  r.provenance.command = pv.at("command").get<std::string>();
  r.provenance.tool_version = pv.at("tool_version").get<std::string>();
  r.provenance.seed = pv.at("seed").get<std::uint64_t>();
  r.provenance.rank_trials = pv.at("rank_trials").get<std::size_t>();
  r.provenance.grid = pv.at("grid").get<std::vector<std::uint64_t>>();
  r.provenance.reps = pv.at("reps").get<std::size_t>();
  r.provenance.vhat = pv.at("vhat").get<std::string>();
  r.provenance.samples = pv.at("samples").get<std::size_t>();
  r.spec = j.at("spec").get<std::string>();
  if (j.contains("verdict")) {
    const Json& v = j.at("verdict");
    VerdictSummary s;
    s.p = v.at("p").get<std::size_t>();
    s.q = v.at("q").get<std::size_t>();
    s.rank_r = v.at("rank_r").get<std::size_t>();
    s.frald_t_holds = v.at("frald_t_holds").get<bool>();
    s.s = matrix(v.at("S"));
    s.blocks = blocks(v.at("blocks"));
    s.row_degrees = v.at("row_degrees").get<std::vector<Degree>>();
    s.transformed_g = v.at("transformed_g").get<std::vector<std::string>>();
    r.verdict = std::move(s);
  }
  if (j.contains("rates")) {
    const Json& v = j.at("rates");
    RateReport rr;
    rr.q = v.at("q").get<std::size_t>();
    rr.rank_r = v.at("rank_r").get<std::size_t>();
    rr.m_u = degrees(v.at("m_u"));
    rr.gamma = rationals(v.at("gamma"));
    rr.beta = rationals(v.at("beta"));
    rr.beta_bar = rational(v.at("beta_bar"));
    rr.blocks = blocks(v.at("blocks"));
    rr.row_degrees = v.at("row_degrees").get<std::vector<Degree>>();
    rr.indeterminate = v.at("indeterminate").get<std::vector<bool>>();
    rr.conservative = v.at("conservative").get<bool>();
    r.rates = std::move(rr);
    if (v.contains("m_generic")) r.m_generic = degrees(v.at("m_generic"));
  }
  if (j.contains("sim")) {
    const Json& v = j.at("sim");
    SimSummary s;
    for (const auto& p : v.at("points")) {
      SimPoint pt;
      pt.t = p.at("t").get<std::uint64_t>();
      pt.median_wald = real(p.at("median_wald"));
      pt.median_wald_over_t = real(p.at("median_wald_over_t"));
      pt.median_mu = real(p.at("median_mu"));
      pt.singular_fraction = p.at("singular_fraction").get<double>();
      pt.bound_violations = p.at("bound_violations").get<std::size_t>();
      for (const auto& e : p.at("median_scaled_eigs")) pt.median_scaled_eigs.push_back(real(e));
      s.points.push_back(std::move(pt));
    }
    s.slope = real(v.at("slope"));
    s.slope_stderr = real(v.at("slope_stderr"));
    s.predicted_exponent = v.at("predicted_exponent").get<double>();
    s.tolerance = v.at("tolerance").get<double>();
    s.matches = v.at("matches").get<bool>();
    s.failure_threshold_exceeded = v.at("failure_threshold_exceeded").get<bool>();
    if (v.contains("chi_square")) {
      const Json& c = v.at("chi_square");
      s.chi_square = ChiSquareCheck{c.at("q").get<std::size_t>(), c.at("median_reference").get<double>(),
                                    real(c.at("max_relative_deviation"))};
    }
    r.sim = std::move(s);
  }
  if (j.contains("checks")) {
    std::vector<CheckResult> checks;
    for (const auto& c : j.at("checks")) {
      CheckResult cr;
      cr.name = c.at("name").get<std::string>();
      const auto status = c.at("status").get<std::string>();
      if (status == "pass") {
        cr.status = CheckStatus::pass;
      } else if (status == "fail") {
        cr.status = CheckStatus::fail;
      } else if (status == "skip") {
        cr.status = CheckStatus::skip;
      } else {
        throw Error(ErrorCode::parse_error, "unknown check status '" + status + "'");
      }
      cr.max_error = real(c.at("max_error"));
      cr.tolerance = c.at("tolerance").get<double>();
      cr.cases = c.at("cases").get<std::size_t>();
      cr.detail = c.at("detail").get<std::string>();
      checks.push_back(std::move(cr));
    }
    r.checks = std::move(checks);
  }
  return r;
}

}  // namespace wdiv
