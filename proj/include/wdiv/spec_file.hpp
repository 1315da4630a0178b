#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/poly_matrix.hpp"
#include "wdiv/poly_parse.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/rates.hpp"
#include "wdiv/restriction.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

// Restriction spec files, one directive per line:
//
//   # comment (anywhere after '#')
//   vars x y z w                    required, first directive
//   theta_bar 0 0 1 1               one exact scalar per variable
//   g x*y; x*w; y*z                 ';'-separated polynomials, may repeat
//   V identity                      default when V is absent
//   V                               followed by p lines "row <scalars>"
//   V psd                           as above, accepting a singular limit
//   d 2                             optional radicand for sqrt() entries
//
// Scalars are whitespace-free constant expressions, e.g. 7/10*sqrt(2) or 0.1.

struct SpecFile {
  std::vector<std::string> var_names;
  std::vector<Scalar> theta_bar;
  std::vector<MultiPoly> g;
  std::optional<ScalarMatrix> v;  ///< nullopt means the identity
  bool v_semidefinite{false};
  std::int64_t d{0};

  RestrictionSystem system() const { return RestrictionSystem{var_names, theta_bar, g}; }

  ScalarMatrix v_matrix() const { return v ? *v : ScalarMatrix::identity(var_names.size()); }

  Covariance covariance() const {
    return Covariance(v_matrix(), v_semidefinite ? Definiteness::semidefinite : Definiteness::positive);
  }

  friend bool operator==(const SpecFile& l, const SpecFile& r) {
    return l.var_names == r.var_names && l.theta_bar == r.theta_bar && l.g == r.g && l.v_matrix() == r.v_matrix() &&
           l.v_semidefinite == r.v_semidefinite && l.d == r.d;
  }
};

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  ///< 1-based
};

inline std::vector<Token> split_ws(std::string_view line, std::size_t from) {
  std::vector<Token> out;
  std::size_t i = from;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({std::string(line.substr(start, i - start)), start + 1});
  }
  return out;
}

inline bool valid_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return s != "sqrt";
}

inline void check_radicand(std::int64_t& d, std::int64_t found, bool declared, std::size_t line, std::size_t column) {
  if (found == 0) return;
  if (d == 0 && !declared) {
    d = found;
  } else if (found != d) {
    throw ParseError(line, column, "sqrt(" + std::to_string(found) + ") conflicts with radicand " + std::to_string(d));
  }
}

inline std::int64_t scalar_radicand(const Scalar& s) { return s.is_rational() ? 0 : s.radicand(); }

}  // namespace detail

/// Parses spec text. Syntax errors carry line and column; shape errors throw
/// dimension_mismatch and a covariance outside the admissible set non_spd_V.
inline SpecFile parse_spec_text(std::string_view text) {
  SpecFile spec;
  bool have_vars = false;
  bool have_theta = false;
  bool have_v = false;
  bool have_d = false;
  std::size_t v_line = 0;
  std::vector<std::vector<Scalar>> rows;
  std::size_t rows_expected = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    auto tokens = detail::split_ws(line, 0);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string& key = tokens.front().text;
    auto fail = [&](std::size_t column, const std::string& msg) { throw ParseError(line_no, column, msg); };

    if (rows_expected > 0 && key != "row") {
      fail(tokens.front().column, "expected 'row' (" + std::to_string(rows_expected) + " more V rows)");
    }
    if (key != "vars" && !have_vars) fail(tokens.front().column, "'vars' must come first");

    if (key == "vars") {
      if (have_vars) fail(tokens.front().column, "duplicate 'vars'");
      if (tokens.size() < 2) fail(tokens.front().column + key.size(), "'vars' needs at least one name");
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (!detail::valid_identifier(tokens[i].text)) fail(tokens[i].column, "bad variable name '" + tokens[i].text + "'");
        for (const auto& prev : spec.var_names) {
          if (prev == tokens[i].text) fail(tokens[i].column, "duplicate variable '" + tokens[i].text + "'");
        }
        spec.var_names.push_back(tokens[i].text);
      }
      have_vars = true;
    } else if (key == "theta_bar") {
      if (have_theta) fail(tokens.front().column, "duplicate 'theta_bar'");
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        spec.theta_bar.push_back(parse_scalar(tokens[i].text, line_no, tokens[i].column));
        detail::check_radicand(spec.d, detail::scalar_radicand(spec.theta_bar.back()), have_d, line_no,
                               tokens[i].column);
      }
      if (spec.theta_bar.size() != spec.var_names.size()) {
        throw Error(ErrorCode::dimension_mismatch, "line " + std::to_string(line_no) + ": theta_bar has " +
                                                       std::to_string(spec.theta_bar.size()) + " entries for " +
                                                       std::to_string(spec.var_names.size()) + " variables");
      }
      have_theta = true;
    } else if (key == "g") {
      const std::size_t body = tokens.front().column - 1 + key.size();
      std::size_t start = body;
      bool any = false;
      for (std::size_t i = body; i <= line.size(); ++i) {
        if (i < line.size() && line[i] != ';') continue;
        std::string_view piece = line.substr(start, i - start);
        const std::size_t lead = piece.find_first_not_of(" \t");
        if (lead == std::string_view::npos) {
          if (i < line.size()) fail(start + 1, "empty restriction");
        } else {
          piece.remove_prefix(lead);
          while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back()))) piece.remove_suffix(1);
          const std::size_t column = start + lead + 1;
          detail::PolyParser parser(piece, spec.var_names, line_no, column);
          spec.g.push_back(parser.parse());
          detail::check_radicand(spec.d, parser.radicand(), have_d, line_no, column);
          any = true;
        }
        start = i + 1;
      }
      if (!any) fail(tokens.front().column + 1, "'g' needs at least one polynomial");
    } else if (key == "V") {
      if (have_v) fail(tokens.front().column, "duplicate 'V'");
      have_v = true;
      v_line = line_no;
      if (tokens.size() == 2 && tokens[1].text == "identity") {
        spec.v.reset();
      } else if (tokens.size() == 1 || (tokens.size() == 2 && tokens[1].text == "psd")) {
        spec.v_semidefinite = tokens.size() == 2;
        rows_expected = spec.var_names.size();
      } else {
        fail(tokens[1].column, "expected 'V identity', 'V' or 'V psd'");
      }
    } else if (key == "row") {
      if (rows_expected == 0) fail(tokens.front().column, "'row' outside a V block");
      std::vector<Scalar> row;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        row.push_back(parse_scalar(tokens[i].text, line_no, tokens[i].column));
        detail::check_radicand(spec.d, detail::scalar_radicand(row.back()), have_d, line_no, tokens[i].column);
      }
      if (row.size() != spec.var_names.size()) {
        throw Error(ErrorCode::dimension_mismatch, "line " + std::to_string(line_no) + ": V row has " +
                                                       std::to_string(row.size()) + " entries for " +
                                                       std::to_string(spec.var_names.size()) + " variables");
      }
      rows.push_back(std::move(row));
      --rows_expected;
    } else if (key == "d") {
      if (have_d) fail(tokens.front().column, "duplicate 'd'");
      if (tokens.size() != 2) fail(tokens.front().column, "'d' takes one integer");
      const std::string& t = tokens[1].text;
      if (t.find_first_not_of("0123456789") != std::string::npos || t.size() > 12) {
        fail(tokens[1].column, "'d' must be a positive integer");
      }
      const std::int64_t d = std::stoll(t);
      if (!is_square_free(d) || d == 1) fail(tokens[1].column, "'d' must be square-free and greater than 1");
      if (spec.d != 0 && spec.d != d) {
        fail(tokens[1].column, "'d " + t + "' conflicts with sqrt(" + std::to_string(spec.d) + ") used earlier");
      }
      spec.d = d;
      have_d = true;
    } else {
      fail(tokens.front().column, "unknown directive '" + key + "'");
    }
    if (end == text.size()) break;
  }

  if (rows_expected > 0) {
    throw ParseError(line_no, 1, "V block ended after " + std::to_string(rows.size()) + " of " +
                                     std::to_string(spec.var_names.size()) + " rows");
  }
  if (!have_vars) throw ParseError(line_no, 1, "missing 'vars'");
  if (!have_theta) throw ParseError(line_no, 1, "missing 'theta_bar'");
  if (spec.g.empty()) throw ParseError(line_no, 1, "missing 'g'");

  if (!rows.empty()) {
    const std::size_t p = spec.var_names.size();
    ScalarMatrix m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) m(i, j) = rows[i][j];
    }
    spec.v = std::move(m);
  }
  spec.system().validate();
  try {
    (void)spec.covariance();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::non_spd) throw;
    throw Error(ErrorCode::non_spd, "V (line " + std::to_string(v_line) + ") " +
                                        std::string(e.what()).substr(std::string("non_spd_V: ").size()));
  }
  return spec;
}

inline SpecFile parse_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

/// Canonical text; parse_spec_text(serialize(s)) == s.
inline std::string serialize(const SpecFile& spec) {
  std::string out = "vars";
  for (const auto& v : spec.var_names) out += " " + v;
  out += "\ntheta_bar";
  for (const auto& t : spec.theta_bar) out += " " + to_string(t);
  out += "\ng ";
  for (std::size_t l = 0; l < spec.g.size(); ++l) {
    if (l > 0) out += "; ";
    out += to_string(spec.g[l], spec.var_names);
  }
  out += "\n";
  if (!spec.v) {
    out += "V identity\n";
  } else {
    out += spec.v_semidefinite ? "V psd\n" : "V\n";
    for (std::size_t i = 0; i < spec.v->rows(); ++i) {
      out += "row";
      for (std::size_t j = 0; j < spec.v->cols(); ++j) out += " " + to_string((*spec.v)(i, j));
      out += "\n";
    }
  }
  if (spec.d != 0) out += "d " + std::to_string(spec.d) + "\n";
  return out;
}

}  // namespace wdiv
