#pragma once

#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdiv/error.hpp"
#include "wdiv/polynomial.hpp"
#include "wdiv/scalar.hpp"

namespace wdiv {

// Polynomial text grammar:
//
//   poly    ::= ['+'|'-'] term (('+'|'-') term)*
//   term    ::= factor ('*' factor)*
//   factor  ::= number | 'sqrt(' uint ')' | ident ['^' uint]
//   number  ::= digits ['.' digits] ['/' digits]
//
// Whitespace is insignificant. Decimals are exact (0.98 is 49/50). All sqrt()
// factors in one polynomial must share a radicand.

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, std::span<const std::string> vars, std::size_t line, std::size_t column)
      : text_(text), vars_(vars), line_(line), column_(column) {}

  MultiPoly parse() {
    MultiPoly out(vars_.size());
    skip_ws();
    if (at_end()) fail("empty polynomial");
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = peek() == '-';
      ++pos_;
    }
    for (;;) {
      auto [m, c] = term();
      out.add_term(m, negative ? -c : c);
      skip_ws();
      if (at_end()) break;
      char op = peek();
      if (op != '+' && op != '-') fail(std::string("expected '+' or '-', found '") + op + "'");
      negative = op == '-';
      ++pos_;
      skip_ws();
    }
    return out;
  }

  std::int64_t radicand() const { return radicand_; }

 private:
  std::pair<Monomial, Scalar> term() {
    Monomial m(vars_.size());
    Scalar coeff(1);
    factor(m, coeff);
    for (;;) {
      skip_ws();
      if (at_end() || peek() != '*') break;
      ++pos_;
      skip_ws();
      factor(m, coeff);
    }
    return {m, coeff};
  }

  void factor(Monomial& m, Scalar& coeff) {
    if (at_end()) fail("expected a factor");
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      coeff *= Scalar(number());
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      std::string name = identifier();
      if (name == "sqrt") {
        skip_ws();
        expect('(');
        skip_ws();
        std::size_t at = pos_;
        std::int64_t n = uint_value();
        skip_ws();
        expect(')');
        if (n < 2 || !is_square_free(n)) fail_at(at, "sqrt argument must be a square-free integer > 1");
        if (radicand_ != 0 && radicand_ != n) fail_at(at, "mixed radicands in one polynomial");
        radicand_ = n;
        coeff *= Scalar::surd(1, n);
        return;
      }
      std::size_t index = vars_.size();
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == name) index = k;
      }
      if (index == vars_.size()) fail_at(start, "unknown variable '" + name + "'");
      Degree power = 1;
      skip_ws();
      if (!at_end() && peek() == '^') {
        ++pos_;
        skip_ws();
        power = static_cast<Degree>(uint_value());
      }
      m[index] += power;
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Rational number() {
    std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) ++pos_;
    if (!at_end() && peek() == '/') {
      ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    try {
      return parse_rational(text_.substr(start, pos_ - start));
    } catch (const Error& e) {
      fail_at(start, e.what());
    }
  }

  std::int64_t uint_value() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail("expected an unsigned integer");
    if (pos_ - start > 9) fail_at(start, "integer too large");
    return std::stoll(std::string(text_.substr(start, pos_ - start)));
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
    throw ParseError(line_, column_ + at, msg);
  }

  std::string_view text_;
  std::span<const std::string> vars_;
  std::size_t line_;
  std::size_t column_;
  std::size_t pos_{0};
  std::int64_t radicand_{0};
};

}  // namespace detail

/// Parses a polynomial over the named variables. `line` and `column` locate
/// the text inside a larger file for diagnostics.
inline MultiPoly parse_polynomial(std::string_view text, std::span<const std::string> vars, std::size_t line = 1,
                                  std::size_t column = 1) {
  return detail::PolyParser(text, vars, line, column).parse();
}

/// Parses a constant expression (no variables) into a scalar.
inline Scalar parse_scalar(std::string_view text, std::size_t line = 1, std::size_t column = 1) {
  MultiPoly p = parse_polynomial(text, {}, line, column);
  return p.coefficient(Monomial(0));
}

namespace detail {

inline std::string monomial_text(const Monomial& m, std::span<const std::string> vars) {
  std::string out;
  for (std::size_t k = 0; k < m.nvars(); ++k) {
    if (m[k] == 0) continue;
    if (!out.empty()) out += "*";
    out += vars[k];
    if (m[k] > 1) out += "^" + std::to_string(m[k]);
  }
  return out;
}

// Appends ±|c|·m, where c is a single rational or single surd part.
inline void append_term(std::string& out, const Rational& c, std::int64_t radicand, const std::string& mono) {
  bool negative = c < 0;
  Rational mag = abs(c);
  if (out.empty()) {
    if (negative) out += "-";
  } else {
    out += negative ? " - " : " + ";
  }
  std::string factors;
  if (radicand != 0) {
    factors = (mag == 1 ? std::string() : mag.get_str() + "*") + "sqrt(" + std::to_string(radicand) + ")";
  } else if (mag != 1 || mono.empty()) {
    factors = mag.get_str();
  }
  if (!factors.empty() && !mono.empty()) factors += "*";
  out += factors + mono;
}

}  // namespace detail

/// Renders a polynomial in the grammar accepted by parse_polynomial.
/// Terms appear from highest to lowest graded-lex order.
inline std::string to_string(const MultiPoly& p, std::span<const std::string> vars) {
  if (p.is_zero()) return "0";
  std::string out;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    std::string mono = detail::monomial_text(it->first, vars);
    const Scalar& c = it->second;
    if (c.rational_part() != 0) detail::append_term(out, c.rational_part(), 0, mono);
    if (c.surd_part() != 0) detail::append_term(out, c.surd_part(), c.radicand(), mono);
  }
  return out;
}

/// Default names x0, x1, ... for anonymous polynomials.
inline std::vector<std::string> default_var_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < n; ++k) names.push_back("x" + std::to_string(k));
  return names;
}

}  // namespace wdiv
