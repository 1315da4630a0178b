#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "wdiv/error.hpp"

namespace wdiv {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "7", "-3/4", "0.98", "1.5e-3" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw Error(ErrorCode::parse_error, "bad number '" + std::string(text) + "'"); };
  if (text.empty()) fail();
  std::string s(text);
  bool negative = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }
  std::string body = s.substr(pos);
  if (body.empty()) fail();

  Rational out;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    std::string num = body.substr(0, slash);
    std::string den = body.substr(slash + 1);
    auto digits = [](const std::string& v) {
      return !v.empty() && v.find_first_not_of("0123456789") == std::string::npos;
    };
    if (!digits(num) || !digits(den)) fail();
    Integer d(den, 10);
    if (d == 0) throw Error(ErrorCode::division_by_zero, "zero denominator in '" + s + "'");
    out = Rational(Integer(num, 10), d);
    out.canonicalize();
  } else {
    long exponent = 0;
    if (auto e = body.find_first_of("eE"); e != std::string::npos) {
      std::string exp = body.substr(e + 1);
      if (exp.empty() || exp.find_first_not_of("+-0123456789") != std::string::npos) fail();
      try {
        exponent = std::stol(exp);
      } catch (...) {
        fail();
      }
      body = body.substr(0, e);
    }
    std::string int_part = body;
    std::string frac_part;
    if (auto dot = body.find('.'); dot != std::string::npos) {
      int_part = body.substr(0, dot);
      frac_part = body.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty()) fail();
    if ((int_part + frac_part).find_first_not_of("0123456789") != std::string::npos) fail();
    Integer mantissa(int_part + frac_part == "" ? "0" : int_part + frac_part, 10);
    exponent -= static_cast<long>(frac_part.size());
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    out = exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
    out.canonicalize();
  }
  return negative ? Rational(-out) : out;
}

/// num/den in lowest terms.
inline Rational make_rational(long num, long den) {
  if (den == 0) throw Error(ErrorCode::division_by_zero, "zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// "num/den", or just "num" for integers.
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline bool is_square_free(std::int64_t d) {
  if (d < 1) return false;
  for (std::int64_t f = 2; f * f <= d; ++f) {
    if (d % (f * f) == 0) return false;
  }
  return true;
}

/// An element a + b·√d of ℚ(√d). Rationals are the b = 0 case, stored with
/// d = 0 so that two rationals never disagree about the field.
class Scalar {
 public:
  Scalar() = default;
  Scalar(int v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  Scalar(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  Scalar(Rational a, Rational b, std::int64_t d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
    if (b_ != 0 && !is_square_free(d_)) {
      throw Error(ErrorCode::invalid_argument, "surd radicand must be square-free and > 1, got " + std::to_string(d_));
    }
    if (d_ == 1) {
      a_ += b_;
      b_ = 0;
    }
    normalize();
  }

  static Scalar surd(Rational b, std::int64_t d) { return Scalar(0, std::move(b), d); }

  const Rational& rational_part() const noexcept { return a_; }
  const Rational& surd_part() const noexcept { return b_; }
  std::int64_t radicand() const noexcept { return d_; }

  bool is_zero() const { return a_ == 0 && b_ == 0; }
  bool is_rational() const { return b_ == 0; }

  /// Exact sign: -1, 0 or +1.
  int sign() const {
    int sa = sgn(a_);
    int sb = sgn(b_);
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a² with b²·d
    Rational lhs = a_ * a_;
    Rational rhs = b_ * b_ * d_;
    int c = cmp(lhs, rhs);
    if (c == 0) return 0;
    return c > 0 ? sa : sb;
  }

  Scalar conjugate() const { return make(a_, -b_, d_); }

  /// (a + b√d)(a − b√d) = a² − b²d.
  Rational norm() const { return a_ * a_ - b_ * b_ * d_; }

  Scalar operator-() const { return make(-a_, -b_, d_); }

  Scalar& operator+=(const Scalar& o) {
    d_ = common_field(o);
    a_ += o.a_;
    b_ += o.b_;
    normalize();
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    d_ = common_field(o);
    a_ -= o.a_;
    b_ -= o.b_;
    normalize();
    return *this;
  }
  Scalar& operator*=(const Scalar& o) {
    std::int64_t d = common_field(o);
    Rational a = a_ * o.a_ + b_ * o.b_ * d;
    Rational b = a_ * o.b_ + o.a_ * b_;
    a_ = std::move(a);
    b_ = std::move(b);
    d_ = d;
    normalize();
    return *this;
  }
  Scalar& operator/=(const Scalar& o) {
    if (o.is_zero()) throw Error(ErrorCode::division_by_zero, "scalar division by zero");
    Rational n = o.norm();
    Scalar inv = o.conjugate();
    inv.a_ /= n;
    inv.b_ /= n;
    return *this *= inv;
  }

  friend Scalar operator+(Scalar l, const Scalar& r) { return l += r; }
  friend Scalar operator-(Scalar l, const Scalar& r) { return l -= r; }
  friend Scalar operator*(Scalar l, const Scalar& r) { return l *= r; }
  friend Scalar operator/(Scalar l, const Scalar& r) { return l /= r; }

  friend bool operator==(const Scalar& l, const Scalar& r) {
    return l.a_ == r.a_ && l.b_ == r.b_ && l.d_ == r.d_;
  }

  double to_double() const {
    double v = a_.get_d();
    if (b_ != 0) v += b_.get_d() * std::sqrt(static_cast<double>(d_));
    return v;
  }

  friend std::ostream& operator<<(std::ostream& os, const Scalar& s) {
    if (s.b_ == 0) return os << s.a_.get_str();
    if (s.a_ != 0) os << s.a_.get_str() << (s.b_ > 0 ? "+" : "");
    return os << s.b_.get_str() << "*sqrt(" << s.d_ << ")";
  }

 private:
  static Scalar make(Rational a, Rational b, std::int64_t d) {
    Scalar s;
    s.a_ = std::move(a);
    s.b_ = std::move(b);
    s.d_ = d;
    s.normalize();
    return s;
  }

  std::int64_t common_field(const Scalar& o) const {
    if (b_ == 0) return o.d_;
    if (o.b_ == 0) return d_;
    if (d_ != o.d_) {
      throw Error(ErrorCode::field_mismatch,
                  "cannot combine sqrt(" + std::to_string(d_) + ") with sqrt(" + std::to_string(o.d_) + ")");
    }
    return d_;
  }

  void normalize() {
    if (b_ == 0) d_ = 0;
  }

  Rational a_{0};
  Rational b_{0};
  std::int64_t d_{0};
};

inline std::string to_string(const Scalar& s) {
  std::string out;
  if (s.is_rational()) return s.rational_part().get_str();
  if (s.rational_part() != 0) out = s.rational_part().get_str() + (s.surd_part() > 0 ? "+" : "");
  return out + s.surd_part().get_str() + "*sqrt(" + std::to_string(s.radicand()) + ")";
}

/// Converts an exact rational to a floating type. Builtin floats go through
/// GMP directly; multiprecision types are built from the decimal digits so
/// no precision is lost on the way.
template <typename Real>
Real to_real(const Rational& r) {
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<Real>(r.get_d());
  } else {
    return Real(r.get_num().get_str()) / Real(r.get_den().get_str());
  }
}

template <typename Real>
Real to_real(const Scalar& s) {
  using std::sqrt;
  Real v = to_real<Real>(s.rational_part());
  if (!s.is_rational()) {
    v += to_real<Real>(s.surd_part()) * sqrt(Real(s.radicand()));
  }
  return v;
}

}  // namespace wdiv
