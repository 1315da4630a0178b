#pragma once

#include <random>
#include <string>
#include <vector>

#include "wdiv/wdiv.hpp"

namespace wdiv::test {

inline const std::vector<std::string>& xyzw() {
  static const std::vector<std::string> names{"x", "y", "z", "w"};
  return names;
}

inline MultiPoly poly(const std::string& text, const std::vector<std::string>& vars = xyzw()) {
  return parse_polynomial(text, vars);
}

/// xy = xw = yz = 0 at (0, 0, 1, 1).
inline RestrictionSystem example1() {
  return RestrictionSystem{xyzw(), {Scalar(0), Scalar(0), Scalar(1), Scalar(1)},
                           {poly("x*y"), poly("x*w"), poly("y*z")}};
}

/// The covariance with sqrt(.98) = (7/10)·sqrt(2) off the diagonal.
inline ScalarMatrix example3_u() {
  const Scalar r = Scalar::surd(make_rational(7, 10), 2);
  const Scalar tenth = make_rational(1, 10);
  ScalarMatrix u = ScalarMatrix::identity(4);
  u(0, 1) = r;
  u(1, 0) = r;
  u(1, 2) = tenth;
  u(2, 1) = tenth;
  u(1, 3) = tenth;
  u(3, 1) = tenth;
  return u;
}

inline Covariance example3_covariance() { return Covariance(example3_u(), Definiteness::semidefinite); }

inline std::string fixture(const std::string& name) { return std::string(WDIV_FIXTURE_DIR) + "/" + name; }

/// Random polynomial with up to `terms` terms, degree ≤ max_degree, small
/// rational coefficients.
template <typename Rng>
MultiPoly random_poly(std::size_t nvars, Degree max_degree, std::size_t terms, Rng& rng, std::int64_t range = 9) {
  std::uniform_int_distribution<Degree> exp(0, max_degree);
  std::uniform_int_distribution<std::size_t> count(0, terms);
  MultiPoly p(nvars);
  const std::size_t n = count(rng);
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<Degree> e(nvars, 0);
    Degree budget = exp(rng);
    for (std::size_t k = 0; k < nvars && budget > 0; ++k) {
      std::uniform_int_distribution<Degree> part(0, budget);
      e[k] = part(rng);
      budget -= e[k];
    }
    p.add_term(Monomial(std::move(e)), Scalar(random_rational(rng, range)));
  }
  return p;
}

template <typename Rng>
std::vector<Scalar> random_point(std::size_t n, Rng& rng, std::int64_t range = 9) {
  std::vector<Scalar> out(n);
  for (auto& v : out) v = Scalar(random_rational(rng, range));
  return out;
}

}  // namespace wdiv::test
