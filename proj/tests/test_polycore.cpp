#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

namespace wdiv {
namespace {

using test::poly;
using test::xyzw;

TEST(Rational, ParsesIntegersFractionsAndDecimalsExactly) {
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_EQ(parse_rational("-3/4"), make_rational(-3, 4));
  EXPECT_EQ(parse_rational("0.98"), make_rational(49, 50));
  EXPECT_EQ(parse_rational(".1"), make_rational(1, 10));
  EXPECT_EQ(parse_rational("1.5e-3"), make_rational(3, 2000));
  EXPECT_EQ(parse_rational("2E2"), Rational(200));
  EXPECT_EQ(parse_rational("6/4"), make_rational(3, 2));
}

TEST(Rational, RejectsMalformedInput) {
  for (const char* bad : {"", "-", "1/", "/2", "1.2.3", "abc", "1e", "1/0x"}) {
    EXPECT_THROW(parse_rational(bad), Error) << bad;
  }
  try {
    parse_rational("1/0");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::division_by_zero);
  }
}

TEST(Scalar, SurdProductIsExact) {
  const Scalar r = Scalar::surd(make_rational(7, 10), 2);
  EXPECT_EQ(r * r, Scalar(make_rational(49, 50)));
  EXPECT_TRUE((r * r).is_rational());
  EXPECT_EQ((r * r).radicand(), 0);
}

TEST(Scalar, NormIdentityOverSqrt2) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const Rational a = random_rational(rng, 1000);
    const Rational b = random_rational(rng, 1000);
    const Scalar plus(a, b, 2);
    const Scalar minus(a, -b, 2);
    EXPECT_EQ(plus * minus, Scalar(a * a - 2 * b * b));
  }
}

TEST(Scalar, FieldAxiomsHoldOnRandomSurds) {
  std::mt19937_64 rng(5);
  auto draw = [&] { return Scalar(random_rational(rng, 50), random_rational(rng, 50), 3); };
  for (int i = 0; i < 300; ++i) {
    const Scalar a = draw();
    const Scalar b = draw();
    const Scalar c = draw();
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    if (!b.is_zero()) EXPECT_EQ((a / b) * b, a);
  }
}

TEST(Scalar, SignIsExact) {
  EXPECT_EQ(Scalar(make_rational(-7, 5), 1, 2).sign(), 1);   // −1.4 + 1.41421…
  EXPECT_EQ(Scalar(make_rational(-3, 2), 1, 2).sign(), -1);  // −1.5 + 1.41421…
  EXPECT_EQ(Scalar(0).sign(), 0);
  EXPECT_EQ(Scalar::surd(-1, 5).sign(), -1);
  EXPECT_EQ(Scalar(3, -1, 7).sign(), 1);
}

TEST(Scalar, MixingRadicandsIsAnError) {
  try {
    (void)(Scalar::surd(1, 2) + Scalar::surd(1, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::field_mismatch);
  }
  EXPECT_THROW(Scalar(0, 1, 4), Error);
  EXPECT_THROW(Scalar(1) / Scalar(0), Error);
}

TEST(Scalar, ConvertsToHighPrecision) {
  const Scalar r = Scalar::surd(make_rational(7, 10), 2);
  const HighPrecision v = to_real<HighPrecision>(r);
  EXPECT_LT(abs(v * v - HighPrecision("0.98")), HighPrecision("1e-45"));
}

TEST(MultiPoly, AddExamples) {
  EXPECT_TRUE((poly("x*y") + poly("-x*y")).is_zero());
  EXPECT_EQ(poly("x^2") + poly("x^2 + y"), poly("2*x^2 + y"));
  EXPECT_EQ(add(poly("x + 7/10*sqrt(2)*y"), poly("x - 7/10*sqrt(2)*y")), poly("2*x"));
  EXPECT_EQ((poly("x + 7/10*sqrt(2)*y") + poly("x - 7/10*sqrt(2)*y")).field(), 0);
}

TEST(MultiPoly, MulExamples) {
  EXPECT_EQ(mul(poly("x"), poly("y")), poly("x*y"));
  EXPECT_EQ(poly("1 + w") * poly("x"), poly("x + w*x"));
  EXPECT_EQ(poly("7/10*sqrt(2)") * poly("7/10*sqrt(2)"), poly("0.98"));
  EXPECT_EQ((poly("x + y^2") * poly("z^3 - 1")).total_degree(), 5U);
}

TEST(MultiPoly, ArithmeticChecksCompatibility) {
  const std::vector<std::string> ab{"a", "b"};
  try {
    (void)(poly("x") + parse_polynomial("a", ab));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
  try {
    (void)(poly("sqrt(2)*x") * poly("sqrt(3)*y"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::field_mismatch);
  }
}

TEST(MultiPoly, PartialDerivativeExamples) {
  EXPECT_EQ(poly("x*y").partial_derivative(0), poly("y"));
  EXPECT_TRUE(poly("5").partial_derivative(0).is_zero());
  EXPECT_EQ(poly("x^2*y^3").partial_derivative(1), poly("3*x^2*y^2"));
  try {
    (void)poly("x").partial_derivative(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::index_out_of_range);
  }
}

TEST(MultiPoly, ShiftOriginExamples) {
  const std::vector<Scalar> bar{0, 0, 1, 1};
  EXPECT_EQ(poly("x*w").shift_origin(bar), poly("x + x*w"));
  EXPECT_EQ(poly("y*z").shift_origin(bar), poly("y + y*z"));
  const std::vector<Scalar> zero(4);
  EXPECT_EQ(poly("x").shift_origin(zero), poly("x"));
}

TEST(MultiPoly, LowestHomogeneousPartExamples) {
  auto d = poly("x + x*w").lowest_homogeneous_part();
  EXPECT_EQ(d.low, poly("x"));
  EXPECT_EQ(d.rest, poly("x*w"));
  EXPECT_EQ(d.low_degree, 1U);

  d = MultiPoly(4).lowest_homogeneous_part();
  EXPECT_TRUE(d.low.is_zero());
  EXPECT_EQ(d.low_degree, kInfiniteDegree);

  d = poly("2*x^2*y^2 + x^4*y^2 + x^2*y^4").lowest_homogeneous_part();
  EXPECT_EQ(d.low, poly("2*x^2*y^2"));
  EXPECT_EQ(d.low_degree, 4U);
}

TEST(MultiPoly, HomogeneousComponentExamples) {
  EXPECT_EQ(poly("x + x*w").homogeneous_component(1), poly("x"));
  EXPECT_EQ(poly("x + x*w").homogeneous_component(2), poly("x*w"));
  EXPECT_TRUE(poly("x + x*w").homogeneous_component(3).is_zero());
}

TEST(MultiPoly, EvaluateExamples) {
  const std::vector<std::string> xy{"x", "y"};
  const std::vector<Scalar> p23{2, 3};
  EXPECT_EQ(parse_polynomial("x*y", xy).evaluate(p23), Scalar(6));
  const std::vector<double> p11{1.0, 1.0};
  EXPECT_DOUBLE_EQ(parse_polynomial("x^2 + y^2", xy).evaluate(p11), 2.0);
  const MultiPoly a3 = poly("w^2*x^2*y^2 + 2*w*x^2*y^2 + x^4*y^2 + x^2*y^4 + x^2*y^2*z^2 + 2*x^2*y^2*z + 2*x^2*y^2");
  const std::vector<Scalar> at{1, 1, 0, 0};
  EXPECT_EQ(a3.evaluate(at), Scalar(4));
  const CompiledPoly<double> compiled(a3);
  const std::vector<double> atd{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(compiled(atd), 4.0);
}

TEST(MultiPolyProperty, RingAxiomsOnRandomPolynomials) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + i % 4;
    const MultiPoly a = test::random_poly(n, 4, 5, rng);
    const MultiPoly b = test::random_poly(n, 4, 5, rng);
    const MultiPoly c = test::random_poly(n, 4, 5, rng);
    ASSERT_EQ(a + b, b + a);
    ASSERT_EQ(a * b, b * a);
    ASSERT_EQ((a + b) + c, a + (b + c));
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a * (b + c), a * b + a * c);
    ASSERT_TRUE((a - a).is_zero());
    if (!a.is_zero() && !b.is_zero()) ASSERT_EQ((a * b).total_degree(), a.total_degree() + b.total_degree());
  }
}

TEST(MultiPolyProperty, DecompositionReassembles) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const MultiPoly p = test::random_poly(3, 5, 6, rng);
    const auto d = p.lowest_homogeneous_part();
    ASSERT_EQ(d.low + d.rest, p);
    if (p.is_zero()) continue;
    ASSERT_TRUE(d.low.is_homogeneous());
    ASSERT_EQ(d.low.lowest_degree(), d.low_degree);
    if (!d.rest.is_zero()) ASSERT_GT(d.rest.lowest_degree(), d.low_degree);
  }
}

TEST(MultiPolyProperty, ShiftRoundTripAndEvaluation) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    const MultiPoly p = test::random_poly(3, 4, 5, rng);
    const auto bar = test::random_point(3, rng);
    std::vector<Scalar> neg;
    for (const auto& v : bar) neg.push_back(-v);
    ASSERT_EQ(p.shift_origin(bar).shift_origin(neg), p);
    const auto u = test::random_point(3, rng);
    std::vector<Scalar> sum;
    for (std::size_t k = 0; k < 3; ++k) sum.push_back(bar[k] + u[k]);
    ASSERT_EQ(p.shift_origin(bar).evaluate(u), p.evaluate(sum));
  }
}

TEST(MultiPolyProperty, DerivativeIsLinearAndObeysProductRule) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 300; ++i) {
    const MultiPoly a = test::random_poly(3, 4, 5, rng);
    const MultiPoly b = test::random_poly(3, 4, 5, rng);
    const std::size_t v = static_cast<std::size_t>(i % 3);
    ASSERT_EQ((a + b).partial_derivative(v), a.partial_derivative(v) + b.partial_derivative(v));
    ASSERT_EQ((a * b).partial_derivative(v), a.partial_derivative(v) * b + a * b.partial_derivative(v));
  }
}

TEST(PolyParse, ReportsLineAndColumn) {
  try {
    parse_polynomial("x*y + * z", xyzw(), 7, 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7U);
    EXPECT_EQ(e.column(), 3U + 6U);
  }
  EXPECT_THROW(parse_polynomial("q*x", xyzw()), ParseError);
  EXPECT_THROW(parse_polynomial("sqrt(2)*x + sqrt(3)*y", xyzw()), ParseError);
  EXPECT_THROW(parse_polynomial("", xyzw()), ParseError);
}

TEST(PolyParse, PrintedFormReparses) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 300; ++i) {
    MultiPoly p = test::random_poly(4, 4, 5, rng);
    if (i % 2 == 0) p *= Scalar(random_rational(rng, 9), random_rational(rng, 9), 2);
    const std::string text = to_string(p, xyzw());
    ASSERT_EQ(parse_polynomial(text, xyzw()), p) << text;
  }
}

TEST(PolyParse, ScalarExpressions) {
  EXPECT_EQ(parse_scalar("7/10*sqrt(2)"), Scalar::surd(make_rational(7, 10), 2));
  EXPECT_EQ(parse_scalar("0.1"), Scalar(make_rational(1, 10)));
  EXPECT_EQ(parse_scalar("1/2-3*sqrt(5)"), Scalar(make_rational(1, 2), -3, 5));
}

}  // namespace
}  // namespace wdiv
