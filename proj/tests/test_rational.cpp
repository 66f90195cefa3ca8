#include "doctest.h"

#include <stdexcept>

#include "superhedge/rational.hpp"

using namespace superhedge;

TEST_SUITE("rational") {

TEST_CASE("construction normalizes") {
  Rational r(6, -4);
  CHECK(r.num() == -3);
  CHECK(r.den() == 2);
  CHECK(Rational(0, 7) == Rational(0));
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic is exact") {
  Rational a(1, 3), b(1, 6);
  CHECK(a + b == Rational(1, 2));
  CHECK(a - b == Rational(1, 6));
  CHECK(a * b == Rational(1, 18));
  CHECK(a / b == Rational(2));
  CHECK(-a == Rational(-1, 3));
  Rational acc;
  for (int i = 0; i < 10; ++i) acc += Rational(1, 10);
  CHECK(acc == Rational(1));
}

TEST_CASE("ordering uses cross multiplication") {
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(-1, 3));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(7, 2) > Rational(3));
}

TEST_CASE("parse accepts integers, fractions and decimals") {
  CHECK(Rational::parse("12") == Rational(12));
  CHECK(Rational::parse("-7/2") == Rational(-7, 2));
  CHECK(Rational::parse("0.45") == Rational(9, 20));
  CHECK(Rational::parse("-.5") == Rational(-1, 2));
  CHECK(Rational::parse("3/6") == Rational(1, 2));
  CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("a"), std::invalid_argument);
  CHECK_THROWS_AS(Rational::parse("1.2.3"), std::invalid_argument);
}

TEST_CASE("rational_from_double recovers short decimals") {
  CHECK(rational_from_double(0.45) == Rational(9, 20));
  CHECK(rational_from_double(-2.5) == Rational(-5, 2));
  CHECK(rational_from_double(3.0) == Rational(3));
}

TEST_CASE("rat_solve handles square and overdetermined systems") {
  RatMatrix a = {{Rational(1), Rational(1)}, {Rational(1), Rational(-1)}};
  auto x = rat_solve(a, {Rational(3), Rational(1)});
  REQUIRE(x.has_value());
  CHECK((*x)[0] == Rational(2));
  CHECK((*x)[1] == Rational(1));

  // consistent overdetermined
  RatMatrix b = {{Rational(1)}, {Rational(2)}, {Rational(3)}};
  auto y = rat_solve(b, {Rational(2), Rational(4), Rational(6)});
  REQUIRE(y.has_value());
  CHECK((*y)[0] == Rational(2));

  // inconsistent
  auto z = rat_solve(b, {Rational(2), Rational(4), Rational(7)});
  CHECK(!z.has_value());
}

TEST_CASE("rat_rank and rat_det") {
  RatMatrix m = {{Rational(1), Rational(2)}, {Rational(2), Rational(4)}};
  CHECK(rat_rank(m) == 1);
  CHECK(rat_det(m) == Rational(0));
  RatMatrix id = {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
  CHECK(rat_det(id) == Rational(1));
}

}  // TEST_SUITE
