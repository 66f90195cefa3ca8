#include "doctest.h"

#include <cmath>
#include <random>

#include "superhedge/payoff.hpp"

using namespace superhedge;

TEST_SUITE("payoff") {

TEST_CASE("catalog values") {
  auto pmax = payoffs::max_option(1.0);
  CHECK(pmax.fn({2.0, 0.0}) == 1.0);
  auto pmin = payoffs::min_option(1.0);
  CHECK(pmin.fn({2.0, 0.0}) == 0.0);
  CHECK(payoffs::butterfly_leg(0.5) == doctest::Approx(1.0));
  auto ridge = payoffs::cone();
  CHECK(ridge.fn({0.5, 0.0}) == doctest::Approx(1.0));
  CHECK(ridge.fn({-1.0, 0.0}) == 0.0);
  CHECK(ridge.fn({2.0, 0.0}) == 0.0);
  CHECK(ridge.fn({0.0, 0.25}) == doctest::Approx(0.25));
  auto dbl = payoffs::double_butterfly();
  CHECK(dbl.fn({0.5, 0.5}) == doctest::Approx(2.0));
}

TEST_CASE("scaling consistency") {
  auto p = payoffs::max_option(1.0, Scaling::sqrt_n);
  CHECK(evaluate(p, {4.0, 0.0}, 4) == doctest::Approx(1.0));
  auto unscaled = payoffs::max_option(1.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    int n = 1 + static_cast<int>(rng() % 30);
    std::vector<double> s = {u(rng), u(rng)};
    std::vector<double> scaled = {s[0] / std::sqrt(double(n)), s[1] / std::sqrt(double(n))};
    CHECK(evaluate(p, s, n) == doctest::Approx(evaluate(unscaled, scaled, n)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(evaluate(p, {1.0, 1.0}, 0), Error);
}

TEST_CASE("separable decomposition") {
  auto dbl = payoffs::double_butterfly();
  const auto& part = separable_decompose(dbl, 2);
  REQUIRE(part.blocks.size() == 2);
  CHECK(part.blocks[0] == std::vector<int>{0});
  CHECK(part.blocks[1] == std::vector<int>{1});
  CHECK(part.components[0].fn({0.5}) == doctest::Approx(1.0));

  auto pmax = payoffs::max_option(1.0);
  CHECK_THROWS_AS(separable_decompose(pmax, 2), Error);

  // custom declared decomposition with mismatching evaluator is rejected
  Payoff bogus = payoffs::custom([](const std::vector<double>& s) { return s[0] * s[1]; }, 2);
  auto part2 = std::make_shared<SeparablePartition>();
  part2->blocks = {{0}, {1}};
  part2->components = {payoffs::custom([](const std::vector<double>& s) { return s[0]; }, 1),
                       payoffs::custom([](const std::vector<double>& s) { return s[0]; }, 1)};
  bogus.partition = part2;
  CHECK_THROWS_AS(separable_decompose(bogus, 2), Error);

  // a consistent custom declaration is accepted
  Payoff ok = payoffs::custom(
      [](const std::vector<double>& s) { return s[0] + s[1] * s[1]; }, 2);
  auto part3 = std::make_shared<SeparablePartition>();
  part3->blocks = {{0}, {1}};
  part3->components = {payoffs::custom([](const std::vector<double>& s) { return s[0]; }, 1),
                       payoffs::custom([](const std::vector<double>& s) { return s[0] * s[0]; }, 1)};
  ok.partition = part3;
  CHECK_NOTHROW(separable_decompose(ok, 2));
}

TEST_CASE("table payoff interpolation") {
  auto t = payoffs::table1d({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
  CHECK(t.fn({0.0}) == doctest::Approx(1.0));
  CHECK(t.fn({0.5}) == doctest::Approx(0.5));
  CHECK(t.fn({-2.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(payoffs::table1d({0.0}, {1.0}), Error);
  CHECK_THROWS_AS(payoffs::table1d({1.0, 0.0}, {1.0, 1.0}), Error);
}

TEST_CASE("lattice table payoff") {
  // bilinear bump peaking at the grid center
  auto t = payoffs::lattice_table({{-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}},
                                  {0, 0, 0, 0, 1, 0, 0, 0, 0});
  CHECK(t.fn({0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(t.fn({0.5, 0.0}) == doctest::Approx(0.5));
  CHECK(t.fn({0.5, 0.5}) == doctest::Approx(0.25));
  CHECK(t.fn({2.0, 2.0}) == doctest::Approx(0.0));  // clamped
  // exact at every knot
  auto t2 = payoffs::lattice_table({{0.0, 1.0}, {0.0, 1.0}}, {1, 2, 3, 4});
  CHECK(t2.fn({0.0, 0.0}) == 1.0);
  CHECK(t2.fn({0.0, 1.0}) == 2.0);
  CHECK(t2.fn({1.0, 0.0}) == 3.0);
  CHECK(t2.fn({1.0, 1.0}) == 4.0);
  CHECK_THROWS_AS(payoffs::lattice_table({{0.0, 1.0}}, {1, 2, 3}), Error);
}

TEST_CASE("linear payoff partition sums back") {
  auto lin = payoffs::linear({1.0, -2.0, 0.5}, 0.25);
  const auto& part = separable_decompose(lin, 3);
  CHECK(part.blocks.size() == 3);
  CHECK(lin.fn({1.0, 1.0, 1.0}) == doctest::Approx(-0.25));
}

}  // TEST_SUITE
