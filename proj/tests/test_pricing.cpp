#include "doctest.h"

#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "superhedge/pricing.hpp"

using namespace superhedge;

namespace {

RatVec rv(std::initializer_list<int> xs) {
  RatVec v;
  for (int x : xs) v.push_back(Rational(x));
  return v;
}

MoveSet chi1() { return build_move_set({rv({1, 1}), rv({1, -1}), rv({-1, 1}), rv({-1, -1})}); }
MoveSet chi2() { return build_move_set({rv({1, 0}), rv({-1, 0}), rv({0, 1}), rv({0, -1})}); }

MoveSet product3() {
  std::vector<RatVec> prod;
  for (int a : {-1, 2})
    for (int b : {-2, 1})
      for (int c : {-1, 1}) prod.push_back(rv({a, b, c}));
  return build_move_set(prod);
}

// brute-force N-round price by direct recursion over paths (oracle)
double brute_force_price(const MoveSet& m, const Payoff& payoff, int rounds, Side side) {
  SimplexFamily fam = enumerate_simplexes(m);
  std::function<double(std::vector<double>&, int)> rec = [&](std::vector<double>& sum,
                                                             int n) -> double {
    if (n == rounds) return evaluate(payoff, sum, rounds);
    std::vector<double> vals(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
      for (int k = 0; k < m.dim; ++k) sum[k] += m.points[j][k].to_double();
      vals[j] = rec(sum, n + 1);
      for (int k = 0; k < m.dim; ++k) sum[k] -= m.points[j][k].to_double();
    }
    return single_round_price(fam, vals, side).price;
  };
  std::vector<double> zero(m.dim, 0.0);
  return rec(zero, 0);
}

// random lattice-binomial move set with small rational axis values
MoveSet random_binomial(int d, std::mt19937_64& rng) {
  std::vector<Rational> lows(d), highs(d);
  for (int k = 0; k < d; ++k) {
    lows[k] = Rational(-1 - static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 2));
    highs[k] = Rational(1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 2));
  }
  std::vector<RatVec> pts;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    RatVec p(d);
    for (int k = 0; k < d; ++k) p[k] = (mask >> k) & 1u ? highs[k] : lows[k];
    pts.push_back(p);
  }
  return build_move_set(pts);
}

// random supermodular (sign=+1) or submodular (sign=-1) payoff built from
// monotone couplings; smooth enough to certify on every cell
Payoff random_structured_payoff(int d, int sign, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> c(0.1, 1.0);
  std::vector<double> lin(d), shift(d);
  for (double& v : lin) v = u(rng);
  for (double& v : shift) v = u(rng);
  std::vector<std::vector<double>> couple(d, std::vector<double>(d, 0.0));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) couple[i][j] = sign * c(rng);
  auto fn = [lin, shift, couple, d](const std::vector<double>& s) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += lin[i] * s[i];
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        acc += couple[i][j] * std::min(s[i] + shift[i], s[j] + shift[j]);
    return acc;
  };
  return payoffs::custom(fn, d,
                         sign > 0 ? Modularity::supermodular : Modularity::submodular);
}

}  // namespace

TEST_SUITE("pricing") {

TEST_CASE("state lattice grows polynomially and dedups exactly") {
  MoveSet m = chi1();
  StateLattice lat = build_state_lattice(m, 6);
  for (int n = 0; n <= 6; ++n)
    CHECK(lat.states[n].size() == static_cast<std::size_t>((n + 1) * (n + 1)));
  // adjacency lands on the right sums
  for (int n = 0; n < 6; ++n)
    for (int node = 0; node < lat.node_count(n); ++node)
      for (std::size_t j = 0; j < m.size(); ++j) {
        const auto& from = lat.states[n][node];
        const auto& to = lat.states[n + 1][lat.advance(n, node, static_cast<int>(j))];
        for (int k = 0; k < 2; ++k) CHECK(to[k] == from[k] + m.points[j][k]);
      }
}

TEST_CASE("single round: square with max-option corner values") {
  MoveSet m = chi1();
  // values on ((1,1),(1,-1),(-1,1),(-1,-1)) for (max(s)-0)_+ at the corners
  std::vector<double> f = {1.0, 1.0, 1.0, 0.0};
  auto up = single_round_price(m, f, Side::upper);
  auto lo = single_round_price(m, f, Side::lower);
  CHECK(up.price == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lo.price == doctest::Approx(0.5).epsilon(1e-12));
  // upper attained by the anti-diagonal pair
  CHECK(std::count(up.argopt.vertex_indices.begin(), up.argopt.vertex_indices.end(), 1) == 1);
  CHECK(std::count(up.argopt.vertex_indices.begin(), up.argopt.vertex_indices.end(), 2) == 1);
}

TEST_CASE("single round: complete market and linear payoffs") {
  MoveSet m = build_move_set({rv({1, 0}), rv({0, 1}), rv({-1, -1})});
  SimplexFamily fam = enumerate_simplexes(m);
  CHECK(fam.size() == 1);
  std::vector<double> f = {0.3, -1.2, 2.0};
  CHECK(single_round_price(fam, f, Side::upper).price ==
        doctest::Approx(single_round_price(fam, f, Side::lower).price));

  MoveSet sq = chi1();
  std::vector<double> lin(4);
  for (std::size_t i = 0; i < 4; ++i)
    lin[i] = 0.7 * sq.points[i][0].to_double() - 0.3 * sq.points[i][1].to_double();
  CHECK(single_round_price(sq, lin, Side::upper).price == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(single_round_price(sq, lin, Side::lower).price == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("superreplicating strategy solves the one-shot LP") {
  MoveSet m = chi1();
  std::vector<double> constant = {0.4, 0.4, 0.4, 0.4};
  auto lp = superreplicating_strategy(m, constant);
  CHECK(lp.alpha == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(lp.holdings[0]) <= 1e-12);
  CHECK(std::abs(lp.holdings[1]) <= 1e-12);

  std::vector<double> f = {1.0, 1.0, 1.0, 0.0};
  auto lp2 = superreplicating_strategy(m, f);
  CHECK(lp2.alpha == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t i = 0; i < 4; ++i) {
    double lhs = lp2.alpha;
    for (int k = 0; k < 2; ++k) lhs += lp2.holdings[k] * m.points[i][k].to_double();
    CHECK(lhs >= f[i] - 1e-9);
  }

  // d = 1 binomial with convex payoff: alpha = I, M = (f(2)-f(-1))/3
  MoveSet bin = build_move_set({RatVec{Rational(-1)}, RatVec{Rational(2)}});
  auto convex_f = [](double x) { return x * x; };
  std::vector<double> fb = {convex_f(-1.0), convex_f(2.0)};
  auto lpb = superreplicating_strategy(bin, fb);
  SimplexFamily fam = enumerate_simplexes(bin);
  double expectation = 0.0;
  for (std::size_t j = 0; j < 2; ++j)
    expectation += fam.members[0].p[j] * fb[fam.members[0].simplex.vertex_indices[j]];
  CHECK(lpb.alpha == doctest::Approx(expectation).epsilon(1e-12));
  CHECK(lpb.holdings[0] == doctest::Approx((fb[1] - fb[0]) / 3.0).epsilon(1e-12));
}

TEST_CASE("duality: LP alpha equals family enumeration price on random instances") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int done = 0;
  while (done < 200) {
    int d = 1 + static_cast<int>(rng() % 3);
    int extra = static_cast<int>(rng() % 4);
    std::vector<RatVec> pts;
    for (int i = 0; i < d + 2 + extra; ++i) {
      RatVec p(d);
      for (int k = 0; k < d; ++k)
        p[k] = Rational(static_cast<int>(rng() % 13) - 6, 1 + static_cast<int>(rng() % 3));
      pts.push_back(p);
    }
    MoveSet m;
    try {
      m = build_move_set(pts);
    } catch (const Error&) {
      continue;
    }
    std::vector<double> f(m.size());
    for (double& v : f) v = u(rng);
    auto lp = superreplicating_strategy(m, f);
    auto sr = single_round_price(m, f, Side::upper);
    CHECK(lp.alpha == doctest::Approx(sr.price).epsilon(1e-9));
    ++done;
  }
}

TEST_CASE("backward induction matches the brute-force oracle on small games") {
  std::mt19937_64 rng(43);
  MoveSet sets[2] = {chi1(), chi2()};
  for (const MoveSet& m : sets) {
    Payoff p = payoffs::max_option(0.5);
    for (int rounds : {1, 2, 3}) {
      for (Side side : {Side::upper, Side::lower}) {
        InductionOptions opt;
        opt.side = side;
        opt.fast_path = FastPath::off;
        auto res = backward_induction(m, p, rounds, opt);
        CHECK(res.price ==
              doctest::Approx(brute_force_price(m, p, rounds, side)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("monotonicity, translation and sandwich") {
  MoveSet m = chi1();
  Payoff f = payoffs::max_option(1.0);
  Payoff g = payoffs::custom(
      [base = f.fn](const std::vector<double>& s) { return base(s) + 0.25; }, 2);
  for (Side side : {Side::upper, Side::lower}) {
    InductionOptions opt;
    opt.side = side;
    opt.fast_path = FastPath::off;
    double pf = backward_induction(m, f, 4, opt).price;
    double pg = backward_induction(m, g, 4, opt).price;
    CHECK(pg == doctest::Approx(pf + 0.25).epsilon(1e-10));
  }
  InductionOptions up, lo;
  up.side = Side::upper;
  lo.side = Side::lower;
  CHECK(backward_induction(m, f, 5, lo).price <= backward_induction(m, f, 5, up).price + 1e-12);
}

TEST_CASE("lower price is the negated upper price of the negated payoff") {
  MoveSet m = chi2();
  Payoff f = payoffs::cone();
  Payoff neg = payoffs::custom([base = f.fn](const std::vector<double>& s) { return -base(s); },
                               2);
  InductionOptions up, lo;
  up.side = Side::upper;
  up.fast_path = FastPath::off;
  lo.side = Side::lower;
  lo.fast_path = FastPath::off;
  for (int rounds : {1, 3, 5}) {
    double lower = backward_induction(m, f, rounds, lo).price;
    double upper_neg = backward_induction(m, neg, rounds, up).price;
    CHECK(lower == doctest::Approx(-upper_neg).epsilon(1e-12));
  }
}

TEST_CASE("fast path equals full search for catalog options") {
  MoveSet m = chi1();
  for (auto [payoff, rounds] : std::vector<std::pair<Payoff, int>>{
           {payoffs::max_option(1.0, Scaling::sqrt_n), 6},
           {payoffs::min_option(1.0, Scaling::sqrt_n), 6}}) {
    for (Side side : {Side::upper, Side::lower}) {
      InductionOptions fast, full;
      fast.side = full.side = side;
      fast.fast_path = FastPath::automatic;
      full.fast_path = FastPath::off;
      auto rf = backward_induction(m, payoff, rounds, fast);
      auto rs = backward_induction(m, payoff, rounds, full);
      CHECK(rf.fast_path_used);
      CHECK(rf.certification_failures == 0);
      REQUIRE(rf.values.size() == rs.values.size());
      for (std::size_t n = 0; n < rf.values.size(); ++n)
        for (std::size_t i = 0; i < rf.values[n].size(); ++i)
          CHECK(rf.values[n][i] == doctest::Approx(rs.values[n][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fast path equals full search on random structured payoffs") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 12; ++trial) {
    int d = 2 + static_cast<int>(rng() % 2);
    MoveSet m = random_binomial(d, rng);
    int sign = trial % 2 == 0 ? +1 : -1;
    Payoff p = random_structured_payoff(d, sign, rng);
    std::vector<Side> sides;
    if (d == 2) {
      sides = {Side::upper, Side::lower};
    } else {
      sides = {sign > 0 ? Side::upper : Side::lower};
    }
    for (Side side : sides) {
      InductionOptions fast, full;
      fast.side = full.side = side;
      fast.fast_path = FastPath::automatic;
      full.fast_path = FastPath::off;
      auto rf = backward_induction(m, p, 4, fast);
      auto rs = backward_induction(m, p, 4, full);
      CHECK(rf.fast_path_used);
      CHECK(rf.certification_failures == 0);
      for (std::size_t n = 0; n < rf.values.size(); ++n)
        for (std::size_t i = 0; i < rf.values[n].size(); ++i)
          CHECK(rf.values[n][i] == doctest::Approx(rs.values[n][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("certification failure falls back to the full search") {
  MoveSet m = chi1();
  // declared supermodular but actually submodular
  Payoff wrong = payoffs::custom(
      [](const std::vector<double>& s) { return std::max(s[0], s[1]); }, 2,
      Modularity::supermodular);
  InductionOptions opt;
  opt.side = Side::upper;
  auto res = backward_induction(m, wrong, 3, opt);
  CHECK(res.certification_failures > 0);
  InductionOptions off;
  off.side = Side::upper;
  off.fast_path = FastPath::off;
  CHECK(res.price == doctest::Approx(backward_induction(m, wrong, 3, off).price).epsilon(1e-12));
}

TEST_CASE("preservation: backed-up cells keep the terminal structure") {
  MoveSet m = product3();
  Payoff p = payoffs::min_option(1.0, Scaling::sqrt_n);
  InductionOptions opt;
  opt.side = Side::upper;
  opt.fast_path = FastPath::off;
  auto res = backward_induction(m, p, 4, opt);
  CubeEmbedding e = CubeEmbedding::from_move_set(m);
  std::vector<int> move_for_mask(8);
  for (unsigned mask = 0; mask < 8; ++mask) move_for_mask[mask] = m.index_of(e.corner(mask));
  for (int n = 3; n >= 0; --n) {
    for (int node = 0; node < res.lattice.node_count(n); ++node) {
      std::vector<double> cell(8);
      for (unsigned mask = 0; mask < 8; ++mask)
        cell[mask] = res.values[n + 1][res.lattice.advance(n, node, move_for_mask[mask])];
      Modularity got = classify_modularity(SetFunction(3, std::move(cell)));
      CHECK((got == Modularity::supermodular || got == Modularity::modular));
    }
  }
}

TEST_CASE("separable price equals full induction") {
  MoveSet m = chi1();
  Payoff dbl = payoffs::double_butterfly(Scaling::sqrt_n);
  for (int rounds : {1, 2, 4}) {
    for (Side side : {Side::upper, Side::lower}) {
      double split = separable_price(m, dbl, rounds, side);
      InductionOptions opt;
      opt.side = side;
      opt.fast_path = FastPath::off;
      double full = backward_induction(m, dbl, rounds, opt).price;
      CHECK(split == doctest::Approx(full).epsilon(1e-9));
    }
    // binomial blocks are complete markets: upper equals lower at every N
    CHECK(separable_price(m, dbl, rounds, Side::upper) ==
          doctest::Approx(separable_price(m, dbl, rounds, Side::lower)).epsilon(1e-12));
  }

  // random separable payoff on a product set with unequal axes
  MoveSet m2 = build_move_set({rv({-1, -2}), rv({-1, 3}), rv({2, -2}), rv({2, 3})});
  Payoff sep = payoffs::custom(
      [](const std::vector<double>& s) {
        return std::abs(s[0]) + 0.5 * s[1] * s[1];
      },
      2);
  auto part = std::make_shared<SeparablePartition>();
  part->blocks = {{0}, {1}};
  part->components = {
      payoffs::custom([](const std::vector<double>& s) { return std::abs(s[0]); }, 1),
      payoffs::custom([](const std::vector<double>& s) { return 0.5 * s[0] * s[0]; }, 1)};
  sep.partition = part;
  for (Side side : {Side::upper, Side::lower}) {
    InductionOptions opt;
    opt.side = side;
    opt.fast_path = FastPath::off;
    CHECK(separable_price(m2, sep, 4, side) ==
          doctest::Approx(backward_induction(m2, sep, 4, opt).price).epsilon(1e-9));
  }

  CHECK_THROWS_AS(separable_price(chi2(), dbl, 2, Side::upper), Error);

  // linear components price to zero
  CHECK(separable_price(chi1(), payoffs::linear({1.0, 1.0}), 3, Side::upper) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("convex reduction") {
  // {-1,0,1}^2 grid vs its corners
  std::vector<RatVec> grid;
  for (int a : {-1, 0, 1})
    for (int b : {-1, 0, 1}) grid.push_back(rv({a, b}));
  MoveSet m = build_move_set(grid);
  Payoff p = payoffs::custom(
      [](const std::vector<double>& s) { return std::abs(s[0]) + std::abs(s[1]); }, 2,
      std::nullopt, true);
  double reduced = convex_reduction_price(m, p, 3);
  InductionOptions opt;
  opt.side = Side::upper;
  opt.fast_path = FastPath::off;
  double full = backward_induction(m, p, 3, opt).price;
  CHECK(reduced == doctest::Approx(full).epsilon(1e-9));

  // d = 1: {-1, 0, 2} reduces to the binomial {-1, 2}
  MoveSet line = build_move_set({RatVec{Rational(-1)}, RatVec{Rational(0)}, RatVec{Rational(2)}});
  Payoff sq = payoffs::custom([](const std::vector<double>& s) { return s[0] * s[0]; }, 1,
                              std::nullopt, true);
  MoveSet bin = build_move_set({RatVec{Rational(-1)}, RatVec{Rational(2)}});
  double on_bin = backward_induction(bin, sq, 3, opt).price;
  CHECK(convex_reduction_price(line, sq, 3) == doctest::Approx(on_bin).epsilon(1e-9));

  // linear payoffs price to zero on both
  Payoff lin = payoffs::linear({0.7, -0.2});
  CHECK(convex_reduction_price(m, lin, 3) == doctest::Approx(0.0).epsilon(1e-10));

  // non-convex payoff is rejected
  Payoff ridge = payoffs::cone();
  CHECK_THROWS_AS(convex_reduction_price(chi1(), ridge, 3), Error);
}

TEST_CASE("correlation pricing endpoints meet the hedging prices") {
  MoveSet m = chi1();
  Payoff pmax = payoffs::max_option(1.0, Scaling::sqrt_n);
  Payoff pmin = payoffs::min_option(1.0, Scaling::sqrt_n);
  const int rounds = 20;
  InductionOptions up, lo;
  up.side = Side::upper;
  lo.side = Side::lower;
  CHECK(boyle_price(m, -1.0, pmax, rounds) ==
        doctest::Approx(backward_induction(m, pmax, rounds, up).price).epsilon(1e-9));
  CHECK(boyle_price(m, 1.0, pmax, rounds) ==
        doctest::Approx(backward_induction(m, pmax, rounds, lo).price).epsilon(1e-9));
  CHECK(boyle_price(m, 1.0, pmin, rounds) ==
        doctest::Approx(backward_induction(m, pmin, rounds, up).price).epsilon(1e-9));
  // rho = 0: plain symmetric random walk expectation, oracle by direct paths
  Payoff plain = payoffs::max_option(1.0);
  double dp = boyle_price(m, 0.0, plain, 4);
  double acc = 0.0;
  for (int path = 0; path < 256; ++path) {  // 4^4 paths
    std::vector<double> s(2, 0.0);
    int code = path;
    for (int step = 0; step < 4; ++step) {
      int mv = code % 4;
      code /= 4;
      s[0] += m.points[mv][0].to_double();
      s[1] += m.points[mv][1].to_double();
    }
    acc += plain.fn(s) / 256.0;
  }
  CHECK(dp == doctest::Approx(acc).epsilon(1e-12));

  CHECK_THROWS_AS(boyle_price(m, 1.5, pmax, 3), Error);
  CHECK_THROWS_AS(boyle_price(product3(), 0.5, pmax, 3), Error);
}

TEST_CASE("superreplication verification") {
  MoveSet m = chi1();
  for (const Payoff& p : {payoffs::max_option(1.0, Scaling::sqrt_n),
                          payoffs::min_option(1.0, Scaling::sqrt_n),
                          payoffs::double_butterfly(Scaling::sqrt_n), payoffs::cone()}) {
    InductionOptions opt;
    opt.side = Side::upper;
    auto res = backward_induction(m, p, 5, opt);
    double worst = verify_superreplication(m, res, p, 5);
    CHECK(worst >= -1e-9);
    // strict capital bump shifts the slack up by the bump
    double bumped = verify_superreplication(m, res, p, 5, res.price + 0.1);
    CHECK(bumped >= 0.1 - 1e-9);

    InductionOptions lo;
    lo.side = Side::lower;
    auto res_lo = backward_induction(m, p, 5, lo);
    CHECK(verify_superreplication(m, res_lo, p, 5) >= -1e-9);
  }
  // lower-side price certifies the negation duality
  Payoff f = payoffs::cone();
  Payoff neg = payoffs::custom([base = f.fn](const std::vector<double>& s) { return -base(s); },
                               2);
  InductionOptions lo2, up2;
  lo2.side = Side::lower;
  up2.side = Side::upper;
  double lower = backward_induction(m, f, 4, lo2).price;
  auto res_neg = backward_induction(m, neg, 4, up2);
  CHECK(lower == doctest::Approx(-res_neg.price).epsilon(1e-12));
  CHECK(verify_superreplication(m, res_neg, neg, 4) >= -1e-9);
}

TEST_CASE("square max/min converge to the known limits") {
  MoveSet m = chi1();
  Payoff pmax = payoffs::max_option(1.0, Scaling::sqrt_n);
  Payoff pmin = payoffs::min_option(1.0, Scaling::sqrt_n);
  InductionOptions up, lo;
  up.side = Side::upper;
  lo.side = Side::lower;
  up.with_strategy = lo.with_strategy = false;
  const double two_limit = 0.16663;  // 2 (phi(1) - Phi(-1))
  const double one_limit = 0.08331;
  CHECK(std::abs(backward_induction(m, pmax, 20, up).price - two_limit) < 0.01);
  CHECK(std::abs(backward_induction(m, pmax, 20, lo).price - one_limit) < 0.01);
  CHECK(std::abs(backward_induction(m, pmin, 20, up).price - one_limit) < 0.01);
  CHECK(backward_induction(m, pmin, 20, lo).price <= 1e-3);
}

}  // TEST_SUITE
