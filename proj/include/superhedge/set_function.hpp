#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/linalg.hpp"
#include "superhedge/move_set.hpp"
#include "superhedge/rational.hpp"

namespace superhedge {

constexpr double kModularityEps = 1e-9;

// Real-valued function on the subsets of {0..d-1}, stored over bitmasks.
struct SetFunction {
  int d{0};
  std::vector<double> values;  // size 1 << d

  SetFunction() = default;
  SetFunction(int dim, std::vector<double> v) : d(dim), values(std::move(v)) {
    if (values.size() != (std::size_t{1} << d))
      throw Error(ErrorCode::bad_params, "set function table must have 2^d entries");
    for (double x : values)
      if (!std::isfinite(x)) throw Error(ErrorCode::bad_params, "non-finite set function value");
  }

  double operator()(unsigned mask) const { return values[mask]; }

  SetFunction negated() const {
    SetFunction g = *this;
    for (double& v : g.values) v = -v;
    return g;
  }
};

enum class Modularity { submodular, supermodular, modular, neither };

inline const char* to_string(Modularity m) {
  switch (m) {
    case Modularity::submodular: return "submodular";
    case Modularity::supermodular: return "supermodular";
    case Modularity::modular: return "modular";
    case Modularity::neither: return "neither";
  }
  return "?";
}

// Exhaustive pair test: compares f(A+i) + f(A+j) against f(A) + f(A+i+j)
// for all A and i != j outside A.
inline Modularity classify_modularity(const SetFunction& f, double eps = kModularityEps) {
  bool sub_ok = true, super_ok = true;
  const unsigned n = 1u << f.d;
  for (unsigned mask = 0; mask < n; ++mask) {
    for (int i = 0; i < f.d; ++i) {
      if (mask & (1u << i)) continue;
      for (int j = i + 1; j < f.d; ++j) {
        if (mask & (1u << j)) continue;
        double delta = f(mask | (1u << i)) + f(mask | (1u << j)) - f(mask) -
                       f(mask | (1u << i) | (1u << j));
        if (delta < -eps) sub_ok = false;
        if (delta > eps) super_ok = false;
        if (!sub_ok && !super_ok) return Modularity::neither;
      }
    }
  }
  if (sub_ok && super_ok) return Modularity::modular;
  return sub_ok ? Modularity::submodular : Modularity::supermodular;
}

// Nested chain of sets with convex weights reconstructing a point of the
// cube: sum_j weights[j] * 1_{sets[j]} == s.  Coordinate ties break by
// ascending index so the chain is deterministic.
template <class T>
struct LovaszChain {
  std::vector<unsigned> sets;  // d+1 masks, sets[0] == 0, sets[d] == full
  std::vector<T> weights;      // d+1 nonnegative weights summing to one
};

template <class T>
LovaszChain<T> lovasz_chain(const std::vector<T>& s) {
  const int d = static_cast<int>(s.size());
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s[b] < s[a]; });
  LovaszChain<T> chain;
  chain.sets.resize(d + 1);
  chain.weights.resize(d + 1);
  unsigned mask = 0;
  chain.sets[0] = 0;
  for (int j = 0; j < d; ++j) {
    mask |= 1u << order[j];
    chain.sets[j + 1] = mask;
  }
  chain.weights[0] = T(1) - s[order[0]];
  for (int j = 1; j < d; ++j) chain.weights[j] = s[order[j - 1]] - s[order[j]];
  chain.weights[d] = s[order[d - 1]];
  return chain;
}

inline double lovasz_extension(const SetFunction& f, const std::vector<double>& s) {
  auto chain = lovasz_chain(s);
  double acc = 0.0;
  for (std::size_t j = 0; j < chain.sets.size(); ++j)
    acc += chain.weights[j] * f(chain.sets[j]);
  return acc;
}

inline double lovasz_extension(const SetFunction& f, const RatVec& s) {
  auto chain = lovasz_chain(s);
  double acc = 0.0;
  for (std::size_t j = 0; j < chain.sets.size(); ++j)
    acc += chain.weights[j].to_double() * f(chain.sets[j]);
  return acc;
}

// Concave closure at s: LP max sum_A alpha_A f(A) subject to
// sum alpha_A 1_A = s, sum alpha_A = 1, alpha >= 0, solved by enumerating
// basic feasible solutions.  Oracle-grade; not on any pricing hot path.
inline double concave_closure_value(const SetFunction& f, const std::vector<double>& s,
                                    bool maximize = true) {
  const int d = f.d;
  const unsigned cols = 1u << d;
  const int rows = d + 1;
  // The chain solution is always feasible, so start from its value.
  double best = lovasz_extension(f, s);
  std::vector<int> idx(rows);
  for (int i = 0; i < rows; ++i) idx[i] = i;
  while (true) {
    Matrix m(rows, rows);
    std::vector<double> b(rows);
    for (int c = 0; c < rows; ++c) {
      unsigned mask = static_cast<unsigned>(idx[c]);
      for (int r = 0; r < d; ++r) m(r, c) = (mask >> r) & 1u ? 1.0 : 0.0;
      m(d, c) = 1.0;
    }
    for (int r = 0; r < d; ++r) b[r] = s[r];
    b[d] = 1.0;
    if (auto alpha = solve_linear(m, b)) {
      bool feasible = true;
      for (double a : *alpha) feasible &= a >= -1e-9;
      if (feasible) {
        double val = 0.0;
        for (int c = 0; c < rows; ++c) val += (*alpha)[c] * f(static_cast<unsigned>(idx[c]));
        if (maximize ? val > best : val < best) best = val;
      }
    }
    int pos = rows - 1;
    while (pos >= 0 && idx[pos] == static_cast<int>(cols) - rows + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < rows; ++i) idx[i] = idx[i - 1] + 1;
  }
  return best;
}

inline double convex_closure_value(const SetFunction& f, const std::vector<double>& s) {
  return -concave_closure_value(f.negated(), s);
}

// Affine chart of a lattice-binomial cell: g maps [0,1]^d onto the box
// [lows, highs] with g(0) = lows, g(1) = highs, and g^{-1}(0) interior.
struct CubeEmbedding {
  RatVec lows, highs;

  int dim() const { return static_cast<int>(lows.size()); }

  static CubeEmbedding from_axes(RatVec lows, RatVec highs) {
    if (lows.size() != highs.size() || lows.empty())
      throw Error(ErrorCode::bad_params, "embedding axes mismatch");
    for (std::size_t k = 0; k < lows.size(); ++k)
      if (!(lows[k].sign() < 0 && highs[k].sign() > 0))
        throw Error(ErrorCode::bad_params, "each axis needs low < 0 < high");
    CubeEmbedding e;
    e.lows = std::move(lows);
    e.highs = std::move(highs);
    return e;
  }

  static CubeEmbedding from_move_set(const MoveSet& m) {
    if (!m.is_lattice_binomial())
      throw Error(ErrorCode::not_lattice_binomial, "move set is not a lattice binomial product");
    RatVec lows(m.dim), highs(m.dim);
    for (int k = 0; k < m.dim; ++k) {
      lows[k] = (*m.product_axes)[k][0];
      highs[k] = (*m.product_axes)[k][1];
    }
    return from_axes(std::move(lows), std::move(highs));
  }

  RatVec corner(unsigned mask) const {
    RatVec p(lows.size());
    for (std::size_t k = 0; k < lows.size(); ++k) p[k] = (mask >> k) & 1u ? highs[k] : lows[k];
    return p;
  }

  std::vector<double> corner_d(unsigned mask) const { return to_doubles(corner(mask)); }

  // Solves (1-s) low + s high = 0 per coordinate.
  RatVec g_inverse_zero() const {
    RatVec s(lows.size());
    for (std::size_t k = 0; k < lows.size(); ++k) s[k] = lows[k] / (lows[k] - highs[k]);
    return s;
  }
};

namespace detail {

inline Simplex simplex_from_masks(const CubeEmbedding& e, const MoveSet& m,
                                  const std::vector<unsigned>& masks) {
  Simplex s;
  for (unsigned mask : masks) {
    int idx = m.index_of(e.corner(mask));
    if (idx < 0)
      throw Error(ErrorCode::not_lattice_binomial, "cell corner missing from move set");
    s.vertex_indices.push_back(idx);
  }
  std::sort(s.vertex_indices.begin(), s.vertex_indices.end());
  return s;
}

}  // namespace detail

// Chain simplex at s = g^{-1}(0): the closed-form maximizer for supermodular
// payoffs (and the positive-correlation simplex when d == 2).
inline Simplex chi_L(const CubeEmbedding& e, const MoveSet& m) {
  if (!m.is_lattice_binomial() || m.dim != e.dim() ||
      static_cast<std::size_t>(1) << m.dim != m.size())
    throw Error(ErrorCode::not_lattice_binomial, "chi_L needs the 2^d lattice binomial move set");
  auto chain = lovasz_chain(e.g_inverse_zero());
  return detail::simplex_from_masks(e, m, chain.sets);
}

// Mirror-image chain simplex obtained by flipping the first axis; for d == 2
// this is the negative-correlation simplex.
inline Simplex chi_minus_2d(const CubeEmbedding& e, const MoveSet& m) {
  if (e.dim() != 2) throw Error(ErrorCode::bad_params, "chi_minus_2d needs d == 2");
  if (!m.is_lattice_binomial())
    throw Error(ErrorCode::not_lattice_binomial, "move set is not a lattice binomial product");
  RatVec s = e.g_inverse_zero();
  s[0] = Rational(1) - s[0];
  auto chain = lovasz_chain(s);
  std::vector<unsigned> masks;
  for (unsigned mask : chain.sets) masks.push_back(mask ^ 1u);
  return detail::simplex_from_masks(e, m, masks);
}

// Set function of a payoff restricted to one cell: f0(A) = F(base + g0(A)).
template <class F>
SetFunction cell_set_function(F&& payoff, const std::vector<double>& base,
                              const CubeEmbedding& e) {
  const int d = e.dim();
  std::vector<double> vals(std::size_t{1} << d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::vector<double> p = e.corner_d(mask);
    for (int k = 0; k < d; ++k) p[k] += base[k];
    double v = payoff(p);
    if (!std::isfinite(v))
      throw Error(ErrorCode::evaluation_failure, "payoff not finite on cell corner");
    vals[mask] = v;
  }
  return SetFunction(d, std::move(vals));
}

enum class ProbeResult { consistent_submodular, consistent_supermodular, mixed };

// Finite-difference sign survey of the mixed second partials.  Advisory only.
template <class F>
ProbeResult mixed_partial_probe(F&& fn, const std::vector<std::vector<double>>& samples,
                                double h = 1e-4, double eps = 1e-7) {
  bool nonpos = true, nonneg = true;
  for (const auto& s : samples) {
    const int d = static_cast<int>(s.size());
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        auto at = [&](double di, double dj) {
          std::vector<double> p = s;
          p[i] += di;
          p[j] += dj;
          return fn(p);
        };
        double mixed = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        if (mixed > eps) nonpos = false;
        if (mixed < -eps) nonneg = false;
      }
    }
  }
  if (nonpos && !nonneg) return ProbeResult::consistent_submodular;
  if (nonneg && !nonpos) return ProbeResult::consistent_supermodular;
  if (nonpos && nonneg) return ProbeResult::consistent_submodular;  // flat: either fits
  return ProbeResult::mixed;
}

}  // namespace superhedge
