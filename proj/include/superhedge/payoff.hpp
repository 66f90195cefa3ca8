#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/set_function.hpp"

namespace superhedge {

enum class Scaling { none, sqrt_n };

struct SeparablePartition;

// European payoff F of the terminal sum, with optional sqrt(N) scaling and
// optional structure declarations.  Declarations are certified before any
// fast path relies on them.
struct Payoff {
  std::string kind{"custom"};
  int dim{0};  // 0 means any dimension
  Scaling scaling{Scaling::none};
  std::optional<Modularity> declared_modularity;
  bool declared_convex{false};
  std::shared_ptr<const SeparablePartition> partition;
  std::function<double(const std::vector<double>&)> fn;

  double operator()(const std::vector<double>& s) const { return fn(s); }

  Payoff with_scaling(Scaling sc) const {
    Payoff p = *this;
    p.scaling = sc;
    return p;
  }
};

struct SeparablePartition {
  std::vector<std::vector<int>> blocks;  // disjoint, union = {0..d-1}
  std::vector<Payoff> components;        // one per block
};

inline double evaluate(const Payoff& p, const std::vector<double>& terminal_sum, int rounds) {
  if (p.scaling == Scaling::sqrt_n) {
    if (rounds < 1) throw Error(ErrorCode::bad_params, "sqrt_n scaling needs rounds >= 1");
    const double inv = 1.0 / std::sqrt(static_cast<double>(rounds));
    std::vector<double> scaled(terminal_sum.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = terminal_sum[i] * inv;
    return p.fn(scaled);
  }
  return p.fn(terminal_sum);
}

namespace payoffs {

inline Payoff max_option(double strike, Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "max_option";
  p.scaling = scaling;
  p.declared_modularity = Modularity::submodular;
  p.declared_convex = true;
  p.fn = [strike](const std::vector<double>& s) {
    double m = s[0];
    for (double v : s) m = std::max(m, v);
    return std::max(m - strike, 0.0);
  };
  return p;
}

inline Payoff min_option(double strike, Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "min_option";
  p.scaling = scaling;
  p.declared_modularity = Modularity::supermodular;
  p.fn = [strike](const std::vector<double>& s) {
    double m = s[0];
    for (double v : s) m = std::min(m, v);
    return std::max(m - strike, 0.0);
  };
  return p;
}

inline double butterfly_leg(double s) {
  return std::max(0.0, s + 0.5) - 2.0 * std::max(0.0, s - 0.5) + std::max(0.0, s - 1.5);
}

inline Payoff butterfly(Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "butterfly";
  p.dim = 1;
  p.scaling = scaling;
  p.fn = [](const std::vector<double>& s) { return butterfly_leg(s[0]); };
  return p;
}

// Ridge option: a butterfly profile in s1 whose breakpoints shift with |s2|.
inline Payoff cone(Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "cone";
  p.dim = 2;
  p.scaling = scaling;
  p.fn = [](const std::vector<double>& s) {
    const double a = std::abs(s[1]);
    if (s[0] < -0.5 + a) return 0.0;
    if (s[0] < 0.5) return s[0] - (-0.5 + a);
    if (s[0] < 1.5 - a) return (1.5 - a) - s[0];
    return 0.0;
  };
  return p;
}

inline Payoff double_butterfly(Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "double_butterfly";
  p.dim = 2;
  p.scaling = scaling;
  p.declared_modularity = Modularity::modular;
  p.fn = [](const std::vector<double>& s) { return butterfly_leg(s[0]) + butterfly_leg(s[1]); };
  auto part = std::make_shared<SeparablePartition>();
  part->blocks = {{0}, {1}};
  part->components = {butterfly(scaling), butterfly(scaling)};
  p.partition = part;
  return p;
}

inline Payoff linear(std::vector<double> weights, double offset = 0.0,
                     Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "linear";
  p.dim = static_cast<int>(weights.size());
  p.scaling = scaling;
  p.declared_modularity = Modularity::modular;
  p.declared_convex = true;
  auto part = std::make_shared<SeparablePartition>();
  for (int k = 0; k < p.dim; ++k) {
    part->blocks.push_back({k});
    Payoff comp;
    comp.kind = "linear";
    comp.dim = 1;
    comp.scaling = scaling;
    comp.declared_modularity = Modularity::modular;
    comp.declared_convex = true;
    const double wk = weights[k];
    const double off = k == 0 ? offset : 0.0;
    comp.fn = [wk, off](const std::vector<double>& s) { return off + wk * s[0]; };
    part->components.push_back(std::move(comp));
  }
  p.partition = part;
  p.fn = [w = std::move(weights), offset](const std::vector<double>& s) {
    double acc = offset;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * s[i];
    return acc;
  };
  return p;
}

// Piecewise-linear 1-d table: linear between knots, clamped outside.
inline Payoff table1d(std::vector<double> knots, std::vector<double> values,
                      Scaling scaling = Scaling::none) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw Error(ErrorCode::bad_params, "table1d needs matching knots/values, at least two");
  if (!std::is_sorted(knots.begin(), knots.end()))
    throw Error(ErrorCode::bad_params, "table1d knots must be sorted");
  Payoff p;
  p.kind = "table1d";
  p.dim = 1;
  p.scaling = scaling;
  p.fn = [k = std::move(knots), v = std::move(values)](const std::vector<double>& s) {
    double x = s[0];
    if (x <= k.front()) return v.front();
    if (x >= k.back()) return v.back();
    auto it = std::upper_bound(k.begin(), k.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - k.begin());
    double t = (x - k[hi - 1]) / (k[hi] - k[hi - 1]);
    return v[hi - 1] + t * (v[hi] - v[hi - 1]);
  };
  return p;
}

// Piecewise-multilinear table on a tensor lattice: linear interpolation on
// each cell, clamped outside the grid.  values is row-major with the last
// axis fastest.
inline Payoff lattice_table(std::vector<std::vector<double>> axes, std::vector<double> values,
                            Scaling scaling = Scaling::none) {
  if (axes.empty()) throw Error(ErrorCode::bad_params, "lattice table needs at least one axis");
  std::size_t expected = 1;
  for (const auto& axis : axes) {
    if (axis.size() < 2 || !std::is_sorted(axis.begin(), axis.end()))
      throw Error(ErrorCode::bad_params, "each axis needs at least two sorted knots");
    expected *= axis.size();
  }
  if (values.size() != expected)
    throw Error(ErrorCode::bad_params, "lattice table needs one value per grid point");
  Payoff p;
  p.kind = "table";
  p.dim = static_cast<int>(axes.size());
  p.scaling = scaling;
  p.fn = [axes = std::move(axes), values = std::move(values)](const std::vector<double>& s) {
    const std::size_t d = axes.size();
    std::vector<std::size_t> cell(d);
    std::vector<double> frac(d);
    for (std::size_t k = 0; k < d; ++k) {
      const auto& ax = axes[k];
      double x = std::clamp(s[k], ax.front(), ax.back());
      auto it = std::upper_bound(ax.begin(), ax.end(), x);
      std::size_t hi = std::min<std::size_t>(ax.size() - 1,
                                             static_cast<std::size_t>(it - ax.begin()));
      if (hi == 0) hi = 1;
      cell[k] = hi - 1;
      frac[k] = (x - ax[hi - 1]) / (ax[hi] - ax[hi - 1]);
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const bool up = (corner >> k) & 1u;
        w *= up ? frac[k] : 1.0 - frac[k];
        flat = flat * axes[k].size() + cell[k] + (up ? 1 : 0);
      }
      if (w != 0.0) acc += w * values[flat];
    }
    return acc;
  };
  return p;
}

inline Payoff custom(std::function<double(const std::vector<double>&)> fn, int dim = 0,
                     std::optional<Modularity> declared = std::nullopt, bool convex = false,
                     Scaling scaling = Scaling::none) {
  Payoff p;
  p.kind = "custom";
  p.dim = dim;
  p.scaling = scaling;
  p.declared_modularity = declared;
  p.declared_convex = convex;
  p.fn = std::move(fn);
  return p;
}

}  // namespace payoffs

// Returns the declared partition after spot-checking that it reproduces the
// payoff at random points.
inline const SeparablePartition& separable_decompose(const Payoff& p, int dim,
                                                     std::uint64_t seed = 20240601) {
  if (!p.partition) throw Error(ErrorCode::not_separable, "payoff has no declared partition");
  const auto& part = *p.partition;
  std::vector<int> seen(dim, 0);
  for (const auto& block : part.blocks)
    for (int axis : block) {
      if (axis < 0 || axis >= dim)
        throw Error(ErrorCode::validation_failed, "partition axis out of range");
      seen[axis]++;
    }
  for (int c : seen)
    if (c != 1) throw Error(ErrorCode::validation_failed, "blocks must partition the axes");
  if (part.components.size() != part.blocks.size())
    throw Error(ErrorCode::validation_failed, "one component per block required");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 32; ++trial) {
    std::vector<double> s(dim);
    for (double& v : s) v = u(rng);
    double whole = p.fn(s);
    double sum = 0.0;
    for (std::size_t k = 0; k < part.blocks.size(); ++k) {
      std::vector<double> proj;
      for (int axis : part.blocks[k]) proj.push_back(s[axis]);
      sum += part.components[k].fn(proj);
    }
    if (std::abs(whole - sum) > 1e-9 * std::max(1.0, std::abs(whole)))
      throw Error(ErrorCode::validation_failed, "partition disagrees with payoff evaluator");
  }
  return part;
}

}  // namespace superhedge
