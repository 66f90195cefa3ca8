#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/linalg.hpp"
#include "superhedge/move_set.hpp"
#include "superhedge/parallel.hpp"
#include "superhedge/payoff.hpp"
#include "superhedge/rational.hpp"
#include "superhedge/set_function.hpp"

namespace superhedge {

constexpr double kLpEps = 1e-9;
constexpr double kTieEps = 1e-12;

enum class Side { upper, lower };

inline const char* to_string(Side s) { return s == Side::upper ? "upper" : "lower"; }

// Reachable partial-sum states per round, deduplicated by exact rational sum.
// States within a layer are sorted lexicographically, which fixes node ids.
struct StateLattice {
  std::vector<std::vector<RatVec>> states;                // [layer][node]
  std::vector<std::vector<std::vector<double>>> coords;   // double mirror
  std::vector<std::vector<int>> next;                     // [layer][node * l + move]
  int moves_per_round{0};

  int node_count(int layer) const { return static_cast<int>(states[layer].size()); }
  int advance(int layer, int node, int move) const {
    return next[layer][static_cast<std::size_t>(node) * moves_per_round + move];
  }
};

inline StateLattice build_state_lattice(const MoveSet& m, int rounds) {
  if (rounds < 0) throw Error(ErrorCode::bad_params, "negative round count");
  const int l = static_cast<int>(m.size());
  StateLattice lat;
  lat.moves_per_round = l;
  lat.states.resize(rounds + 1);
  lat.coords.resize(rounds + 1);
  lat.next.resize(rounds);
  lat.states[0] = {RatVec(m.dim, Rational(0))};
  for (int n = 0; n < rounds; ++n) {
    std::map<RatVec, int> index;
    for (const auto& s : lat.states[n]) {
      for (const auto& mv : m.points) {
        RatVec t(m.dim);
        for (int k = 0; k < m.dim; ++k) t[k] = s[k] + mv[k];
        index.emplace(std::move(t), 0);
      }
    }
    auto& nxt = lat.states[n + 1];
    nxt.reserve(index.size());
    for (auto& [state, id] : index) {
      id = static_cast<int>(nxt.size());
      nxt.push_back(state);
    }
    lat.next[n].resize(lat.states[n].size() * l);
    for (std::size_t i = 0; i < lat.states[n].size(); ++i) {
      for (int j = 0; j < l; ++j) {
        RatVec t(m.dim);
        for (int k = 0; k < m.dim; ++k) t[k] = lat.states[n][i][k] + m.points[j][k];
        lat.next[n][i * l + j] = index.at(t);
      }
    }
  }
  for (int n = 0; n <= rounds; ++n) {
    lat.coords[n].reserve(lat.states[n].size());
    for (const auto& s : lat.states[n]) lat.coords[n].push_back(to_doubles(s));
  }
  return lat;
}

struct SingleRoundResult {
  double price{0.0};
  Simplex argopt;
  int near_ties{0};  // candidates within kTieEps of the optimum
};

// max/min over the simplex family of the vertex-measure expectation.
inline SingleRoundResult single_round_price(const SimplexFamily& family,
                                            std::span<const double> values, Side side) {
  if (family.members.empty()) throw Error(ErrorCode::bad_params, "empty simplex family");
  SingleRoundResult out;
  bool first = true;
  double best = 0.0;
  int best_idx = 0;
  int ties = 0;
  for (std::size_t c = 0; c < family.members.size(); ++c) {
    const auto& member = family.members[c];
    double acc = 0.0;
    for (std::size_t j = 0; j < member.p.size(); ++j)
      acc += member.p[j] * values[member.simplex.vertex_indices[j]];
    if (first) {
      best = acc;
      best_idx = static_cast<int>(c);
      first = false;
      continue;
    }
    if (std::abs(acc - best) <= kTieEps) {
      ++ties;
      continue;
    }
    if (side == Side::upper ? acc > best : acc < best) {
      best = acc;
      best_idx = static_cast<int>(c);
    }
  }
  out.price = best;
  out.argopt = family.members[best_idx].simplex;
  out.near_ties = ties;
  return out;
}

inline SingleRoundResult single_round_price(const MoveSet& m, std::span<const double> values,
                                            Side side) {
  auto fam = enumerate_simplexes(m);
  return single_round_price(fam, values, side);
}

struct LpResult {
  double alpha{0.0};
  std::vector<double> holdings;
};

// Minimal alpha with alpha + M.a >= f(a) for every move: solved by
// enumerating basic solutions (d+1 active constraints).  Independent of the
// simplex-family route, so it doubles as the duality oracle.
inline LpResult superreplicating_strategy(const MoveSet& m, std::span<const double> values) {
  const int d = m.dim;
  const int n = static_cast<int>(m.size());
  const auto pts = m.points_d();
  std::optional<LpResult> best;
  std::vector<int> idx(d + 1);
  for (int i = 0; i <= d; ++i) idx[i] = i;
  while (true) {
    Matrix a(d + 1, d + 1);
    std::vector<double> b(d + 1);
    for (int r = 0; r <= d; ++r) {
      a(r, 0) = 1.0;
      for (int k = 0; k < d; ++k) a(r, k + 1) = pts[idx[r]][k];
      b[r] = values[idx[r]];
    }
    if (auto x = solve_linear(a, b)) {
      bool feasible = true;
      for (int i = 0; i < n && feasible; ++i) {
        double lhs = (*x)[0];
        for (int k = 0; k < d; ++k) lhs += (*x)[k + 1] * pts[i][k];
        feasible = lhs >= values[i] - kLpEps;
      }
      if (feasible && (!best || (*x)[0] < best->alpha)) {
        LpResult r;
        r.alpha = (*x)[0];
        r.holdings.assign(x->begin() + 1, x->end());
        best = std::move(r);
      }
    }
    int pos = d;
    while (pos >= 0 && idx[pos] == n - (d + 1) + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i <= d; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (!best)
    throw Error(ErrorCode::lp_numerical_failure, "no feasible basic solution found");
  return *best;
}

enum class FastPath { off, automatic };

struct InductionOptions {
  Side side{Side::upper};
  FastPath fast_path{FastPath::automatic};
  int threads{1};
  bool with_strategy{true};
};

struct Strategy {
  // holdings[layer][node * d + k]; the capital requirement at a node is the
  // node value itself.
  std::vector<std::vector<double>> holdings;
  int dim{0};
};

struct InductionResult {
  double price{0.0};
  Side side{Side::upper};
  bool fast_path_used{false};
  long certification_failures{0};
  std::optional<Simplex> fast_simplex;
  Simplex root_argopt;
  int root_near_ties{0};
  long total_near_ties{0};
  StateLattice lattice;
  std::vector<std::vector<double>> values;  // [layer][node]
  Strategy strategy;
};

namespace detail {

inline int find_family_member(const SimplexFamily& fam, const Simplex& s) {
  for (std::size_t i = 0; i < fam.members.size(); ++i)
    if (fam.members[i].simplex == s) return static_cast<int>(i);
  return -1;
}

// Fixed optimizer for certified structure on a lattice-binomial move set.
// Returns the family index, or -1 when no closed form applies.
inline int fixed_simplex_for(const MoveSet& m, const SimplexFamily& fam, Modularity structure,
                             Side side) {
  if (!m.is_lattice_binomial()) return -1;
  const auto embedding = CubeEmbedding::from_move_set(m);
  const Simplex chain = chi_L(embedding, m);
  auto chain_idx = [&] { return find_family_member(fam, chain); };
  if (structure == Modularity::modular || m.dim == 1) return chain_idx();
  if (m.dim == 2) {
    const Simplex anti = chi_minus_2d(embedding, m);
    const bool use_chain = (structure == Modularity::supermodular) == (side == Side::upper);
    return find_family_member(fam, use_chain ? chain : anti);
  }
  // d >= 3: closed form only for supermodular-upper and submodular-lower.
  if ((structure == Modularity::supermodular && side == Side::upper) ||
      (structure == Modularity::submodular && side == Side::lower))
    return chain_idx();
  return -1;
}

inline bool classification_compatible(Modularity expected, Modularity got) {
  if (got == Modularity::modular) return true;
  return got == expected;
}

// Holdings from the d+1 active constraints of the chosen simplex; falls back
// to the enumeration LP when a degenerate choice leaves another constraint
// violated.
inline std::vector<double> node_holdings(const MoveSet& m,
                                         const std::vector<std::vector<double>>& pts,
                                         const RiskNeutralVertex& chosen,
                                         std::span<const double> values, double node_value,
                                         Side side) {
  const int d = m.dim;
  Matrix a(d + 1, d + 1);
  std::vector<double> b(d + 1);
  for (int r = 0; r <= d; ++r) {
    const int vi = chosen.simplex.vertex_indices[r];
    a(r, 0) = 1.0;
    for (int k = 0; k < d; ++k) a(r, k + 1) = pts[vi][k];
    b[r] = values[vi];
  }
  auto sol = solve_linear(a, b);
  if (sol) {
    bool feasible = true;
    for (std::size_t i = 0; i < pts.size() && feasible; ++i) {
      double lhs = node_value;
      for (int k = 0; k < d; ++k) lhs += (*sol)[k + 1] * pts[i][k];
      feasible = side == Side::upper ? lhs >= values[i] - kLpEps : lhs <= values[i] + kLpEps;
    }
    if (feasible) return std::vector<double>(sol->begin() + 1, sol->end());
  }
  // Degenerate active set: solve the full LP (on -f for the lower side).
  std::vector<double> vals(values.begin(), values.end());
  if (side == Side::lower)
    for (double& v : vals) v = -v;
  auto lp = superreplicating_strategy(m, vals);
  if (side == Side::lower)
    for (double& h : lp.holdings) h = -h;
  return lp.holdings;
}

}  // namespace detail

// Backward induction of the per-node optimization over the simplex family.
// When the payoff's declared structure is certified on a cell, the fixed
// closed-form simplex replaces the search at that node.
inline InductionResult backward_induction(const MoveSet& m, const Payoff& payoff, int rounds,
                                          InductionOptions opt = {}) {
  if (rounds < 1) throw Error(ErrorCode::bad_params, "need at least one round");
  const int d = m.dim;
  const int l = static_cast<int>(m.size());

  InductionResult res;
  res.side = opt.side;
  res.lattice = build_state_lattice(m, rounds);
  const auto& lat = res.lattice;
  res.values.resize(rounds + 1);
  res.strategy.dim = d;
  res.strategy.holdings.assign(rounds, {});

  auto& terminal = res.values[rounds];
  terminal.resize(lat.states[rounds].size());
  parallel_for(terminal.size(), opt.threads, [&](std::size_t i) {
    double v = evaluate(payoff, lat.coords[rounds][i], rounds);
    terminal[i] = v;
  });
  for (double v : terminal)
    if (!std::isfinite(v))
      throw Error(ErrorCode::evaluation_failure, "payoff not finite on a terminal state");

  const SimplexFamily family = enumerate_simplexes(m);
  const auto pts = m.points_d();

  int fixed_idx = -1;
  std::optional<Modularity> expected;
  std::vector<int> move_for_mask;
  if (opt.fast_path == FastPath::automatic && payoff.declared_modularity &&
      m.is_lattice_binomial()) {
    fixed_idx = detail::fixed_simplex_for(m, family, *payoff.declared_modularity, opt.side);
    if (fixed_idx >= 0) {
      expected = payoff.declared_modularity;
      const auto embedding = CubeEmbedding::from_move_set(m);
      move_for_mask.resize(std::size_t{1} << d);
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        int mi = m.index_of(embedding.corner(mask));
        if (mi < 0) throw Error(ErrorCode::not_lattice_binomial, "corner not in move set");
        move_for_mask[mask] = mi;
      }
      res.fast_path_used = true;
      res.fast_simplex = family.members[fixed_idx].simplex;
    }
  }

  std::vector<long> layer_failures(rounds, 0);
  std::vector<long> layer_ties(rounds, 0);
  for (int n = rounds - 1; n >= 0; --n) {
    const auto& next_values = res.values[n + 1];
    auto& cur = res.values[n];
    cur.resize(lat.states[n].size());
    auto& holds = res.strategy.holdings[n];
    if (opt.with_strategy) holds.resize(cur.size() * d);
    std::vector<long> fail_per_node(cur.size(), 0);
    std::vector<long> ties_per_node(cur.size(), 0);

    parallel_for(cur.size(), opt.threads, [&](std::size_t node) {
      std::vector<double> f(l);
      for (int j = 0; j < l; ++j)
        f[j] = next_values[lat.advance(n, static_cast<int>(node), j)];

      int chosen = -1;
      double value = 0.0;
      bool fixed_ok = false;
      if (fixed_idx >= 0) {
        std::vector<double> cell(std::size_t{1} << d);
        for (unsigned mask = 0; mask < cell.size(); ++mask) cell[mask] = f[move_for_mask[mask]];
        Modularity got = classify_modularity(SetFunction(d, std::move(cell)));
        if (detail::classification_compatible(*expected, got)) {
          chosen = fixed_idx;
          const auto& member = family.members[fixed_idx];
          double acc = 0.0;
          for (std::size_t j = 0; j < member.p.size(); ++j)
            acc += member.p[j] * f[member.simplex.vertex_indices[j]];
          value = acc;
          fixed_ok = true;
        } else {
          fail_per_node[node] = 1;
        }
      }
      if (!fixed_ok) {
        auto sr = single_round_price(family, f, opt.side);
        value = sr.price;
        ties_per_node[node] = sr.near_ties;
        chosen = detail::find_family_member(family, sr.argopt);
      }
      cur[node] = value;
      if (node == 0 && n == 0) {
        res.root_argopt = family.members[chosen].simplex;
      }
      if (opt.with_strategy) {
        auto h = detail::node_holdings(m, pts, family.members[chosen], f, value, opt.side);
        std::copy(h.begin(), h.end(), holds.begin() + static_cast<long>(node) * d);
      }
    });
    for (auto v : fail_per_node) layer_failures[n] += v;
    for (auto v : ties_per_node) layer_ties[n] += v;
  }
  for (long v : layer_failures) res.certification_failures += v;
  for (long v : layer_ties) res.total_near_ties += v;
  res.price = res.values[0][0];
  // root near-tie count comes from a full search at the root when one ran
  if (fixed_idx < 0) {
    std::vector<double> f(l);
    for (int j = 0; j < l; ++j) f[j] = res.values[1][lat.advance(0, 0, j)];
    res.root_near_ties = single_round_price(family, f, opt.side).near_ties;
  }
  return res;
}

// Exhaustive path check of the superreplication property: the worst slack
// min over paths of (capital - payoff) for the upper side, (payoff - capital)
// for the lower.  Exponential; guarded by the l^N budget.
inline double verify_superreplication(const MoveSet& m, const InductionResult& result,
                                      const Payoff& payoff, int rounds,
                                      std::optional<double> alpha_override = std::nullopt) {
  const int l = static_cast<int>(m.size());
  double paths = std::pow(static_cast<double>(l), rounds);
  if (paths > 1e7 + 0.5)
    throw Error(ErrorCode::bad_params, "path enumeration budget exceeded (l^N > 1e7)");
  if (result.strategy.holdings.empty() || result.strategy.holdings[0].empty())
    throw Error(ErrorCode::bad_params, "induction result carries no strategy");
  const int d = m.dim;
  const auto pts = m.points_d();
  double worst = std::numeric_limits<double>::infinity();
  double alpha = alpha_override.value_or(result.price);

  // Capital evolves with +M.x on both sides; the lower-side holdings were
  // built to subreplicate, so the slack sign flips there.
  std::function<void(int, int, double)> dfs = [&](int layer, int node, double capital) {
    if (layer == rounds) {
      double f = evaluate(payoff, result.lattice.coords[rounds][node], rounds);
      double slack = result.side == Side::upper ? capital - f : f - capital;
      worst = std::min(worst, slack);
      return;
    }
    const double* hold = &result.strategy.holdings[layer][static_cast<std::size_t>(node) * d];
    for (int j = 0; j < l; ++j) {
      double gain = 0.0;
      for (int k = 0; k < d; ++k) gain += hold[k] * pts[j][k];
      dfs(layer + 1, result.lattice.advance(layer, node, j), capital + gain);
    }
  };
  dfs(0, 0, alpha);
  return worst;
}

// Sum of per-block prices for a payoff with a declared partition when the
// move set is a direct product across the blocks.
inline double separable_price(const MoveSet& m, const Payoff& payoff, int rounds, Side side,
                              int threads = 1) {
  const auto& part = separable_decompose(payoff, m.dim);
  // Project points onto each block and check the product structure.
  std::vector<std::vector<RatVec>> block_points(part.blocks.size());
  for (std::size_t k = 0; k < part.blocks.size(); ++k) {
    std::set<RatVec> proj;
    for (const auto& p : m.points) {
      RatVec q;
      for (int axis : part.blocks[k]) q.push_back(p[axis]);
      proj.insert(std::move(q));
    }
    block_points[k].assign(proj.begin(), proj.end());
  }
  std::size_t expected = 1;
  for (const auto& bp : block_points) expected *= bp.size();
  if (expected != m.size())
    throw Error(ErrorCode::not_product_across_blocks,
                "move set is not a direct product across the partition blocks");
  const std::set<RatVec> points(m.points.begin(), m.points.end());
  std::vector<std::size_t> odo(part.blocks.size(), 0);
  bool done = false;
  while (!done) {
    RatVec full(m.dim);
    for (std::size_t k = 0; k < part.blocks.size(); ++k)
      for (std::size_t a = 0; a < part.blocks[k].size(); ++a)
        full[part.blocks[k][a]] = block_points[k][odo[k]][a];
    if (!points.count(full))
      throw Error(ErrorCode::not_product_across_blocks,
                  "grid combination missing from move set");
    std::size_t k = part.blocks.size();
    done = true;
    while (k-- > 0) {
      if (++odo[k] < block_points[k].size()) {
        done = false;
        break;
      }
      odo[k] = 0;
    }
  }

  double total = 0.0;
  for (std::size_t k = 0; k < part.blocks.size(); ++k) {
    MoveSet block_set = build_move_set(block_points[k]);
    Payoff comp = part.components[k].with_scaling(payoff.scaling);
    InductionOptions opt;
    opt.side = side;
    opt.threads = threads;
    opt.with_strategy = false;
    total += backward_induction(block_set, comp, rounds, opt).price;
  }
  return total;
}

// Midpoint-sampling convexity certificate, then pricing on the hull vertices.
inline double convex_reduction_price(const MoveSet& m, const Payoff& payoff, int rounds,
                                     int samples = 200, std::uint64_t seed = 20240601,
                                     int threads = 1) {
  double reach = 0.0;
  for (const auto& p : m.points)
    for (const auto& v : p) reach = std::max(reach, std::abs(v.to_double()));
  const double radius = reach * rounds;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  for (int t = 0; t < samples; ++t) {
    std::vector<double> x(m.dim), y(m.dim), mid(m.dim);
    for (int k = 0; k < m.dim; ++k) {
      x[k] = u(rng);
      y[k] = u(rng);
      mid[k] = 0.5 * (x[k] + y[k]);
    }
    double lhs = evaluate(payoff, mid, rounds);
    double rhs = 0.5 * (evaluate(payoff, x, rounds) + evaluate(payoff, y, rounds));
    if (lhs > rhs + 1e-9)
      throw Error(ErrorCode::convexity_check_failed, "midpoint sample violates convexity");
  }
  MoveSet hull = hull_vertices(m);
  InductionOptions opt;
  opt.side = Side::upper;
  opt.threads = threads;
  opt.with_strategy = false;
  return backward_induction(hull, payoff, rounds, opt).price;
}

// Completion pricing on a symmetric two-asset binomial cell: the correlation
// pins a product risk-neutral measure and the price is its expectation.
inline double boyle_price(const MoveSet& m, double rho, const Payoff& payoff, int rounds) {
  if (m.dim != 2 || !m.is_lattice_binomial())
    throw Error(ErrorCode::bad_params, "correlation pricing needs a two-asset binomial cell");
  for (int k = 0; k < 2; ++k) {
    const auto& axis = (*m.product_axes)[k];
    if (!(axis[0] == -axis[1]))
      throw Error(ErrorCode::bad_params, "correlation pricing needs symmetric axes {-c, c}");
  }
  if (!(rho >= -1.0 && rho <= 1.0))
    throw Error(ErrorCode::negative_probability, "correlation outside [-1, 1]");
  std::vector<double> prob(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool up1 = m.points[i][0].sign() > 0;
    const bool up2 = m.points[i][1].sign() > 0;
    prob[i] = (up1 == up2 ? 1.0 + rho : 1.0 - rho) / 4.0;
    if (prob[i] < 0.0) throw Error(ErrorCode::negative_probability, "invalid move probability");
  }
  StateLattice lat = build_state_lattice(m, rounds);
  std::vector<double> dist{1.0};
  for (int n = 0; n < rounds; ++n) {
    std::vector<double> nxt(lat.states[n + 1].size(), 0.0);
    for (std::size_t node = 0; node < dist.size(); ++node) {
      if (dist[node] == 0.0) continue;
      for (std::size_t j = 0; j < m.size(); ++j)
        nxt[lat.advance(n, static_cast<int>(node), static_cast<int>(j))] += dist[node] * prob[j];
    }
    dist = std::move(nxt);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    acc += dist[i] * evaluate(payoff, lat.coords[rounds][i], rounds);
  return acc;
}

struct PriceReport {
  double upper{0.0};
  double lower{0.0};
  bool fast_path_used{false};
  long certification_failures{0};
  std::vector<int> upper_root_argopt;
  std::vector<int> lower_root_argopt;
  long near_ties{0};
};

inline PriceReport price_both_sides(const MoveSet& m, const Payoff& payoff, int rounds,
                                    FastPath fast_path = FastPath::automatic, int threads = 1) {
  InductionOptions opt;
  opt.fast_path = fast_path;
  opt.threads = threads;
  opt.with_strategy = false;
  opt.side = Side::upper;
  auto up = backward_induction(m, payoff, rounds, opt);
  opt.side = Side::lower;
  auto lo = backward_induction(m, payoff, rounds, opt);
  PriceReport r;
  r.upper = up.price;
  r.lower = lo.price;
  r.fast_path_used = up.fast_path_used || lo.fast_path_used;
  r.certification_failures = up.certification_failures + lo.certification_failures;
  r.upper_root_argopt = up.root_argopt.vertex_indices;
  r.lower_root_argopt = lo.root_argopt.vertex_indices;
  r.near_ties = up.total_near_ties + lo.total_near_ties;
  return r;
}

}  // namespace superhedge
