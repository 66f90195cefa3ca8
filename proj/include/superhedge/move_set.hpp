#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/linalg.hpp"
#include "superhedge/rational.hpp"

namespace superhedge {

// Finite set of per-round price-change vectors.  Validated so that the convex
// hull is full-dimensional and has the origin strictly inside.
struct MoveSet {
  std::vector<RatVec> points;
  int dim{0};
  // Per-axis sorted values when the points form a full Cartesian grid.
  std::optional<std::vector<RatVec>> product_axes;
  bool contains_zero_move{false};

  bool is_product() const { return product_axes.has_value(); }
  bool is_lattice_binomial() const {
    if (!product_axes) return false;
    for (const auto& axis : *product_axes)
      if (axis.size() != 2) return false;
    return true;
  }
  std::size_t size() const { return points.size(); }

  std::vector<std::vector<double>> points_d() const {
    std::vector<std::vector<double>> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(to_doubles(p));
    return out;
  }

  // Index of an exactly matching point, -1 when absent.
  int index_of(const RatVec& p) const {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i] == p) return static_cast<int>(i);
    return -1;
  }
};

// A (d+1)-point affinely independent subset with the origin in its hull.
struct Simplex {
  std::vector<int> vertex_indices;  // sorted ascending

  friend bool operator==(const Simplex& a, const Simplex& b) {
    return a.vertex_indices == b.vertex_indices;
  }
  friend auto operator<=>(const Simplex& a, const Simplex& b) {
    return a.vertex_indices <=> b.vertex_indices;
  }
};

// Simplex together with the zero-mean vertex measure and its covariance.
struct RiskNeutralVertex {
  Simplex simplex;
  std::vector<double> p;  // length d+1, nonnegative, sums to 1
  RatVec p_exact;
  Matrix sigma;  // d x d, sigma_ij = sum_k p_k a_ki a_kj
};

struct SimplexFamily {
  std::vector<RiskNeutralVertex> members;  // lexicographic by vertex_indices
  std::size_t size() const { return members.size(); }
};

namespace detail {

inline RatMatrix displacement_rows(const std::vector<RatVec>& pts) {
  RatMatrix rows;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    RatVec row(pts[i].size());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = pts[i][k] - pts[0][k];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline int affine_rank(const std::vector<RatVec>& pts) {
  if (pts.empty()) return -1;
  return rat_rank(displacement_rows(pts));
}

// Barycentric weights of x with respect to the given points: solves
// sum w_i = 1, sum w_i p_i = x.  nullopt when the points are affinely
// dependent or x is outside their affine hull.
inline std::optional<RatVec> barycentric_weights(const std::vector<RatVec>& pts, const RatVec& x) {
  const std::size_t d = x.size();
  const std::size_t k = pts.size();
  RatMatrix a(d + 1, RatVec(k));
  RatVec b(d + 1);
  for (std::size_t j = 0; j < k; ++j) a[0][j] = Rational(1);
  b[0] = Rational(1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) a[i + 1][j] = pts[j][i];
    b[i + 1] = x[i];
  }
  return rat_solve(std::move(a), std::move(b));
}

// Exact membership x in conv(pts).  Caratheodory: it is enough to scan
// affinely independent subsets of size up to d+1.
inline bool point_in_hull(const RatVec& x, const std::vector<RatVec>& pts) {
  const int d = static_cast<int>(x.size());
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx;
  std::vector<RatVec> sub;
  auto nonneg = [](const RatVec& w) {
    for (const auto& v : w)
      if (v.sign() < 0) return false;
    return true;
  };
  for (int k = 1; k <= std::min(d + 1, n); ++k) {
    idx.assign(k, 0);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      sub.clear();
      for (int i : idx) sub.push_back(pts[i]);
      auto w = barycentric_weights(sub, x);
      if (w && nonneg(*w)) return true;
      int pos = k - 1;
      while (pos >= 0 && idx[pos] == n - k + pos) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return false;
}

// Normal of the hyperplane spanned by d points (cofactor expansion of the
// displacement rows).  Zero vector when the points do not span a hyperplane.
inline RatVec hyperplane_normal(const std::vector<RatVec>& pts) {
  const std::size_t d = pts[0].size();
  RatMatrix disp = displacement_rows(pts);  // (d-1) x d
  RatVec n(d);
  for (std::size_t j = 0; j < d; ++j) {
    RatMatrix minor(disp.size(), RatVec(d - 1));
    for (std::size_t r = 0; r < disp.size(); ++r) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < d; ++c) {
        if (c == j) continue;
        minor[r][cc++] = disp[r][c];
      }
    }
    Rational det = minor.empty() ? Rational(1) : rat_det(minor);
    n[j] = (j % 2 == 0) ? det : -det;
  }
  return n;
}

// 0 in int(conv(points))?  Enumerate candidate supporting hyperplanes; the
// origin must be strictly on the inner side of every one.
inline bool origin_strictly_interior(const std::vector<RatVec>& pts, int d) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  std::vector<RatVec> sub;
  while (true) {
    sub.clear();
    for (int i : idx) sub.push_back(pts[i]);
    RatVec normal = hyperplane_normal(sub);
    bool zero = true;
    for (const auto& v : normal) zero &= v.is_zero();
    if (!zero) {
      Rational offset;
      for (int k = 0; k < d; ++k) offset += normal[k] * sub[0][k];
      int pos = 0, neg = 0;
      for (const auto& p : pts) {
        Rational v = -offset;
        for (int k = 0; k < d; ++k) v += normal[k] * p[k];
        int s = v.sign();
        pos += s > 0;
        neg += s < 0;
        if (pos && neg) break;
      }
      if (!(pos && neg)) {
        // Supporting hyperplane: all points weakly on one side.
        int side = pos ? 1 : -1;
        int origin_side = (-offset).sign();
        if (origin_side != side) return false;
      }
    }
    int pos2 = d - 1;
    while (pos2 >= 0 && idx[pos2] == n - d + pos2) --pos2;
    if (pos2 < 0) break;
    ++idx[pos2];
    for (int i = pos2 + 1; i < d; ++i) idx[i] = idx[i - 1] + 1;
  }
  return true;
}

inline std::optional<std::vector<RatVec>> detect_product_axes(const std::vector<RatVec>& pts,
                                                              int d) {
  std::vector<RatVec> axes(d);
  for (int k = 0; k < d; ++k) {
    std::set<Rational> vals;
    for (const auto& p : pts) vals.insert(p[k]);
    axes[k].assign(vals.begin(), vals.end());
  }
  std::size_t expected = 1;
  for (const auto& axis : axes) {
    expected *= axis.size();
    if (expected > pts.size()) return std::nullopt;
  }
  if (expected != pts.size()) return std::nullopt;
  std::set<RatVec> pointset(pts.begin(), pts.end());
  if (pointset.size() != pts.size()) return std::nullopt;
  // Every grid combination must be present.
  std::vector<std::size_t> odo(d, 0);
  while (true) {
    RatVec p(d);
    for (int k = 0; k < d; ++k) p[k] = axes[k][odo[k]];
    if (!pointset.count(p)) return std::nullopt;
    int k = d - 1;
    while (k >= 0 && ++odo[k] == axes[k].size()) odo[k--] = 0;
    if (k < 0) break;
  }
  return axes;
}

}  // namespace detail

inline MoveSet build_move_set(std::vector<RatVec> points) {
  if (points.empty()) throw Error(ErrorCode::bad_params, "empty move set");
  const int d = static_cast<int>(points[0].size());
  if (d == 0) throw Error(ErrorCode::bad_params, "zero-dimensional move set");
  for (const auto& p : points)
    if (static_cast<int>(p.size()) != d)
      throw Error(ErrorCode::bad_params, "inconsistent point dimension");
  if (static_cast<int>(points.size()) < d + 1)
    throw Error(ErrorCode::too_few_points, "need at least d+1 moves");
  if (detail::affine_rank(points) != d)
    throw Error(ErrorCode::dimension_deficient, "convex hull is not full-dimensional");
  if (!detail::origin_strictly_interior(points, d))
    throw Error(ErrorCode::origin_not_interior, "origin is not interior to the hull");

  MoveSet m;
  m.dim = d;
  m.product_axes = detail::detect_product_axes(points, d);
  for (const auto& p : points) {
    bool zero = true;
    for (const auto& v : p) zero &= v.is_zero();
    if (zero) m.contains_zero_move = true;
  }
  m.points = std::move(points);
  return m;
}

// Vertex measure of a simplex: the unique weights with sum 1 and zero mean.
inline RiskNeutralVertex risk_neutral_vertex(const MoveSet& m, const Simplex& s) {
  const int d = m.dim;
  std::vector<RatVec> pts;
  pts.reserve(s.vertex_indices.size());
  for (int i : s.vertex_indices) pts.push_back(m.points[i]);
  if (static_cast<int>(pts.size()) != d + 1)
    throw Error(ErrorCode::bad_params, "simplex must have d+1 vertices");
  RatVec origin(d, Rational(0));
  auto w = detail::barycentric_weights(pts, origin);
  if (!w) throw Error(ErrorCode::singular_system, "simplex vertices are affinely dependent");
  for (const auto& v : *w)
    if (v.sign() < 0) throw Error(ErrorCode::not_containing, "origin outside simplex hull");

  RiskNeutralVertex out;
  out.simplex = s;
  out.p_exact = *w;
  out.p.resize(d + 1);
  for (int j = 0; j <= d; ++j) out.p[j] = (*w)[j].to_double();
  out.sigma = Matrix(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Rational acc;
      for (int k = 0; k <= d; ++k) acc += (*w)[k] * pts[k][i] * pts[k][j];
      out.sigma(i, j) = acc.to_double();
      out.sigma(j, i) = out.sigma(i, j);
    }
  }
  return out;
}

// All (d+1)-subsets that are full-dimensional simplexes containing the
// origin, in lexicographic index order, with vertex measures attached.
inline SimplexFamily enumerate_simplexes(const MoveSet& m) {
  const int d = m.dim;
  const int n = static_cast<int>(m.points.size());
  SimplexFamily fam;
  std::vector<int> idx(d + 1);
  for (int i = 0; i <= d; ++i) idx[i] = i;
  std::vector<RatVec> pts;
  RatVec origin(d, Rational(0));
  while (true) {
    pts.clear();
    for (int i : idx) pts.push_back(m.points[i]);
    auto w = detail::barycentric_weights(pts, origin);
    if (w) {
      bool nonneg = true;
      for (const auto& v : *w) nonneg &= v.sign() >= 0;
      if (nonneg) {
        Simplex s;
        s.vertex_indices = idx;
        fam.members.push_back(risk_neutral_vertex(m, s));
      }
    }
    int pos = d;
    while (pos >= 0 && idx[pos] == n - (d + 1) + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i <= d; ++i) idx[i] = idx[i - 1] + 1;
  }
  return fam;
}

// Extreme points of conv(points), preserving input order.
inline MoveSet hull_vertices(const MoveSet& m) {
  std::vector<RatVec> keep;
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    std::vector<RatVec> others;
    others.reserve(m.points.size() - 1);
    for (std::size_t j = 0; j < m.points.size(); ++j)
      if (j != i) others.push_back(m.points[j]);
    if (!detail::point_in_hull(m.points[i], others)) keep.push_back(m.points[i]);
  }
  return build_move_set(std::move(keep));
}

// Measures that differ only by zero-weight vertices collapse to the same
// (support, weight) pair; useful to tally genuinely distinct vertex measures.
inline std::size_t distinct_measure_count(const SimplexFamily& fam, const MoveSet& m) {
  std::set<std::vector<std::pair<int, Rational>>> seen;
  for (const auto& member : fam.members) {
    std::vector<std::pair<int, Rational>> support;
    for (std::size_t j = 0; j < member.p_exact.size(); ++j)
      if (!member.p_exact[j].is_zero())
        support.emplace_back(member.simplex.vertex_indices[j], member.p_exact[j]);
    std::sort(support.begin(), support.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    seen.insert(support);
  }
  (void)m;
  return seen.size();
}

}  // namespace superhedge
