#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/rational.hpp"

namespace superhedge {

enum class TetraType { corner, regular, type3, type4 };

inline const char* to_string(TetraType t) {
  switch (t) {
    case TetraType::corner: return "corner";
    case TetraType::regular: return "regular";
    case TetraType::type3: return "type3";
    case TetraType::type4: return "type4";
  }
  return "?";
}

// All full-dimensional (d+1)-vertex simplexes on hypercube vertices,
// vertices encoded as bitmasks.  For d == 3 the 58 tetrahedra carry a shape
// tag derived from the squared-edge-length multiset.
struct CubeSimplexCensus {
  int d{0};
  std::vector<std::vector<unsigned>> simplexes;  // sorted masks, lex order
  std::vector<TetraType> types;                  // d == 3 only
  std::array<int, 4> type_counts{0, 0, 0, 0};    // corner, regular, type3, type4
  int degenerate_count{0};                       // coplanar (d+1)-subsets
};

namespace census_detail {

using i128 = __int128;

// Fraction-free determinant (Bareiss) of a small integer matrix.
inline i128 bareiss_det(std::array<std::array<i128, 8>, 8>& m, int n) {
  i128 sign = 1;
  i128 prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[k][k] == 0) {
      int piv = -1;
      for (int r = k + 1; r < n; ++r)
        if (m[r][k] != 0) {
          piv = r;
          break;
        }
      if (piv < 0) return 0;
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

inline bool full_dimensional(const std::vector<unsigned>& masks, int d) {
  std::array<std::array<i128, 8>, 8> m{};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      m[r][c] = static_cast<int>((masks[r + 1] >> c) & 1u) -
                static_cast<int>((masks[0] >> c) & 1u);
  return bareiss_det(m, d) != 0;
}

inline TetraType classify_tetra(const std::vector<unsigned>& masks) {
  std::array<int, 6> edges{};
  int e = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) edges[e++] = __builtin_popcount(masks[i] ^ masks[j]);
  std::sort(edges.begin(), edges.end());
  const std::array<int, 6> corner{1, 1, 1, 2, 2, 2};
  const std::array<int, 6> regular{2, 2, 2, 2, 2, 2};
  const std::array<int, 6> type3{1, 1, 2, 2, 2, 3};
  if (edges == corner) return TetraType::corner;
  if (edges == regular) return TetraType::regular;
  if (edges == type3) return TetraType::type3;
  return TetraType::type4;
}

}  // namespace census_detail

inline CubeSimplexCensus enumerate_cube_simplexes(int d) {
  if (d < 1 || d > 5)
    throw Error(ErrorCode::bad_params, "census supports 1 <= d <= 5");
  CubeSimplexCensus census;
  census.d = d;
  const int n = 1 << d;
  std::vector<unsigned> idx(d + 1);
  for (int i = 0; i <= d; ++i) idx[i] = i;
  while (true) {
    if (census_detail::full_dimensional(idx, d)) {
      census.simplexes.push_back(idx);
      if (d == 3) {
        TetraType t = census_detail::classify_tetra(idx);
        census.types.push_back(t);
        census.type_counts[static_cast<int>(t)]++;
      }
    } else {
      census.degenerate_count++;
    }
    int pos = d;
    while (pos >= 0 && idx[pos] == static_cast<unsigned>(n - (d + 1) + pos)) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i <= d; ++i) idx[i] = idx[i - 1] + 1;
  }
  return census;
}

inline const CubeSimplexCensus& cube_simplex_census(int d) {
  static std::mutex mu;
  static std::map<int, CubeSimplexCensus> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, enumerate_cube_simplexes(d)).first;
  return it->second;
}

// Exact closed-hull membership of a rational point in a 0/1-vertex simplex.
// Clears denominators and runs integer Cramer solves; no tolerances anywhere.
inline bool cube_simplex_contains(const std::vector<unsigned>& masks, const RatVec& x) {
  using census_detail::i128;
  const int d = static_cast<int>(x.size());
  if (static_cast<int>(masks.size()) != d + 1)
    throw Error(ErrorCode::bad_params, "simplex must have d+1 vertices");
  i128 den = 1;  // lcm of coordinate denominators
  for (const auto& v : x) {
    i128 a = den, b = v.den();
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    den = den / a * v.den();
  }

  std::array<std::array<i128, 8>, 8> m{};
  std::array<i128, 8> b{};
  const int n = d + 1;
  for (int c = 0; c < n; ++c) {
    m[0][c] = 1;
    for (int r = 0; r < d; ++r) m[r + 1][c] = (masks[c] >> r) & 1u;
  }
  b[0] = den;
  for (int r = 0; r < d; ++r) b[r + 1] = static_cast<i128>(x[r].num()) * (den / x[r].den());

  auto det_of = [&](int replace_col) {
    std::array<std::array<i128, 8>, 8> t{};
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) t[r][c] = c == replace_col ? b[r] : m[r][c];
    return census_detail::bareiss_det(t, n);
  };

  std::array<std::array<i128, 8>, 8> base = m;
  i128 det = census_detail::bareiss_det(base, n);
  if (det == 0) throw Error(ErrorCode::singular_system, "degenerate simplex");
  for (int c = 0; c < n; ++c) {
    i128 num = det_of(c);
    if (det > 0 ? num < 0 : num > 0) return false;
  }
  return true;
}

// Number of census simplexes whose closed hull contains x.
inline int count_containing(const RatVec& x) {
  const int d = static_cast<int>(x.size());
  const auto& census = cube_simplex_census(d);
  int count = 0;
  for (const auto& s : census.simplexes) count += cube_simplex_contains(s, x);
  return count;
}

// The 14 planes through >= 3 cube vertices that cut [0,1]^3, as rows
// (a, b, c, rhs) of a x + b y + c z = rhs.
inline const std::vector<std::array<int, 4>>& cutting_planes_3d() {
  static const std::vector<std::array<int, 4>> planes = {
      // through four vertices
      {1, -1, 0, 0},
      {0, 1, -1, 0},
      {1, 0, -1, 0},
      {1, 1, 0, 1},
      {0, 1, 1, 1},
      {1, 0, 1, 1},
      // through three vertices
      {1, 1, 1, 1},
      {1, 1, 1, 2},
      {1, -1, 1, 0},
      {1, -1, 1, 1},
      {1, 1, -1, 0},
      {1, 1, -1, 1},
      {-1, 1, 1, 1},
      {-1, 1, 1, 0},
  };
  return planes;
}

enum class Region3 { t1_and_t2, t1_only, t2_only, neither, boundary };

inline const char* to_string(Region3 r) {
  switch (r) {
    case Region3::t1_and_t2: return "t1_and_t2";
    case Region3::t1_only: return "t1_only";
    case Region3::t2_only: return "t2_only";
    case Region3::neither: return "neither";
    case Region3::boundary: return "boundary";
  }
  return "?";
}

// Locates x against the two regular tetrahedra of the cube; boundary as soon
// as any of the 14 cutting planes passes through x exactly.
inline Region3 classify_point_3d(const RatVec& x) {
  if (x.size() != 3) throw Error(ErrorCode::bad_params, "classify_point_3d needs d == 3");
  for (const auto& pl : cutting_planes_3d()) {
    Rational v = x[0] * pl[0] + x[1] * pl[1] + x[2] * pl[2] - Rational(pl[3]);
    if (v.is_zero()) return Region3::boundary;
  }
  const Rational s = x[0] + x[1] + x[2];
  const Rational a = x[0] + x[1] - x[2];
  const Rational b = x[0] - x[1] + x[2];
  const Rational c = -x[0] + x[1] + x[2];
  const bool in_t1 = a.sign() > 0 && b.sign() > 0 && c.sign() > 0 && s < Rational(2);
  const bool in_t2 = a < Rational(1) && b < Rational(1) && c < Rational(1) && s > Rational(1);
  if (in_t1 && in_t2) return Region3::t1_and_t2;
  if (in_t1) return Region3::t1_only;
  if (in_t2) return Region3::t2_only;
  return Region3::neither;
}

// Chain construction: 2^{d-2} distinct full-dimensional simplexes through a
// sorted point of the half-open lower half-cube, obtained by swapping the
// chain vertex at the minimal gap for every compatible 0/1 vector.
inline std::vector<std::vector<unsigned>> lower_bound_family(const RatVec& x) {
  const int d = static_cast<int>(x.size());
  if (d < 2) throw Error(ErrorCode::bad_params, "need d >= 2");
  const Rational half(1, 2);
  for (int k = 0; k < d; ++k) {
    if (x[k].sign() < 0 || !(x[k] < half))
      throw Error(ErrorCode::not_in_half_cube, "coordinates must lie in [0, 1/2)");
    if (k > 0 && x[k] < x[k - 1])
      throw Error(ErrorCode::bad_params, "coordinates must be sorted ascending");
  }
  // e_i has coordinates j >= i set (1-based); e_{d+1} is the origin.
  auto chain_vertex = [&](int i) -> unsigned {
    if (i == d + 1) return 0;
    unsigned mask = 0;
    for (int j = i; j <= d; ++j) mask |= 1u << (j - 1);
    return mask;
  };
  // minimal consecutive gap (x_0 := 0) and the first index attaining it
  int i_star = 1;
  Rational best_gap = x[0];
  for (int i = 2; i <= d; ++i) {
    Rational gap = x[i - 1] - x[i - 2];
    if (gap < best_gap) {
      best_gap = gap;
      i_star = i;
    }
  }

  std::vector<unsigned> base;
  for (int i = 1; i <= d + 1; ++i) base.push_back(chain_vertex(i));

  // Replacement vertices: coordinate i_star set, coordinate i_star - 1 clear
  // (for i_star == 1 the canonical subfamily pins the first two coordinates).
  std::vector<int> free_bits;
  unsigned pinned_set = 0, pinned_clear = 0;
  if (i_star >= 2) {
    pinned_set = 1u << (i_star - 1);
    pinned_clear = 1u << (i_star - 2);
  } else {
    pinned_set = (1u << 0) | (1u << 1);
  }
  for (int bit = 0; bit < d; ++bit) {
    unsigned b = 1u << bit;
    if ((pinned_set & b) || (pinned_clear & b)) continue;
    free_bits.push_back(bit);
  }

  std::vector<std::vector<unsigned>> family;
  const unsigned variants = 1u << free_bits.size();
  for (unsigned v = 0; v < variants; ++v) {
    unsigned eps = pinned_set;
    for (std::size_t t = 0; t < free_bits.size(); ++t)
      if ((v >> t) & 1u) eps |= 1u << free_bits[t];
    std::vector<unsigned> simplex;
    for (int i = 1; i <= d + 1; ++i) simplex.push_back(i == i_star ? eps : chain_vertex(i));
    std::sort(simplex.begin(), simplex.end());
    if (!cube_simplex_contains(simplex, x))
      throw Error(ErrorCode::validation_failed, "constructed simplex misses the point");
    family.push_back(std::move(simplex));
  }
  std::sort(family.begin(), family.end());
  return family;
}

}  // namespace superhedge
