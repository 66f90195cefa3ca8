#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "superhedge/error.hpp"
#include "superhedge/linalg.hpp"
#include "superhedge/move_set.hpp"
#include "superhedge/parallel.hpp"
#include "superhedge/pricing.hpp"

namespace superhedge {

// Uniform grid on [-M ds, M ds]^2 with K explicit Euler steps over t in [0,1].
// Construction enforces the dt/ds^2 <= 1/2 stability condition.
struct Grid2d {
  int half_cells{70};   // M
  double ds{0.1};
  int time_steps{300};  // K, dt = 1/K

  double dt() const { return 1.0 / time_steps; }
  int size() const { return 2 * half_cells + 1; }

  static Grid2d make(int half_cells, double ds, int time_steps) {
    if (half_cells < 2 || ds <= 0.0 || time_steps < 1)
      throw Error(ErrorCode::bad_params, "invalid grid parameters");
    Grid2d g{half_cells, ds, time_steps};
    if (g.dt() / (ds * ds) > 0.5 + 1e-12)
      throw Error(ErrorCode::stability_violation, "dt/ds^2 must not exceed 1/2");
    return g;
  }
};

struct CovarianceFamily {
  struct Member {
    Simplex simplex;  // provenance; may be empty for hand-built families
    double s11{0.0}, s12{0.0}, s22{0.0};
  };
  std::vector<Member> members;

  static CovarianceFamily from_simplex_family(const SimplexFamily& fam) {
    CovarianceFamily out;
    for (const auto& member : fam.members) {
      if (member.sigma.rows != 2)
        throw Error(ErrorCode::bad_params, "PDE covariance family must be 2x2");
      out.members.push_back(
          {member.simplex, member.sigma(0, 0), member.sigma(0, 1), member.sigma(1, 1)});
    }
    if (out.members.empty()) throw Error(ErrorCode::bad_params, "empty covariance family");
    return out;
  }

  static CovarianceFamily from_matrices(const std::vector<Matrix>& mats) {
    CovarianceFamily out;
    for (const auto& s : mats) {
      if (s.rows != 2 || s.cols != 2)
        throw Error(ErrorCode::bad_params, "PDE covariance family must be 2x2");
      out.members.push_back({Simplex{}, s(0, 0), s(0, 1), s(1, 1)});
    }
    if (out.members.empty()) throw Error(ErrorCode::bad_params, "empty covariance family");
    return out;
  }
};

struct BsbResult {
  double value{0.0};                // u at the spatial origin, final time
  std::vector<double> final_field;  // row-major (size x size)
  int grid_size{0};
};

// Explicit Euler for du/dt = 1/2 opt_Sigma Tr(Sigma Hess u) with Dirichlet
// boundary frozen at the initial condition.  The optimum compares every
// family member at every cell and step.
inline BsbResult solve_bsb(const CovarianceFamily& family,
                           const std::function<double(double, double)>& terminal, const Grid2d& g,
                           Side side, int threads = 1) {
  const int n = g.size();
  const int m = g.half_cells;
  const double ds = g.ds;
  const double dt = g.dt();
  std::vector<double> cur(static_cast<std::size_t>(n) * n), nxt;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      cur[static_cast<std::size_t>(i + m) * n + (j + m)] = terminal(i * ds, j * ds);
  for (double v : cur)
    if (!std::isfinite(v))
      throw Error(ErrorCode::non_finite_field, "terminal condition not finite on grid");
  nxt = cur;

  const double inv_ds2 = 1.0 / (ds * ds);
  for (int step = 0; step < g.time_steps; ++step) {
    parallel_for(static_cast<std::size_t>(n - 2), threads, [&](std::size_t row) {
      const int i = static_cast<int>(row) + 1;
      const double* u = cur.data();
      double* out = nxt.data();
      for (int j = 1; j < n - 1; ++j) {
        const std::size_t c = static_cast<std::size_t>(i) * n + j;
        const double h11 = (u[c + n] - 2.0 * u[c] + u[c - n]) * inv_ds2;
        const double h22 = (u[c + 1] - 2.0 * u[c] + u[c - 1]) * inv_ds2;
        const double h12 =
            (u[c + n + 1] - u[c + n - 1] - u[c - n + 1] + u[c - n - 1]) * 0.25 * inv_ds2;
        bool first = true;
        double opt = 0.0;
        for (const auto& s : family.members) {
          double tr = s.s11 * h11 + 2.0 * s.s12 * h12 + s.s22 * h22;
          if (first || (side == Side::upper ? tr > opt : tr < opt)) {
            opt = tr;
            first = false;
          }
        }
        out[c] = u[c] + 0.5 * opt * dt;
      }
    });
    std::swap(cur, nxt);
    if (!std::isfinite(cur[static_cast<std::size_t>(m) * n + m]))
      throw Error(ErrorCode::non_finite_field, "field blew up; check grid and payoff pairing");
  }
  for (double v : cur)
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_field, "non-finite field value");
  BsbResult res;
  res.grid_size = n;
  res.value = cur[static_cast<std::size_t>(m) * n + m];
  res.final_field = std::move(cur);
  return res;
}

// ---- Gaussian closed-form limits ----

constexpr double kPi = 3.14159265358979323846;

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct QuadratureMethod {
  int panels_per_dim{0};     // 0 picks a default by rank
  double half_width{8.0};    // integration domain in whitened coordinates
};

struct MonteCarloMethod {
  std::uint64_t seed{1};
  std::size_t samples{1000000};
};

namespace detail {

// Deterministic standard normals: Box-Muller over mt19937_64, independent of
// the standard library's distribution implementation.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform01() {
    // in (0, 1]: keeps log() finite
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
  bool have_spare_{false};
  double spare_{0.0};
};

// Composite Gauss-Legendre nodes against the standard normal weight.
inline void normal_quadrature_nodes(int panels, double half_width, std::vector<double>& nodes,
                                    std::vector<double>& weights) {
  static constexpr double kGlNode[4] = {-0.8611363115940526, -0.3399810435848563,
                                        0.3399810435848563, 0.8611363115940526};
  static constexpr double kGlWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                          0.6521451548625461, 0.3478548451374538};
  nodes.clear();
  weights.clear();
  const double width = 2.0 * half_width / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = -half_width + p * width;
    const double mid = lo + 0.5 * width;
    for (int q = 0; q < 4; ++q) {
      const double z = mid + 0.5 * width * kGlNode[q];
      nodes.push_back(z);
      weights.push_back(0.5 * width * kGlWeight[q] * normal_pdf(z));
    }
  }
}

}  // namespace detail

// E[F(s)], s ~ N(0, sigma), by tensor quadrature over the whitened
// coordinates.  Degenerate sigma is handled through its pivoted Cholesky
// rank.
template <class F>
double gaussian_price(const Matrix& sigma, F&& payoff, const QuadratureMethod& method = {}) {
  auto factor = cholesky_psd(sigma);
  const std::size_t d = sigma.rows;
  const std::size_t r = factor.rank;
  if (r == 0) return payoff(std::vector<double>(d, 0.0));
  int panels = method.panels_per_dim;
  if (panels <= 0) panels = r == 1 ? 2048 : (r == 2 ? 128 : 44);
  std::vector<double> nodes, weights;
  detail::normal_quadrature_nodes(panels, method.half_width, nodes, weights);
  const std::size_t q = nodes.size();

  std::vector<std::size_t> odo(r, 0);
  std::vector<double> z(r), s(d);
  double acc = 0.0;
  bool done = false;
  while (!done) {
    double w = 1.0;
    for (std::size_t k = 0; k < r; ++k) {
      z[k] = nodes[odo[k]];
      w *= weights[odo[k]];
    }
    for (std::size_t i = 0; i < d; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < r; ++k) v += factor.transform(i, k) * z[k];
      s[i] = v;
    }
    acc += w * payoff(s);
    std::size_t k = r;
    done = true;
    while (k-- > 0) {
      if (++odo[k] < q) {
        done = false;
        break;
      }
      odo[k] = 0;
    }
  }
  return acc;
}

// E[F(s)], s ~ N(0, sigma), by seeded Monte Carlo.
template <class F>
double gaussian_price(const Matrix& sigma, F&& payoff, const MonteCarloMethod& method) {
  auto factor = cholesky_psd(sigma);
  const std::size_t d = sigma.rows;
  const std::size_t r = factor.rank;
  if (r == 0) return payoff(std::vector<double>(d, 0.0));
  detail::NormalSampler sampler(method.seed);
  std::vector<double> z(r), s(d);
  double acc = 0.0;
  for (std::size_t it = 0; it < method.samples; ++it) {
    for (std::size_t k = 0; k < r; ++k) z[k] = sampler.next();
    for (std::size_t i = 0; i < d; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < r; ++k) v += factor.transform(i, k) * z[k];
      s[i] = v;
    }
    acc += payoff(s);
  }
  return acc / static_cast<double>(method.samples);
}

}  // namespace superhedge
