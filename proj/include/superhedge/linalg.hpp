#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "superhedge/error.hpp"

namespace superhedge {

// Small dense row-major matrix.  Everything in this library is d <= 6, so no
// attempt at blocking or expression templates.
struct Matrix {
  std::size_t rows{0}, cols{0};
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// LU solve with partial pivoting; nullopt on (near-)singularity.
inline std::optional<std::vector<double>> solve_linear(Matrix m, std::vector<double> b) {
  const std::size_t n = m.rows;
  if (m.cols != n || b.size() != n) return std::nullopt;
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (std::abs(m(piv, col)) < 1e-13 * scale) return std::nullopt;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(piv, c), m(col, c));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = m(r, col) / m(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m(r, c) -= f * m(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

// Pivoted Cholesky of a symmetric PSD matrix, tolerant of rank deficiency.
// Returns T (n x rank) with T * T^T == input.  Throws NonPSD when the input is
// not symmetric PSD within tolerance.
struct PsdFactor {
  Matrix transform;  // n x rank
  std::size_t rank{0};
};

inline PsdFactor cholesky_psd(const Matrix& sigma, double tol = 1e-10) {
  const std::size_t n = sigma.rows;
  if (sigma.cols != n) throw Error(ErrorCode::non_psd, "matrix is not square");
  double scale = 1e-300;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(sigma(i, j)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-9 * scale)
        throw Error(ErrorCode::non_psd, "matrix is not symmetric");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = sigma(i, i);
  Matrix l(n, n);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (diag[perm[i]] > diag[perm[best]]) best = i;
    std::swap(perm[k], perm[best]);
    double pivot = diag[perm[k]];
    if (pivot <= tol * scale) {
      for (std::size_t i = k; i < n; ++i)
        if (diag[perm[i]] < -tol * scale)
          throw Error(ErrorCode::non_psd, "negative pivot in Cholesky");
      break;
    }
    double lkk = std::sqrt(pivot);
    l(k, k) = lkk;
    for (std::size_t i = k + 1; i < n; ++i) {
      double s = sigma(perm[i], perm[k]);
      for (std::size_t j = 0; j < k; ++j) s -= l(i, j) * l(k, j);
      l(i, k) = s / lkk;
      diag[perm[i]] -= l(i, k) * l(i, k);
    }
    ++rank;
  }
  PsdFactor out;
  out.rank = rank;
  out.transform = Matrix(n, rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < rank; ++k) out.transform(perm[i], k) = l(i, k);
  return out;
}

// Eigenvalues of a small symmetric matrix by cyclic Jacobi sweeps.
inline std::vector<double> symmetric_eigenvalues(Matrix m, int max_sweeps = 64) {
  const std::size_t n = m.rows;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = m(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = m(k, p), akq = m(k, q);
          m(k, p) = c * akp - s * akq;
          m(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = m(p, k), aqk = m(q, k);
          m(p, k) = c * apk - s * aqk;
          m(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = m(i, i);
  return ev;
}

}  // namespace superhedge
