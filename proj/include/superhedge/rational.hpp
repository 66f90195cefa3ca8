#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace superhedge {

// Exact rational number over 64-bit numerator/denominator, gcd-normalized with
// denominator > 0.  Intermediates run through __int128; a true 64-bit overflow
// after reduction throws.  Plenty of headroom for the lattice geometry this
// library works with.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(runtime/explicit)
  Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    i128 lhs = i128(a.num_) * b.den_;
    i128 rhs = i128(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  std::string to_string() const {
    std::string s = std::to_string(num_);
    if (den_ != 1) s += "/" + std::to_string(den_);
    return s;
  }

  // Accepts "3", "-7/2", "0.45", "-.5".  No exponents.
  static Rational parse(std::string_view text);

 private:
  using i128 = __int128;

  static Rational make(i128 n, i128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) return Rational();
    unsigned __int128 un = n < 0 ? static_cast<unsigned __int128>(-n) : static_cast<unsigned __int128>(n);
    unsigned __int128 ud = static_cast<unsigned __int128>(d);
    unsigned __int128 g = gcd_u128(un, ud);
    n /= static_cast<i128>(g);
    d /= static_cast<i128>(g);
    constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();
    constexpr i128 kMin = std::numeric_limits<std::int64_t>::min();
    if (n > kMax || n < kMin || d > kMax) throw std::overflow_error("Rational: 64-bit overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static unsigned __int128 gcd_u128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
      unsigned __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  std::int64_t num_{0};
  std::int64_t den_{1};
};

inline Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("Rational: cannot parse '" + std::string(text) + "'");
  };
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  skip_ws();
  bool neg = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    neg = text[pos] == '-';
    ++pos;
  }
  i128 int_part = 0, frac_part = 0, frac_scale = 1;
  bool any_digit = false;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    int_part = int_part * 10 + (text[pos] - '0');
    if (int_part > i128(std::numeric_limits<std::int64_t>::max())) return fail();
    any_digit = true;
    ++pos;
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      frac_part = frac_part * 10 + (text[pos] - '0');
      frac_scale *= 10;
      if (frac_scale > i128(1000000000000000000LL)) return fail();
      any_digit = true;
      ++pos;
    }
    skip_ws();
    if (!any_digit || pos != text.size()) return fail();
    i128 n = int_part * frac_scale + frac_part;
    return make(neg ? -n : n, frac_scale);
  }
  if (!any_digit) return fail();
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    bool dneg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      dneg = text[pos] == '-';
      ++pos;
    }
    i128 den = 0;
    bool den_digit = false;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      den = den * 10 + (text[pos] - '0');
      if (den > i128(std::numeric_limits<std::int64_t>::max())) return fail();
      den_digit = true;
      ++pos;
    }
    skip_ws();
    if (!den_digit || pos != text.size() || den == 0) return fail();
    i128 n = neg ? -int_part : int_part;
    return make(n, dneg ? -den : den);
  }
  skip_ws();
  if (pos != text.size()) return fail();
  return Rational(neg ? -static_cast<std::int64_t>(int_part) : static_cast<std::int64_t>(int_part));
}

using RatVec = std::vector<Rational>;

inline std::vector<double> to_doubles(const RatVec& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].to_double();
  return out;
}

// Smallest-denominator rational within tol of x (continued fractions).  Used
// when an interface hands us a plain floating-point number where an exact
// rational is required.
inline Rational rational_from_double(double x, std::int64_t max_den = 1000000000LL,
                                     double tol = 1e-12) {
  if (x == 0.0) return Rational(0);
  bool neg = x < 0;
  double v = neg ? -x : x;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = v;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(frac);
    if (fl > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 4)) break;
    std::int64_t a = static_cast<std::int64_t>(fl);
    std::int64_t p2 = a * p1 + p0;
    std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den || q2 <= 0) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - v) <= tol * std::max(1.0, v)) break;
    double rem = frac - fl;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) throw std::invalid_argument("rational_from_double: no convergent");
  double approx = static_cast<double>(p1) / static_cast<double>(q1);
  if (std::abs(approx - v) > 1e-9 * std::max(1.0, v))
    throw std::invalid_argument("rational_from_double: value is not close to a small rational");
  return Rational(neg ? -p1 : p1, q1);
}

// ---- exact dense linear algebra on rationals (small systems only) ----

using RatMatrix = std::vector<RatVec>;  // row-major

// Row rank by Gaussian elimination.
inline int rat_rank(RatMatrix m) {
  if (m.empty()) return 0;
  const size_t rows = m.size(), cols = m[0].size();
  int rank = 0;
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && m[piv][col].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[row]);
    for (size_t r = 0; r < rows; ++r) {
      if (r == row || m[r][col].is_zero()) continue;
      Rational factor = m[r][col] / m[row][col];
      for (size_t c = col; c < cols; ++c) m[r][c] -= factor * m[row][c];
    }
    ++row;
    ++rank;
  }
  return rank;
}

// Determinant of a square rational matrix.
inline Rational rat_det(RatMatrix m) {
  const size_t n = m.size();
  Rational det(1);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col].is_zero()) ++piv;
    if (piv == n) return Rational(0);
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (size_t r = col + 1; r < n; ++r) {
      if (m[r][col].is_zero()) continue;
      Rational factor = m[r][col] / m[col][col];
      for (size_t c = col; c < n; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  return det;
}

// Solves a (possibly overdetermined) exact system A w = b with unique solution.
// Returns nullopt when the system is inconsistent or the solution is not
// unique (column-rank deficient).
inline std::optional<RatVec> rat_solve(RatMatrix a, RatVec b) {
  const size_t rows = a.size();
  if (rows == 0 || b.size() != rows) return std::nullopt;
  const size_t cols = a[0].size();
  std::vector<size_t> pivot_col;
  size_t row = 0;
  for (size_t col = 0; col < cols && row < rows; ++col) {
    size_t piv = row;
    while (piv < rows && a[piv][col].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[row]);
    std::swap(b[piv], b[row]);
    for (size_t r = 0; r < rows; ++r) {
      if (r == row || a[r][col].is_zero()) continue;
      Rational factor = a[r][col] / a[row][col];
      for (size_t c = col; c < cols; ++c) a[r][c] -= factor * a[row][c];
      b[r] -= factor * b[row];
    }
    pivot_col.push_back(col);
    ++row;
  }
  if (pivot_col.size() < cols) return std::nullopt;  // underdetermined
  for (size_t r = row; r < rows; ++r)
    if (!b[r].is_zero()) return std::nullopt;  // inconsistent
  RatVec x(cols);
  for (size_t r = 0; r < pivot_col.size(); ++r) x[pivot_col[r]] = b[r] / a[r][pivot_col[r]];
  return x;
}

}  // namespace superhedge
