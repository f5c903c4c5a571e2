// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/interval.hpp"

#include <algorithm>

namespace ks {

namespace rnd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMax = std::numeric_limits<double>::max();
// Below this magnitude FMA residuals may be inexact (subnormal range).
constexpr double kTiny = 0x1p-960;

// Exact error of s = fl(a + b): a + b = s + e (Knuth TwoSum).
inline double two_sum_err(double a, double b, double s) {
  const double bb = s - a;
  return (a - (s - bb)) + (b - bb);
}

inline double fix_overflow_up(double s) { return s == -kInf ? -kMax : s; }
inline double fix_overflow_down(double s) { return s == kInf ? kMax : s; }

}  // namespace

double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return std::isfinite(a) && std::isfinite(b) ? fix_overflow_up(s) : s;
  return two_sum_err(a, b, s) > 0.0 ? next_up(s) : s;
}

double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return std::isfinite(a) && std::isfinite(b) ? fix_overflow_down(s) : s;
  return two_sum_err(a, b, s) < 0.0 ? next_down(s) : s;
}

double sub_up(double a, double b) { return add_up(a, -b); }
double sub_down(double a, double b) { return add_down(a, -b); }

double mul_up(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return std::isfinite(a) && std::isfinite(b) ? fix_overflow_up(p) : p;
  if (a == 0.0 || b == 0.0) return p;
  if (std::abs(p) < kTiny) return next_up(p);
  return std::fma(a, b, -p) > 0.0 ? next_up(p) : p;
}

double mul_down(double a, double b) {
  const double p = a * b;
  if (!std::isfinite(p)) return std::isfinite(a) && std::isfinite(b) ? fix_overflow_down(p) : p;
  if (a == 0.0 || b == 0.0) return p;
  if (std::abs(p) < kTiny) return next_down(p);
  return std::fma(a, b, -p) < 0.0 ? next_down(p) : p;
}

double div_up(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q)) return std::isfinite(a) && b != 0.0 ? fix_overflow_up(q) : q;
  if (a == 0.0) return q;
  if (std::abs(q) < kTiny || !std::isfinite(b)) return next_up(q);
  // a - q b = r exactly; a/b - q has the sign of r/b.
  const double r = std::fma(-q, b, a);
  return (r != 0.0 && ((r > 0.0) == (b > 0.0))) ? next_up(q) : q;
}

double div_down(double a, double b) {
  const double q = a / b;
  if (!std::isfinite(q)) return std::isfinite(a) && b != 0.0 ? fix_overflow_down(q) : q;
  if (a == 0.0) return q;
  if (std::abs(q) < kTiny || !std::isfinite(b)) return next_down(q);
  const double r = std::fma(-q, b, a);
  return (r != 0.0 && ((r > 0.0) != (b > 0.0))) ? next_down(q) : q;
}

double sqrt_up(double x) {
  const double s = std::sqrt(x);
  if (!std::isfinite(s) || s == 0.0) return s;
  return std::fma(-s, s, x) > 0.0 ? next_up(s) : s;
}

double sqrt_down(double x) {
  const double s = std::sqrt(x);
  if (!std::isfinite(s) || s == 0.0) return s;
  return std::fma(-s, s, x) < 0.0 ? next_down(s) : s;
}

}  // namespace rnd

Interval::Interval(double l, double h) : lo(l), hi(h) {
  if (std::isnan(l) || std::isnan(h) || l > h) {
    fail(ErrorCode::kInvalidArgument, "Interval: require lo <= hi and no NaN");
  }
}

double Interval::mid() const {
  if (lo == -hi) return 0.0;
  const double m = 0.5 * lo + 0.5 * hi;
  return std::isfinite(m) ? m : 0.0;
}

double Interval::rad_up() const {
  const double m = mid();
  return std::max(rnd::sub_up(hi, m), rnd::sub_up(m, lo));
}

double Interval::mig() const { return contains_zero() ? 0.0 : std::min(std::abs(lo), std::abs(hi)); }

Interval operator+(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = rnd::add_down(a.lo, b.lo);
  r.hi = rnd::add_up(a.hi, b.hi);
  return r;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = rnd::sub_down(a.lo, b.hi);
  r.hi = rnd::sub_up(a.hi, b.lo);
  return r;
}

Interval operator*(const Interval& a, const Interval& b) {
  // Degenerate fast path for point-times-interval is common in assembly.
  const double l1 = rnd::mul_down(a.lo, b.lo), l2 = rnd::mul_down(a.lo, b.hi);
  const double l3 = rnd::mul_down(a.hi, b.lo), l4 = rnd::mul_down(a.hi, b.hi);
  const double h1 = rnd::mul_up(a.lo, b.lo), h2 = rnd::mul_up(a.lo, b.hi);
  const double h3 = rnd::mul_up(a.hi, b.lo), h4 = rnd::mul_up(a.hi, b.hi);
  Interval r;
  r.lo = std::min(std::min(l1, l2), std::min(l3, l4));
  r.hi = std::max(std::max(h1, h2), std::max(h3, h4));
  return r;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    fail(ErrorCode::kDivisionByZeroInterval, "interval division by an interval containing zero");
  }
  const double l1 = rnd::div_down(a.lo, b.lo), l2 = rnd::div_down(a.lo, b.hi);
  const double l3 = rnd::div_down(a.hi, b.lo), l4 = rnd::div_down(a.hi, b.hi);
  const double h1 = rnd::div_up(a.lo, b.lo), h2 = rnd::div_up(a.lo, b.hi);
  const double h3 = rnd::div_up(a.hi, b.lo), h4 = rnd::div_up(a.hi, b.hi);
  Interval r;
  r.lo = std::min(std::min(l1, l2), std::min(l3, l4));
  r.hi = std::max(std::max(h1, h2), std::max(h3, h4));
  return r;
}

Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }
Interval& Interval::operator/=(const Interval& o) { return *this = *this / o; }

Interval abs(const Interval& x) {
  if (x.lo >= 0.0) return x;
  if (x.hi <= 0.0) return -x;
  Interval r;
  r.lo = 0.0;
  r.hi = std::max(-x.lo, x.hi);
  return r;
}

Interval sqr(const Interval& x) {
  const Interval a = abs(x);
  Interval r;
  r.lo = rnd::mul_down(a.lo, a.lo);
  r.hi = rnd::mul_up(a.hi, a.hi);
  return r;
}

Interval sqrt(const Interval& x) {
  require(x.lo >= 0.0, "interval sqrt of negative interval");
  Interval r;
  r.lo = rnd::sqrt_down(x.lo);
  r.hi = rnd::sqrt_up(x.hi);
  return r;
}

Interval hull(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = std::min(a.lo, b.lo);
  r.hi = std::max(a.hi, b.hi);
  return r;
}

Interval max(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = std::max(a.lo, b.lo);
  r.hi = std::max(a.hi, b.hi);
  return r;
}

namespace {

double widen_up(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = rnd::next_up(x);
  return x;
}
double widen_down(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = rnd::next_down(x);
  return x;
}

}  // namespace

const char* transcendental_route() {
  return "libm exp/log in round-to-nearest, widened outward by 2 ulp";
}

Interval exp(const Interval& x) {
  Interval r;
  r.lo = std::max(0.0, widen_down(std::exp(x.lo), kTranscendentalUlps));
  r.hi = widen_up(std::exp(x.hi), kTranscendentalUlps);
  if (x.lo == 0.0) r.lo = std::min(r.lo, 1.0);
  if (x.hi == 0.0) r.hi = std::max(r.hi, 1.0);
  return r;
}

Interval log(const Interval& x) {
  require(x.lo > 0.0, "interval log of non-positive interval");
  Interval r;
  r.lo = widen_down(std::log(x.lo), kTranscendentalUlps);
  r.hi = widen_up(std::log(x.hi), kTranscendentalUlps);
  if (x.lo == 1.0) r.lo = 0.0;  // log(1) = 0 exactly
  if (x.hi == 1.0) r.hi = 0.0;
  return r;
}

Interval pow(const Interval& x, const Interval& y) {
  if (y.lo == 0.0 && y.hi == 0.0) return Interval(1.0);
  return exp(y * log(x));
}

Interval pow_int(const Interval& x, int n) {
  require(n >= 0, "pow_int: negative exponent");
  if (n == 0) return Interval(1.0);
  if (n % 2 == 0) {
    Interval h = pow_int(x, n / 2);
    return sqr(h);
  }
  return x * pow_int(x, n - 1);
}

Interval pi_interval() {
  Interval r;
  r.lo = 0x1.921fb54442d18p+1;  // below pi
  r.hi = rnd::next_up(r.lo);
  return r;
}

IntervalMatrix::IntervalMatrix(Eigen::Index rows, Eigen::Index cols)
    : inf_(RowMatrix::Zero(rows, cols)), sup_(RowMatrix::Zero(rows, cols)) {}

IntervalMatrix::IntervalMatrix(RowMatrix inf, RowMatrix sup)
    : inf_(std::move(inf)), sup_(std::move(sup)) {
  if (inf_.rows() != sup_.rows() || inf_.cols() != sup_.cols()) {
    fail(ErrorCode::kDimensionMismatch, "IntervalMatrix: inf/sup shapes differ");
  }
  for (Eigen::Index i = 0; i < inf_.size(); ++i) {
    if (!(inf_.data()[i] <= sup_.data()[i])) {
      fail(ErrorCode::kInvalidArgument, "IntervalMatrix: inf must be <= sup entrywise");
    }
  }
}

IntervalMatrix IntervalMatrix::point(const RowMatrix& m) { return IntervalMatrix(m, m); }

bool IntervalMatrix::contains(const RowMatrix& m) const {
  if (m.rows() != rows() || m.cols() != cols()) return false;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!(inf_.data()[i] <= m.data()[i] && m.data()[i] <= sup_.data()[i])) return false;
  }
  return true;
}

RowMatrix IntervalMatrix::midpoint() const {
  RowMatrix m(rows(), cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = Interval{inf_.data()[i], sup_.data()[i]}.mid();
  }
  return m;
}

BasisMap BasisMap::bordered(int d1, int d2, Parity parity) {
  BasisMap map = flat(d1, d2, parity);
  map.modes.insert(map.modes.begin(), kScalarMode);
  return map;
}

BasisMap BasisMap::flat(int d1, int d2, Parity parity) {
  const TrigPoly2D shape(d1, d2, parity);
  BasisMap map;
  map.modes.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) map.modes[i] = shape.mode_at(i);
  return map;
}

Interval weight_interval(const ModeIndex& m, const WeightParams& w) {
  if (m.k1 < 0) return Interval(1.0);
  const double k1 = std::abs(m.k1), k2 = std::abs(m.k2);
  Interval out = exp(Interval(w.r) * Interval(k1 + k2));
  if (w.s1 != 0.0) out = out * pow(Interval(1.0 + k1), Interval(w.s1));
  if (w.s2 != 0.0) out = out * pow(Interval(1.0 + k2), Interval(w.s2));
  return out;
}

std::vector<Interval> weight_table(const BasisMap& map, const WeightParams& w) {
  std::vector<Interval> t(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) t[i] = weight_interval(map.modes[i], w);
  return t;
}

NormBound weighted_vector_norm(std::span<const Interval> v, const BasisMap& map,
                               const WeightParams& w) {
  if (v.size() != map.size()) fail(ErrorCode::kDimensionMismatch, "weighted_vector_norm: map size");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = v[i].mag();
    if (m == 0.0) continue;
    s = rnd::add_up(s, rnd::mul_up(m, weight_interval(map.modes[i], w).hi));
  }
  return {s, w, v.size()};
}

NormBound weighted_vector_norm(std::span<const double> v, const BasisMap& map,
                               const WeightParams& w) {
  std::vector<Interval> iv(v.begin(), v.end());
  return weighted_vector_norm(iv, map, w);
}

namespace {

template <class MagAt>
std::vector<double> column_norms_impl(Eigen::Index rows, Eigen::Index cols, MagAt mag,
                                      const BasisMap& rmap, const BasisMap& cmap,
                                      const WeightParams& w) {
  if (static_cast<std::size_t>(rows) != rmap.size() ||
      static_cast<std::size_t>(cols) != cmap.size()) {
    fail(ErrorCode::kDimensionMismatch, "weighted norm: index map does not match matrix");
  }
  const auto rw = weight_table(rmap, w);
  const auto cw = weight_table(cmap, w);
  std::vector<double> acc(cols, 0.0);
  {
    // Sums of non-negative products rounded upward are upper bounds.
    RoundingGuard up(FE_UPWARD);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double wi = rw[i].hi;
      for (Eigen::Index j = 0; j < cols; ++j) acc[j] += mag(i, j) * wi;
    }
    for (Eigen::Index j = 0; j < cols; ++j) acc[j] = acc[j] / cw[j].lo;
  }
  return acc;
}

}  // namespace

std::vector<double> weighted_column_norms(const IntervalMatrix& T, const BasisMap& rows,
                                          const BasisMap& cols, const WeightParams& w) {
  const double* lo = T.inf().data();
  const double* hi = T.sup().data();
  const Eigen::Index nc = T.cols();
  return column_norms_impl(
      T.rows(), T.cols(),
      [&](Eigen::Index i, Eigen::Index j) {
        return std::max(std::abs(lo[i * nc + j]), std::abs(hi[i * nc + j]));
      },
      rows, cols, w);
}

std::vector<double> weighted_column_norms(const RowMatrix& T, const BasisMap& rows,
                                          const BasisMap& cols, const WeightParams& w) {
  const double* d = T.data();
  const Eigen::Index nc = T.cols();
  return column_norms_impl(
      T.rows(), T.cols(), [&](Eigen::Index i, Eigen::Index j) { return std::abs(d[i * nc + j]); },
      rows, cols, w);
}

NormBound weighted_operator_norm(const IntervalMatrix& T, const BasisMap& rows,
                                 const BasisMap& cols, const WeightParams& w) {
  const auto c = weighted_column_norms(T, rows, cols, w);
  return {c.empty() ? 0.0 : *std::max_element(c.begin(), c.end()), w, cols.size()};
}

NormBound weighted_operator_norm(const RowMatrix& T, const BasisMap& rows,
                                 const BasisMap& cols, const WeightParams& w) {
  const auto c = weighted_column_norms(T, rows, cols, w);
  return {c.empty() ? 0.0 : *std::max_element(c.begin(), c.end()), w, cols.size()};
}

}  // namespace ks
