// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ksorbit/error.hpp"
#include "ksorbit/fourier.hpp"

namespace ks {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Sets the hardware rounding direction for the lifetime of the object and
// restores the previous one on exit. Rounding state is per thread.
class RoundingGuard {
 public:
  explicit RoundingGuard(int mode) : saved_(std::fegetround()) { std::fesetround(mode); }
  ~RoundingGuard() { std::fesetround(saved_); }
  RoundingGuard(const RoundingGuard&) = delete;
  RoundingGuard& operator=(const RoundingGuard&) = delete;

 private:
  int saved_;
};

// Directed-rounding scalar primitives. They assume round-to-nearest on entry
// and detect the rounding error exactly (TwoSum / FMA residuals), stepping to
// the neighbouring float only when the nearest result is on the wrong side.
namespace rnd {

double add_up(double a, double b);
double add_down(double a, double b);
double sub_up(double a, double b);
double sub_down(double a, double b);
double mul_up(double a, double b);
double mul_down(double a, double b);
double div_up(double a, double b);
double div_down(double a, double b);
double sqrt_up(double x);
double sqrt_down(double x);
inline double next_up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
inline double next_down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }

}  // namespace rnd

// Closed interval [lo, hi] of doubles.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double x) : lo(x), hi(x) {}  // NOLINT: point intervals convert implicitly
  Interval(double l, double h);

  double mid() const;
  double rad_up() const;  // upper bound of the radius about mid()
  double width() const { return hi - lo; }
  double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  double mig() const;
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval abs(const Interval& x);
Interval sqr(const Interval& x);
Interval sqrt(const Interval& x);
Interval hull(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);
// Transcendentals: libm result widened outward by kTranscendentalUlps ulps.
Interval exp(const Interval& x);
Interval log(const Interval& x);
Interval pow(const Interval& x, const Interval& y);  // x > 0
Interval pow_int(const Interval& x, int n);
Interval pi_interval();

inline constexpr int kTranscendentalUlps = 2;
const char* transcendental_route();

// Dense interval matrix stored as infimum / supremum point matrices.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(Eigen::Index rows, Eigen::Index cols);
  IntervalMatrix(RowMatrix inf, RowMatrix sup);
  static IntervalMatrix point(const RowMatrix& m);

  Eigen::Index rows() const { return inf_.rows(); }
  Eigen::Index cols() const { return inf_.cols(); }
  const RowMatrix& inf() const { return inf_; }
  const RowMatrix& sup() const { return sup_; }
  RowMatrix& inf() { return inf_; }
  RowMatrix& sup() { return sup_; }

  Interval operator()(Eigen::Index i, Eigen::Index j) const { return {inf_(i, j), sup_(i, j)}; }
  void set(Eigen::Index i, Eigen::Index j, const Interval& x) {
    inf_(i, j) = x.lo;
    sup_(i, j) = x.hi;
  }
  bool contains(const RowMatrix& m) const;
  RowMatrix midpoint() const;

 private:
  RowMatrix inf_;
  RowMatrix sup_;
};

// Number of dense float matrix products issued by rump_matmul since start.
std::uint64_t dense_product_count();

// Enclosure C of the product A*B using four dense float products under
// directed rounding (midpoint-radius form).
IntervalMatrix rump_matmul(const IntervalMatrix& A, const IntervalMatrix& B, int threads = 1);

// Plain round-to-nearest product through the same dense kernel.
RowMatrix float_matmul(const RowMatrix& A, const RowMatrix& B);

// Index map: which Fourier mode each vector entry / matrix row represents.
// An entry with k1 < 0 is a scalar (frequency) component of weight 1.
inline constexpr ModeIndex kScalarMode{-1, 0, false};

struct BasisMap {
  std::vector<ModeIndex> modes;
  // The bordered layout: the scalar followed by the flat modes of degrees (d1,d2).
  static BasisMap bordered(int d1, int d2, Parity parity = Parity::kOdd);
  static BasisMap flat(int d1, int d2, Parity parity = Parity::kOdd);
  std::size_t size() const { return modes.size(); }
};

Interval weight_interval(const ModeIndex& m, const WeightParams& w);
std::vector<Interval> weight_table(const BasisMap& map, const WeightParams& w);

struct NormBound {
  double value = 0.0;  // certified upper bound
  WeightParams weights;
  std::size_t dimension = 0;
};

NormBound weighted_vector_norm(std::span<const Interval> v, const BasisMap& map,
                               const WeightParams& w);
NormBound weighted_vector_norm(std::span<const double> v, const BasisMap& map,
                               const WeightParams& w);
// sup_j sum_i |T_ij| M(i) / M(j), outward rounded.
NormBound weighted_operator_norm(const IntervalMatrix& T, const BasisMap& rows,
                                 const BasisMap& cols, const WeightParams& w);
NormBound weighted_operator_norm(const RowMatrix& T, const BasisMap& rows,
                                 const BasisMap& cols, const WeightParams& w);
// The per-column quantities whose supremum is the operator norm.
std::vector<double> weighted_column_norms(const IntervalMatrix& T, const BasisMap& rows,
                                          const BasisMap& cols, const WeightParams& w);
std::vector<double> weighted_column_norms(const RowMatrix& T, const BasisMap& rows,
                                          const BasisMap& cols, const WeightParams& w);

}  // namespace ks
