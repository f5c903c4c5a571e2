// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ks {

// Weight M(k1,k2) = (1+|k1|)^s1 (1+|k2|)^s2 exp(r(|k1|+|k2|)) of the space X_M.
struct WeightParams {
  double r = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;

  void validate() const;
  double weight(int k1, int k2) const {
    double m = std::exp(r * (std::abs(k1) + std::abs(k2)));
    if (s1 != 0.0) m *= std::pow(1.0 + std::abs(k1), s1);
    if (s2 != 0.0) m *= std::pow(1.0 + std::abs(k2), s2);
    return m;
  }
};

enum class Parity { kOdd, kEven };  // parity in x

constexpr Parity operator*(Parity a, Parity b) {
  return a == b ? Parity::kEven : Parity::kOdd;
}

const char* parity_name(Parity p);

// Identifies one real coefficient: the x-mode k1, the theta-mode k2 and
// whether it multiplies sin(k2 theta) (b-coefficient) or cos(k2 theta).
struct ModeIndex {
  int k1 = 0;
  int k2 = 0;
  bool sine = false;
  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

// Finite sine/cosine series in (theta, x).
//   odd:  sum_{k1>=1} sum_{k2>=0} [a cos(k2 th) + b sin(k2 th)] sin(k1 x)
//   even: same with cos(k1 x), k1 >= 0
// b_{k1,0} is not stored. The flat ordering used by matrices groups each
// x-mode into a block of 2*d2+1 entries: a_{k1,0}, a_{k1,1}, b_{k1,1}, ...
class TrigPoly2D {
 public:
  TrigPoly2D() : TrigPoly2D(1, 0, Parity::kOdd) {}
  TrigPoly2D(int d1, int d2, Parity parity);

  static TrigPoly2D from_coeffs(int d1, int d2, Parity parity,
                                std::vector<double> a, std::vector<double> b);
  static TrigPoly2D from_flat(int d1, int d2, Parity parity,
                              std::span<const double> flat);

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  Parity parity() const { return parity_; }
  int k1_min() const { return parity_ == Parity::kOdd ? 1 : 0; }
  int rows() const { return d1_ - k1_min() + 1; }
  std::size_t size() const { return a_.size() + b_.size(); }

  // Unchecked element access; k1 in [k1_min, d1], k2 in [0, d2] ([1, d2] for b).
  double a(int k1, int k2) const { return a_[row(k1) * (d2_ + 1) + k2]; }
  double& a(int k1, int k2) { return a_[row(k1) * (d2_ + 1) + k2]; }
  double b(int k1, int k2) const { return b_[row(k1) * d2_ + (k2 - 1)]; }
  double& b(int k1, int k2) { return b_[row(k1) * d2_ + (k2 - 1)]; }

  // Zero outside the stored range.
  double coef(int k1, int k2, bool sine) const;
  double& at(const ModeIndex& m) { return m.sine ? b(m.k1, m.k2) : a(m.k1, m.k2); }
  double at(const ModeIndex& m) const { return m.sine ? b(m.k1, m.k2) : a(m.k1, m.k2); }
  bool contains(int k1, int k2) const {
    return k1 >= k1_min() && k1 <= d1_ && k2 >= 0 && k2 <= d2_;
  }

  std::span<const double> coeffs_a() const { return a_; }
  std::span<const double> coeffs_b() const { return b_; }

  std::size_t flat_index(int k1, int k2, bool sine) const {
    return static_cast<std::size_t>(row(k1)) * (2 * d2_ + 1) +
           (k2 == 0 ? 0 : 2 * k2 - (sine ? 0 : 1));
  }
  ModeIndex mode_at(std::size_t flat) const;
  std::vector<double> to_flat() const;

  bool is_zero() const;
  bool all_finite() const;
  double max_abs() const;

  TrigPoly2D& operator+=(const TrigPoly2D& o);
  TrigPoly2D& operator-=(const TrigPoly2D& o);
  TrigPoly2D& operator*=(double s);
  friend TrigPoly2D operator+(TrigPoly2D x, const TrigPoly2D& y) { return x += y; }
  friend TrigPoly2D operator-(TrigPoly2D x, const TrigPoly2D& y) { return x -= y; }
  friend TrigPoly2D operator*(double s, TrigPoly2D x) { return x *= s; }

 private:
  int row(int k1) const { return k1 - k1_min(); }

  int d1_;
  int d2_;
  Parity parity_;
  std::vector<double> a_;
  std::vector<double> b_;
};

// Emits the (up to four) terms of the product of two basis functions
//   X_k1(x) T_k2(theta) * X_l1(x) T_l2(theta)
// as emit(m1, m2, sine, factor) with factor = +-1/4, indices normalised to
// m >= 0 and terms with sin(0) dropped. Output parity is pu * pv.
template <class Emit>
inline void product_terms(Parity pu, int k1, int k2, bool ks, Parity pv,
                          int l1, int l2, bool ls, Emit&& emit) {
  // x factor: sin or cos of (k1 - l1) and (k1 + l1)
  const bool x_sine = (pu != pv);
  double xd = 0.5, xs = 0.5;  // coefficients of the difference and sum terms
  if (pu == Parity::kOdd && pv == Parity::kOdd) xs = -0.5;
  if (pu == Parity::kEven && pv == Parity::kOdd) xd = -0.5;
  int xm[2] = {k1 - l1, k1 + l1};
  double xc[2] = {xd, xs};
  for (int i = 0; i < 2; ++i) {
    if (xm[i] < 0) {
      xm[i] = -xm[i];
      if (x_sine) xc[i] = -xc[i];
    }
    if (x_sine && xm[i] == 0) xc[i] = 0.0;
  }
  const bool t_sine = (ks != ls);
  double td = 0.5, ts = 0.5;
  if (ks && ls) ts = -0.5;
  if (!ks && ls) td = -0.5;
  int tm[2] = {k2 - l2, k2 + l2};
  double tc[2] = {td, ts};
  for (int i = 0; i < 2; ++i) {
    if (tm[i] < 0) {
      tm[i] = -tm[i];
      if (t_sine) tc[i] = -tc[i];
    }
    if (t_sine && tm[i] == 0) tc[i] = 0.0;
  }
  for (int i = 0; i < 2; ++i) {
    if (xc[i] == 0.0) continue;
    for (int j = 0; j < 2; ++j) {
      if (tc[j] == 0.0) continue;
      emit(xm[i], tm[j], t_sine, xc[i] * tc[j]);
    }
  }
}

// Sum of (|a|+|b|) M(k1,k2).
double norm_M(const TrigPoly2D& u, const WeightParams& w);

// Exact product; degrees add, parities multiply.
TrigPoly2D product(const TrigPoly2D& u, const TrigPoly2D& v);
TrigPoly2D product_convolution(const TrigPoly2D& u, const TrigPoly2D& v);
TrigPoly2D product_pseudospectral(const TrigPoly2D& u, const TrigPoly2D& v);
// Above this many coefficient pairs product() switches to the grid route.
inline std::size_t product_crossover_pairs = 2'000'000;

TrigPoly2D dx(const TrigPoly2D& u);
TrigPoly2D dtheta(const TrigPoly2D& u);
TrigPoly2D apply_L(const TrigPoly2D& u, double nu);

// Symbol of L + c at x-mode k1.
inline double shifted_symbol(int k1, double nu, double c) {
  const double k2 = static_cast<double>(k1) * k1;
  return nu * k2 * k2 - k2 + c;
}

// S_c = f d_theta + L + c and its blockwise inverse.
TrigPoly2D apply_Sc(const TrigPoly2D& u, double f, double nu, double c);
TrigPoly2D apply_Sc_inv(const TrigPoly2D& v, double f, double nu, double c);

TrigPoly2D truncate(const TrigPoly2D& u, int d1, int d2);
TrigPoly2D pad(const TrigPoly2D& u, int d1, int d2);
// Truncates or pads each direction independently.
TrigPoly2D resize(const TrigPoly2D& u, int d1, int d2);
// u(theta + phase, x)
TrigPoly2D shift_theta(const TrigPoly2D& u, double phase);

struct Grid2D {
  int n_theta = 0;
  int n_x = 0;
  std::vector<double> values;  // row-major, row = theta index

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * n_x + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * n_x + j]; }
  static double theta(int i, int n) { return 2.0 * M_PI * i / n; }
};

double eval_point(const TrigPoly2D& u, double theta, double x);
// Samples on theta_i = 2 pi i / n_theta, x_j = 2 pi j / n_x.
Grid2D eval_grid(const TrigPoly2D& u, int n_theta, int n_x);
// Forward transform; exact when the sampled function has degrees <= (d1,d2)
// and the grid satisfies n_theta > 2 d2, n_x > 2 d1.
TrigPoly2D from_grid(const Grid2D& g, int d1, int d2, Parity parity);

}  // namespace ks
