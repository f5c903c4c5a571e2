// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <mutex>
#include <string>

#include "ksorbit/error.hpp"

namespace ks {

namespace {

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void check_degrees(int d1, int d2, Parity parity) {
  require(d2 >= 0, "TrigPoly2D: d2 must be >= 0");
  require(parity == Parity::kOdd ? d1 >= 1 : d1 >= 0,
          "TrigPoly2D: d1 must be >= 1 (odd) or >= 0 (even)");
}

}  // namespace

void WeightParams::validate() const {
  require(std::isfinite(r) && std::isfinite(s1) && std::isfinite(s2),
          "weights must be finite");
  require(r >= 0.0 && s1 >= 0.0 && s2 >= 0.0, "weights must be >= 0");
}

const char* parity_name(Parity p) { return p == Parity::kOdd ? "odd" : "even"; }

TrigPoly2D::TrigPoly2D(int d1, int d2, Parity parity)
    : d1_(d1), d2_(d2), parity_(parity) {
  check_degrees(d1, d2, parity);
  a_.assign(static_cast<std::size_t>(rows()) * (d2 + 1), 0.0);
  b_.assign(static_cast<std::size_t>(rows()) * d2, 0.0);
}

TrigPoly2D TrigPoly2D::from_coeffs(int d1, int d2, Parity parity,
                                   std::vector<double> a, std::vector<double> b) {
  TrigPoly2D u(d1, d2, parity);
  if (a.size() != u.a_.size() || b.size() != u.b_.size()) {
    fail(ErrorCode::kDimensionMismatch,
         "TrigPoly2D: coefficient arrays do not match degrees");
  }
  u.a_ = std::move(a);
  u.b_ = std::move(b);
  require(u.all_finite(), "TrigPoly2D: coefficients must be finite");
  return u;
}

TrigPoly2D TrigPoly2D::from_flat(int d1, int d2, Parity parity,
                                 std::span<const double> flat) {
  TrigPoly2D u(d1, d2, parity);
  if (flat.size() != u.size()) {
    fail(ErrorCode::kDimensionMismatch, "TrigPoly2D: flat vector size mismatch");
  }
  for (std::size_t i = 0; i < flat.size(); ++i) u.at(u.mode_at(i)) = flat[i];
  return u;
}

double TrigPoly2D::coef(int k1, int k2, bool sine) const {
  if (!contains(k1, k2)) return 0.0;
  if (sine) return k2 == 0 ? 0.0 : b(k1, k2);
  return a(k1, k2);
}

ModeIndex TrigPoly2D::mode_at(std::size_t flat) const {
  const std::size_t block = 2 * static_cast<std::size_t>(d2_) + 1;
  ModeIndex m;
  m.k1 = static_cast<int>(flat / block) + k1_min();
  const int r = static_cast<int>(flat % block);
  if (r == 0) {
    m.k2 = 0;
    m.sine = false;
  } else {
    m.k2 = (r + 1) / 2;
    m.sine = (r % 2 == 0);
  }
  return m;
}

std::vector<double> TrigPoly2D::to_flat() const {
  std::vector<double> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(mode_at(i));
  return v;
}

bool TrigPoly2D::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](double x) { return x == 0.0; }) &&
         std::all_of(b_.begin(), b_.end(), [](double x) { return x == 0.0; });
}

bool TrigPoly2D::all_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); }) &&
         std::all_of(b_.begin(), b_.end(), [](double x) { return std::isfinite(x); });
}

double TrigPoly2D::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::abs(x));
  for (double x : b_) m = std::max(m, std::abs(x));
  return m;
}

TrigPoly2D& TrigPoly2D::operator+=(const TrigPoly2D& o) {
  if (o.parity_ != parity_) fail(ErrorCode::kInvalidArgument, "parity mismatch in +=");
  if (o.d1_ > d1_ || o.d2_ > d2_) *this = pad(*this, std::max(d1_, o.d1_), std::max(d2_, o.d2_));
  for (int k1 = o.k1_min(); k1 <= o.d1_; ++k1) {
    for (int k2 = 0; k2 <= o.d2_; ++k2) {
      a(k1, k2) += o.a(k1, k2);
      if (k2 > 0) b(k1, k2) += o.b(k1, k2);
    }
  }
  return *this;
}

TrigPoly2D& TrigPoly2D::operator-=(const TrigPoly2D& o) {
  TrigPoly2D neg = o;
  neg *= -1.0;
  return *this += neg;
}

TrigPoly2D& TrigPoly2D::operator*=(double s) {
  for (double& x : a_) x *= s;
  for (double& x : b_) x *= s;
  return *this;
}

double norm_M(const TrigPoly2D& u, const WeightParams& w) {
  double s = 0.0;
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      double c = std::abs(u.a(k1, k2));
      if (k2 > 0) c += std::abs(u.b(k1, k2));
      if (c != 0.0) s += c * w.weight(k1, k2);
    }
  }
  return s;
}

TrigPoly2D product_convolution(const TrigPoly2D& u, const TrigPoly2D& v) {
  TrigPoly2D out(u.d1() + v.d1(), u.d2() + v.d2(), u.parity() * v.parity());
  const std::size_t nu = u.size(), nv = v.size();
  std::vector<ModeIndex> mv(nv);
  std::vector<double> cv(nv);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    const ModeIndex m = v.mode_at(j);
    const double c = v.at(m);
    if (c == 0.0) continue;
    mv[kept] = m;
    cv[kept] = c;
    ++kept;
  }
  for (std::size_t i = 0; i < nu; ++i) {
    const ModeIndex mu = u.mode_at(i);
    const double cu = u.at(mu);
    if (cu == 0.0) continue;
    for (std::size_t j = 0; j < kept; ++j) {
      const double cc = cu * cv[j];
      product_terms(u.parity(), mu.k1, mu.k2, mu.sine, v.parity(), mv[j].k1,
                    mv[j].k2, mv[j].sine, [&](int m1, int m2, bool s, double f) {
                      out.at({m1, m2, s}) += f * cc;
                    });
    }
  }
  return out;
}

TrigPoly2D product_pseudospectral(const TrigPoly2D& u, const TrigPoly2D& v) {
  const int d1 = u.d1() + v.d1();
  const int d2 = u.d2() + v.d2();
  // Even grid sizes strictly above twice the output degree: no aliasing.
  const int nx = 2 * d1 + 2;
  const int nt = 2 * d2 + 2;
  Grid2D gu = eval_grid(u, nt, nx);
  const Grid2D gv = eval_grid(v, nt, nx);
  for (std::size_t i = 0; i < gu.values.size(); ++i) gu.values[i] *= gv.values[i];
  return from_grid(gu, d1, d2, u.parity() * v.parity());
}

TrigPoly2D product(const TrigPoly2D& u, const TrigPoly2D& v) {
  if (u.size() * v.size() > product_crossover_pairs) return product_pseudospectral(u, v);
  return product_convolution(u, v);
}

TrigPoly2D dx(const TrigPoly2D& u) {
  const Parity p = u.parity() == Parity::kOdd ? Parity::kEven : Parity::kOdd;
  TrigPoly2D out(std::max(u.d1(), 1), u.d2(), p);
  const double sign = u.parity() == Parity::kOdd ? 1.0 : -1.0;
  for (int k1 = std::max(u.k1_min(), 1); k1 <= u.d1(); ++k1) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      out.a(k1, k2) = sign * k1 * u.a(k1, k2);
      if (k2 > 0) out.b(k1, k2) = sign * k1 * u.b(k1, k2);
    }
  }
  return out;
}

TrigPoly2D dtheta(const TrigPoly2D& u) {
  TrigPoly2D out(u.d1(), u.d2(), u.parity());
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    for (int k2 = 1; k2 <= u.d2(); ++k2) {
      out.a(k1, k2) = k2 * u.b(k1, k2);
      out.b(k1, k2) = -k2 * u.a(k1, k2);
    }
  }
  return out;
}

TrigPoly2D apply_L(const TrigPoly2D& u, double nu) {
  TrigPoly2D out = u;
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    const double s = shifted_symbol(k1, nu, 0.0);
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      out.a(k1, k2) *= s;
      if (k2 > 0) out.b(k1, k2) *= s;
    }
  }
  return out;
}

TrigPoly2D apply_Sc(const TrigPoly2D& u, double f, double nu, double c) {
  TrigPoly2D out(u.d1(), u.d2(), u.parity());
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    const double p = shifted_symbol(k1, nu, c);
    out.a(k1, 0) = p * u.a(k1, 0);
    for (int k2 = 1; k2 <= u.d2(); ++k2) {
      const double q = f * k2;
      const double a = u.a(k1, k2), b = u.b(k1, k2);
      out.a(k1, k2) = p * a + q * b;
      out.b(k1, k2) = p * b - q * a;
    }
  }
  return out;
}

TrigPoly2D apply_Sc_inv(const TrigPoly2D& v, double f, double nu, double c) {
  TrigPoly2D out(v.d1(), v.d2(), v.parity());
  for (int k1 = v.k1_min(); k1 <= v.d1(); ++k1) {
    const double p = shifted_symbol(k1, nu, c);
    for (int k2 = 0; k2 <= v.d2(); ++k2) {
      const double q = f * k2;
      const double det = p * p + q * q;
      if (!(det > 0.0)) {
        fail(ErrorCode::kSingularBlock,
             "S_c block singular at k1=" + std::to_string(k1) + " k2=" + std::to_string(k2));
      }
      if (k2 == 0) {
        out.a(k1, 0) = v.a(k1, 0) / p;
        continue;
      }
      const double A = v.a(k1, k2), B = v.b(k1, k2);
      out.a(k1, k2) = (p * A - q * B) / det;
      out.b(k1, k2) = (p * B + q * A) / det;
    }
  }
  return out;
}

TrigPoly2D resize(const TrigPoly2D& u, int d1, int d2) {
  TrigPoly2D out(d1, d2, u.parity());
  const int m1 = std::min(d1, u.d1()), m2 = std::min(d2, u.d2());
  for (int k1 = u.k1_min(); k1 <= m1; ++k1) {
    for (int k2 = 0; k2 <= m2; ++k2) {
      out.a(k1, k2) = u.a(k1, k2);
      if (k2 > 0) out.b(k1, k2) = u.b(k1, k2);
    }
  }
  return out;
}

TrigPoly2D truncate(const TrigPoly2D& u, int d1, int d2) {
  require(d1 <= u.d1() && d2 <= u.d2(), "truncate: target degrees exceed source");
  return resize(u, d1, d2);
}

TrigPoly2D pad(const TrigPoly2D& u, int d1, int d2) {
  require(d1 >= u.d1() && d2 >= u.d2(), "pad: target degrees below source");
  return resize(u, d1, d2);
}

TrigPoly2D shift_theta(const TrigPoly2D& u, double phase) {
  TrigPoly2D out = u;
  for (int k2 = 1; k2 <= u.d2(); ++k2) {
    const double cs = std::cos(k2 * phase), sn = std::sin(k2 * phase);
    for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
      // a cos(k(t+p)) + b sin(k(t+p))
      const double a = u.a(k1, k2), b = u.b(k1, k2);
      out.a(k1, k2) = a * cs + b * sn;
      out.b(k1, k2) = b * cs - a * sn;
    }
  }
  return out;
}

double eval_point(const TrigPoly2D& u, double theta, double x) {
  double s = 0.0;
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    double inner = u.a(k1, 0);
    for (int k2 = 1; k2 <= u.d2(); ++k2) {
      inner += u.a(k1, k2) * std::cos(k2 * theta) + u.b(k1, k2) * std::sin(k2 * theta);
    }
    s += inner * (u.parity() == Parity::kOdd ? std::sin(k1 * x) : std::cos(k1 * x));
  }
  return s;
}

namespace {

Grid2D eval_grid_direct(const TrigPoly2D& u, int n_theta, int n_x) {
  Grid2D g{n_theta, n_x, std::vector<double>(static_cast<std::size_t>(n_theta) * n_x, 0.0)};
  // rows of x-coefficients at each theta, then synthesis in x
  std::vector<double> xc(u.d1() + 1);
  for (int i = 0; i < n_theta; ++i) {
    const double th = Grid2D::theta(i, n_theta);
    for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
      double inner = u.a(k1, 0);
      for (int k2 = 1; k2 <= u.d2(); ++k2) {
        inner += u.a(k1, k2) * std::cos(k2 * th) + u.b(k1, k2) * std::sin(k2 * th);
      }
      xc[k1] = inner;
    }
    for (int j = 0; j < n_x; ++j) {
      const double x = Grid2D::theta(j, n_x);
      double s = 0.0;
      for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
        s += xc[k1] * (u.parity() == Parity::kOdd ? std::sin(k1 * x) : std::cos(k1 * x));
      }
      g(i, j) = s;
    }
  }
  return g;
}

}  // namespace

Grid2D eval_grid(const TrigPoly2D& u, int n_theta, int n_x) {
  require(n_theta >= 1 && n_x >= 1, "eval_grid: grid sizes must be >= 1");
  if (n_x <= 2 * u.d1() || n_theta <= 2 * u.d2()) {
    return eval_grid_direct(u, n_theta, n_x);
  }
  const int nxh = n_x / 2 + 1;
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(n_theta) * nxh);
  std::fill(reinterpret_cast<double*>(spec),
            reinterpret_cast<double*>(spec) + 2 * static_cast<std::size_t>(n_theta) * nxh, 0.0);
  auto put = [&](int p, int q, std::complex<double> z) {
    const int pi = ((p % n_theta) + n_theta) % n_theta;
    spec[static_cast<std::size_t>(pi) * nxh + q][0] += z.real();
    spec[static_cast<std::size_t>(pi) * nxh + q][1] += z.imag();
  };
  const std::complex<double> I(0.0, 1.0);
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      const double a = u.a(k1, k2);
      const double b = k2 > 0 ? u.b(k1, k2) : 0.0;
      if (u.parity() == Parity::kOdd) {
        if (k2 == 0) {
          put(0, k1, -I * a / 2.0);
        } else {
          put(k2, k1, (-I * a - b) / 4.0);
          put(-k2, k1, (-I * a + b) / 4.0);
        }
      } else if (k1 == 0) {
        if (k2 == 0) {
          put(0, 0, a);
        } else {
          put(k2, 0, (a - I * b) / 2.0);
          put(-k2, 0, (a + I * b) / 2.0);
        }
      } else {
        if (k2 == 0) {
          put(0, k1, a / 2.0);
        } else {
          put(k2, k1, (a - I * b) / 4.0);
          put(-k2, k1, (a + I * b) / 4.0);
        }
      }
    }
  }
  Grid2D g{n_theta, n_x, std::vector<double>(static_cast<std::size_t>(n_theta) * n_x)};
  double* out = fftw_alloc_real(static_cast<std::size_t>(n_theta) * n_x);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_2d(n_theta, n_x, spec, out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::copy(out, out + g.values.size(), g.values.begin());
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  fftw_free(spec);
  return g;
}

TrigPoly2D from_grid(const Grid2D& g, int d1, int d2, Parity parity) {
  require(g.n_x > 2 * d1 && g.n_theta > 2 * d2, "from_grid: grid too coarse for degrees");
  const int nxh = g.n_x / 2 + 1;
  double* in = fftw_alloc_real(g.values.size());
  std::copy(g.values.begin(), g.values.end(), in);
  fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(g.n_theta) * nxh);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_2d(g.n_theta, g.n_x, in, spec, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  const double scale = 1.0 / (static_cast<double>(g.n_theta) * g.n_x);
  auto coef = [&](int p, int q) {
    const int pi = ((p % g.n_theta) + g.n_theta) % g.n_theta;
    const auto& c = spec[static_cast<std::size_t>(pi) * nxh + q];
    return std::complex<double>(c[0] * scale, c[1] * scale);
  };
  TrigPoly2D u(d1, d2, parity);
  for (int k1 = u.k1_min(); k1 <= d1; ++k1) {
    for (int k2 = 0; k2 <= d2; ++k2) {
      const std::complex<double> z = coef(k2, k1);
      if (parity == Parity::kOdd) {
        if (k2 == 0) {
          u.a(k1, 0) = -2.0 * z.imag();
        } else {
          u.a(k1, k2) = -4.0 * z.imag();
          u.b(k1, k2) = -4.0 * z.real();
        }
      } else {
        const double s = (k1 == 0 ? 1.0 : 2.0) * (k2 == 0 ? 1.0 : 2.0);
        u.a(k1, k2) = s * z.real();
        if (k2 > 0) u.b(k1, k2) = -s * z.imag();
      }
    }
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  fftw_free(in);
  return u;
}

}  // namespace ks
