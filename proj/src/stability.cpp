// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "operator_terms.hpp"

namespace ks {

const char* stability_method_name(StabilityMethod m) {
  return m == StabilityMethod::kMonodromy ? "monodromy" : "operator-spectrum";
}

StabilityReport monodromy(const OrbitCandidate& cand, int n_x, const MonodromyOptions& opt) {
  require(std::isfinite(cand.nu) && cand.nu > 0.0 && std::isfinite(cand.f) && cand.f > 0.0,
          "monodromy: nu and f must be positive");
  require(cand.u.parity() == Parity::kOdd, "monodromy: u must be odd");
  require(n_x >= 1, "monodromy: n_x must be >= 1");
  require(opt.margin >= 0.0, "monodromy: margin must be >= 0");
  const int N = n_x;
  const TrigPoly2D& u = cand.u;
  const int du = std::min(u.d1(), N);
  const double inv_f = 1.0 / cand.f;

  std::vector<double> lam(N);
  for (int k = 1; k <= N; ++k) lam[k - 1] = static_cast<double>(k) * k - cand.nu * std::pow(k, 4);

  std::vector<double> U(N + 1), cs(u.d2() + 1), sn(u.d2() + 1);
  Eigen::MatrixXd J(N, N);
  auto rhs = [&](double theta, std::span<const double> y, std::span<double> dy) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      cs[k2] = std::cos(k2 * theta);
      sn[k2] = std::sin(k2 * theta);
    }
    std::fill(U.begin(), U.end(), 0.0);
    for (int k1 = 1; k1 <= du; ++k1) {
      double s = u.a(k1, 0);
      for (int k2 = 1; k2 <= u.d2(); ++k2) s += u.a(k1, k2) * cs[k2] + u.b(k1, k2) * sn[k2];
      U[k1] = s;
    }
    // -d_x(u v)_k = (k/2)(sum_l (U_{k+l} v_l + U_l v_{k+l}) - sum_{l+m=k} U_l v_m)
    J.setZero();
    for (int k = 1; k <= N; ++k) {
      const double h = 0.5 * k;
      for (int l = 1; k + l <= N; ++l) {
        J(k - 1, l - 1) += h * U[k + l];
        J(k - 1, k + l - 1) += h * U[l];
      }
      for (int l = 1; l < k; ++l) J(k - 1, k - l - 1) -= h * U[l];
      J(k - 1, k - 1) += lam[k - 1];
    }
    J *= inv_f;
    Eigen::Map<const Eigen::MatrixXd> V(y.data(), N, N);
    Eigen::Map<Eigen::MatrixXd> dV(dy.data(), N, N);
    dV.noalias() = J * V;
  };

  std::vector<double> y(static_cast<std::size_t>(N) * N, 0.0);
  for (int k = 0; k < N; ++k) y[static_cast<std::size_t>(k) * N + k] = 1.0;
  Dopri5 integ(rhs, y.size(), opt.integrator);
  integ.integrate(y, 0.0, 2.0 * M_PI);

  Eigen::Map<const Eigen::MatrixXd> M(y.data(), N, N);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::kEigensolverFailure, "monodromy: eigensolver failed");

  StabilityReport rep;
  rep.method = StabilityMethod::kMonodromy;
  rep.f = cand.f;
  rep.n_x = N;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](auto x, auto y) { return std::abs(x) > std::abs(y); });
  rep.total_eigenvalues = rep.eigenvalues.size();
  for (const auto& z : rep.eigenvalues) {
    const double m = std::abs(z);
    if (std::abs(m - 1.0) <= opt.margin) ++rep.marginal;
    else if (m > 1.0) ++rep.unstable_dimension;
  }
  return rep;
}

RowMatrix stability_operator_matrix(const OrbitCandidate& cand, int d1, int d2) {
  require(std::isfinite(cand.nu) && cand.nu > 0.0 && std::isfinite(cand.f) && cand.f > 0.0,
          "operator_spectrum: nu and f must be positive");
  require(cand.u.parity() == Parity::kOdd, "operator_spectrum: u must be odd");
  require(d1 >= 1 && d2 >= 0, "operator_spectrum: invalid degrees");
  const TrigPoly2D shape(d1, d2, Parity::kOdd);
  const std::size_t n = shape.size();
  RowMatrix M = RowMatrix::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const ModeIndex l = shape.mode_at(j);
    const double k = l.k1;
    M(j, j) += cand.nu * k * k * k * k - k * k;
    if (l.k2 > 0) {
      // f d_theta: cos -> -k2 sin, sin -> k2 cos
      const double q = cand.f * l.k2;
      if (l.sine) M(detail::flat_odd(l.k1, l.k2, false, d2), j) += q;
      else M(detail::flat_odd(l.k1, l.k2, true, d2), j) -= q;
    }
    detail::for_each_dx_product_term<double>(cand.u, l, [&](int m1, int m2, bool sine, double v) {
      if (m1 <= d1 && m2 <= d2) M(detail::flat_odd(m1, m2, sine, d2), j) += v;
    });
  }
  return M;
}

StabilityReport operator_spectrum(const OrbitCandidate& cand, int d1, int d2, std::optional<double> a,
                                  double margin) {
  require(margin >= 0.0, "operator_spectrum: margin must be >= 0");
  const RowMatrix M = stability_operator_matrix(cand, d1, d2);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(M), false);
  if (es.info() != Eigen::Success) fail(ErrorCode::kEigensolverFailure, "operator_spectrum: eigensolver failed");

  StabilityReport rep;
  rep.method = StabilityMethod::kOperatorSpectrum;
  rep.f = cand.f;
  rep.d1 = d1;
  rep.d2 = d2;
  rep.strip_offset = a.value_or(-0.5 * cand.f);
  rep.total_eigenvalues = static_cast<std::size_t>(es.eigenvalues().size());
  // Eigenvalues on the strip edges come in conjugate pairs; the edge tolerance
  // keeps exactly one of a pair that the eigensolver splits around the edge.
  const double edge = 1e-8 * cand.f;
  const double lo = rep.strip_offset - edge, hi = rep.strip_offset + cand.f - edge;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (z.imag() >= lo && z.imag() < hi) rep.eigenvalues.push_back(z);
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](auto x, auto y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); });
  // the same margin as the multipliers, expressed on Re z = -log|lambda| / T
  const double re_margin = std::log1p(margin) * cand.f / (2.0 * M_PI);
  for (const auto& z : rep.eigenvalues) {
    if (std::abs(z.real()) <= re_margin) ++rep.marginal;
    else if (z.real() < 0.0) ++rep.unstable_dimension;
  }
  return rep;
}

std::complex<double> multiplier_exponent(std::complex<double> lambda, double f) {
  require(std::abs(lambda) > 0.0, "multiplier_exponent: multiplier must be non-zero");
  return -std::log(lambda) * (f / (2.0 * M_PI));
}

double distance_mod_if(std::complex<double> z, std::complex<double> w, double f) {
  const double di = z.imag() - w.imag();
  const double r = di - f * std::round(di / f);
  return std::abs(z.real() - w.real()) + std::abs(r);
}

StabilityCrossCheck cross_check(const StabilityReport& mono, const StabilityReport& op) {
  StabilityCrossCheck c;
  c.monodromy_unstable = mono.unstable_dimension;
  c.operator_unstable = op.unstable_dimension;
  c.agree = c.monodromy_unstable == c.operator_unstable;
  if (!c.agree) {
    c.warning = "unstable dimension differs: monodromy " + std::to_string(c.monodromy_unstable) +
                ", operator spectrum " + std::to_string(c.operator_unstable);
  }
  return c;
}

}  // namespace ks
