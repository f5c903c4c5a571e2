// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/newton.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cstdio>

#include "operator_terms.hpp"

namespace ks {

namespace {

double resolve_shift(double c, double nu) { return c > 0.0 ? c : default_shift(nu); }

}  // namespace

TrigPoly2D residual(const OrbitCandidate& cand) {
  cand.validate();
  const TrigPoly2D& u = cand.u;
  const int D1 = 2 * u.d1(), D2 = 2 * u.d2();
  TrigPoly2D e = dx(product(u, u));
  e *= 0.5;
  TrigPoly2D lin = dtheta(u);
  lin *= cand.f;
  lin += apply_L(u, cand.nu);
  e += pad(lin, D1, D2);
  return e;
}

TrigPoly2D preconditioned_residual(const OrbitCandidate& cand, double c) {
  TrigPoly2D e = apply_Sc_inv(residual(cand), cand.f, cand.nu, resolve_shift(c, cand.nu));
  e *= -1.0;
  return e;
}

std::vector<double> phase_row(const TrigPoly2D& u0) {
  require(u0.parity() == Parity::kOdd, "phase_row: u0 must be odd");
  const TrigPoly2D g = dtheta(u0);
  std::vector<double> row = g.to_flat();
  const double pi2 = M_PI * M_PI;
  for (double& v : row) v *= pi2;  // k2 = 0 entries of d_theta u0 are zero already
  return row;
}

BorderedMatrix assemble_A(const OrbitCandidate& cand, double c) {
  cand.validate();
  c = resolve_shift(c, cand.nu);
  const TrigPoly2D& u0 = cand.u;
  const int d1 = u0.d1(), d2 = u0.d2();
  const std::size_t n = u0.size();
  BorderedMatrix A;
  A.d1 = d1;
  A.d2 = d2;
  A.m = RowMatrix::Zero(n + 1, n + 1);

  const auto row = phase_row(u0);
  for (std::size_t j = 0; j < n; ++j) A.m(0, j + 1) = row[j];

  const auto sigma_col = apply_Sc_inv(dtheta(u0), cand.f, cand.nu, c).to_flat();
  for (std::size_t i = 0; i < n; ++i) A.m(i + 1, 0) = sigma_col[i];

  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    const ModeIndex l = u0.mode_at(j);
    detail::for_each_dx_product_term<double>(u0, l, [&](int m1, int m2, bool sine, double v) {
      if (m1 <= d1 && m2 <= d2) col[detail::flat_odd(m1, m2, sine, d2)] += v;
    });
    col[j] -= c;
    detail::apply_sc_inv_flat(col, d1, d2, cand.f, cand.nu, c);
    col[j] += 1.0;
    for (std::size_t i = 0; i < n; ++i) A.m(i + 1, j + 1) = col[i];
  }
  return A;
}

std::vector<double> apply_A(const OrbitCandidate& cand, double c, std::span<const double> z) {
  cand.validate();
  c = resolve_shift(c, cand.nu);
  const TrigPoly2D& u0 = cand.u;
  const int d1 = u0.d1(), d2 = u0.d2();
  if (z.size() != u0.size() + 1) fail(ErrorCode::kDimensionMismatch, "apply_A: vector size");
  const double sigma = z[0];
  const TrigPoly2D delta = TrigPoly2D::from_flat(d1, d2, Parity::kOdd, z.subspan(1));

  TrigPoly2D v = dx(product(u0, delta));
  TrigPoly2D sc_part = dtheta(u0);
  sc_part *= sigma;
  TrigPoly2D shifted = delta;
  shifted *= -c;
  sc_part += shifted;
  v += pad(sc_part, v.d1(), v.d2());
  TrigPoly2D out = truncate(apply_Sc_inv(v, cand.f, cand.nu, c), d1, d2);
  out += delta;

  std::vector<double> r(z.size());
  const auto row = phase_row(u0);
  const auto dflat = delta.to_flat();
  double s = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * dflat[i];
  r[0] = s;
  const auto of = out.to_flat();
  std::copy(of.begin(), of.end(), r.begin() + 1);
  return r;
}

OrbitCandidate fix_theta_phase(const OrbitCandidate& cand) {
  if (cand.u.d2() < 1) return cand;
  const double a = cand.u.a(1, 1), b = cand.u.b(1, 1);
  if (a == 0.0 && b == 0.0) return cand;
  OrbitCandidate out = cand;
  out.u = shift_theta(cand.u, std::atan2(b, a));
  out.u.b(1, 1) = 0.0;
  return out;
}

NewtonReport newton_solve(const OrbitCandidate& seed, const NewtonOptions& opt) {
  seed.validate();
  require(opt.tol > 0.0 && opt.max_iter >= 1, "newton: tol and max_iter must be positive");
  opt.weights.validate();
  const double c = resolve_shift(opt.c, seed.nu);

  const double g_norm = norm_M(dtheta(seed.u), opt.weights);
  if (!(g_norm > opt.degenerate_tol * std::max(1.0, norm_M(seed.u, opt.weights)))) {
    fail(ErrorCode::kDegenerateSeed, "seed has (almost) no theta dependence; phase condition degenerate");
  }

  NewtonReport rep;
  OrbitCandidate cand = seed;
  const int d1 = cand.u.d1(), d2 = cand.u.d2();
  for (int it = 0;; ++it) {
    const TrigPoly2D et = preconditioned_residual(cand, c);
    const double r = norm_M(et, opt.weights);
    if (!std::isfinite(r)) fail(ErrorCode::kSingularLinearSystem, "newton: residual is not finite");
    rep.iterates.push_back({r, 0.0});
    if (opt.log) std::fprintf(stderr, "newton iter=%d residual=%.6e f=%.15g\n", it, r, cand.f);
    if (r < opt.tol) {
      rep.converged = true;
      rep.stop_reason = "residual";
      break;
    }
    if (rep.converged) break;  // stopped on a small step; residual recorded above
    if (it >= opt.max_iter) break;

    const BorderedMatrix A = assemble_A(cand, c);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.m.rows());
    const auto et_low = truncate(et, d1, d2).to_flat();
    for (std::size_t i = 0; i < et_low.size(); ++i) rhs[i + 1] = et_low[i];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A.m);
    if (!(lu.rcond() > 1e-15)) fail(ErrorCode::kSingularLinearSystem, "newton: bordered matrix is singular");
    const Eigen::VectorXd z = lu.solve(rhs);
    if (!z.allFinite()) fail(ErrorCode::kSingularLinearSystem, "newton: solve produced non-finite values");

    const TrigPoly2D delta =
        TrigPoly2D::from_flat(d1, d2, Parity::kOdd, std::span<const double>(z.data() + 1, z.size() - 1));
    cand.f += z[0];
    cand.u += delta;
    const double step = std::abs(z[0]) + norm_M(delta, opt.weights);
    rep.iterates.back().step = step;
    if (!(cand.f > 0.0)) fail(ErrorCode::kSingularLinearSystem, "newton: frequency became non-positive");
    if (step < opt.tol) {
      rep.converged = true;
      rep.stop_reason = "step";
    }
  }

  for (std::size_t k = 0; k + 1 < rep.iterates.size(); ++k) {
    const double r0 = rep.iterates[k].residual;
    if (r0 < 1e-3 && r0 > 0.0) {
      rep.quadratic_constant = std::max(rep.quadratic_constant, rep.iterates[k + 1].residual / (r0 * r0));
    }
  }
  if (!rep.converged) {
    fail(ErrorCode::kMaxIterExceeded, "newton: no convergence within max_iter (last residual " +
                                          std::to_string(rep.iterates.back().residual) + ")");
  }
  if (opt.fix_phase) cand = fix_theta_phase(cand);
  rep.final_residual = norm_M(preconditioned_residual(cand, c), opt.weights);
  rep.final = std::move(cand);
  return rep;
}

ModeTail mode_tail(const TrigPoly2D& u) {
  const double total = norm_M(u, {});
  ModeTail t;
  if (total == 0.0) return t;
  const int x_from = u.d1() - std::max(1, (u.d1() + 9) / 10) + 1;
  const int th_from = u.d2() - std::max(1, (u.d2() + 9) / 10) + 1;
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      const double m = std::abs(u.a(k1, k2)) + (k2 > 0 ? std::abs(u.b(k1, k2)) : 0.0);
      if (k1 >= x_from) t.x_tail += m;
      if (k2 >= th_from && u.d2() > 0) t.theta_tail += m;
    }
  }
  t.x_tail /= total;
  t.theta_tail /= total;
  return t;
}

NewtonReport newton_solve_with_growth(const OrbitCandidate& seed, const NewtonOptions& opt,
                                      const ModeGrowthOptions& growth) {
  NewtonReport rep = newton_solve(seed, opt);
  for (int round = 0; round < growth.max_rounds; ++round) {
    const ModeTail t = mode_tail(rep.final.u);
    int d1 = rep.final.u.d1(), d2 = rep.final.u.d2();
    if (t.x_tail > growth.threshold) d1 = std::min(growth.max_d1, static_cast<int>(std::ceil(d1 * growth.factor)));
    if (t.theta_tail > growth.threshold) d2 = std::min(growth.max_d2, static_cast<int>(std::ceil(d2 * growth.factor)));
    if (d1 == rep.final.u.d1() && d2 == rep.final.u.d2()) break;
    OrbitCandidate next = rep.final;
    next.u = pad(rep.final.u, d1, d2);
    if (opt.log) std::fprintf(stderr, "newton grow d1=%d d2=%d\n", d1, d2);
    NewtonReport r2 = newton_solve(next, opt);
    r2.iterates.insert(r2.iterates.begin(), rep.iterates.begin(), rep.iterates.end());
    rep = std::move(r2);
  }
  return rep;
}

ContinuationResult continue_orbit(const OrbitCandidate& start, double nu_target, double dnu_max,
                                  const ContinuationOptions& opt) {
  start.validate();
  require(std::isfinite(nu_target) && nu_target > 0.0, "continuation: target nu must be positive");
  require(dnu_max >= 0.0, "continuation: dnu_max must be >= 0");
  ContinuationResult res;
  res.family.push_back(start);
  res.newton_steps.push_back(0);
  if (dnu_max == 0.0 || nu_target == start.nu) return res;

  const double dir = nu_target > start.nu ? 1.0 : -1.0;
  double nu = start.nu;
  double dnu = dnu_max;
  double last_dnu = 0.0;
  while (dir * (nu_target - nu) > 0.0) {
    const double h = std::min(dnu, std::abs(nu_target - nu));
    const double trial = std::abs(nu_target - (nu + dir * h)) < 1e-15 * nu_target ? nu_target : nu + dir * h;
    OrbitCandidate pred = res.family.back();
    if (res.family.size() >= 2 && last_dnu > 0.0) {
      // secant predictor
      const OrbitCandidate& prev = res.family[res.family.size() - 2];
      const double s = h / last_dnu;
      pred.f += s * (pred.f - prev.f);
      TrigPoly2D du = pred.u;
      du -= prev.u;
      du *= s;
      pred.u += du;
    }
    pred.nu = trial;
    bool ok = false;
    try {
      NewtonReport rep = newton_solve(pred, opt.newton);
      if (rep.final_residual < opt.newton.tol) {
        res.family.push_back(std::move(rep.final));
        res.newton_steps.push_back(static_cast<int>(rep.iterates.size()) - 1);
        ok = true;
      }
    } catch (const Error&) {
    }
    if (ok) {
      nu = trial;
      last_dnu = h;
      dnu = std::min(dnu * opt.grow, dnu_max);
    } else {
      dnu *= 0.5;
      if (dnu < opt.dnu_min) {
        res.step_underflow = true;
        res.message = "step underflow at nu=" + std::to_string(nu);
        break;
      }
    }
  }
  return res;
}

}  // namespace ks
