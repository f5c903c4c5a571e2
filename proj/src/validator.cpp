// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/validator.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <thread>

#include "operator_terms.hpp"

namespace ks {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Interval sqrt2() { return sqrt(Interval(2.0)); }

// max{ max_{x > d1} 1/p(x), 1/(f (d2+1)) }, p(x) = nu x^4 - x^2 + c.
Interval tail_symbol_max(double nu, double c, double f, int d1, int d2) {
  require(std::isfinite(nu) && nu > 0.0 && std::isfinite(f) && f > 0.0, "tail constants: nu, f must be positive");
  require(d1 >= 0 && d2 >= 0, "tail constants: degrees must be non-negative");
  const Interval inu(nu);
  require((Interval(c) * inu).lo >= 1.0 || c >= rnd::div_up(1.0, nu), "tail constants: c must be >= 1/nu");
  const Interval x(static_cast<double>(d1) + 1.0);
  Interval px_inv;
  if ((Interval(2.0) * inu * x * x).lo >= 1.0) {
    // p is increasing on [d1+1, inf)
    px_inv = Interval(1.0) / detail::shifted_symbol_t<Interval>(d1 + 1, nu, c);
  } else {
    px_inv = Interval(4.0) * inu / Interval(3.0);
  }
  const Interval th = Interval(1.0) / (Interval(f) * Interval(static_cast<double>(d2) + 1.0));
  return max(px_inv, th);
}

Interval fourth_root_term(double nu) {
  return pow(Interval(4.0) / (Interval(3.0) * Interval(nu)), Interval(0.25));
}

std::size_t bordered_size(int d1, int d2) {
  return static_cast<std::size_t>(d1) * (2 * static_cast<std::size_t>(d2) + 1) + 1;
}

// E = e1 / (1 - alpha - rho_-) and the contraction hypotheses at radius E.
struct Radius {
  bool ok = false;
  std::string stage;
  double stage_bound = 0.0;
  double discriminant = 0.0;
  double rho_minus = 0.0;
  double E = 0.0;
  double b_condition = 0.0;
  double lipschitz = 0.0;
};

Radius existence_radius(double alpha, double e1, double e2) {
  Radius r;
  if (!(alpha < 1.0)) {
    r.stage = "alpha";
    r.stage_bound = alpha;
    return r;
  }
  const Interval one_m_a = Interval(1.0) - Interval(alpha);
  const Interval disc = one_m_a * one_m_a - Interval(4.0) * Interval(e1) * Interval(e2);
  r.discriminant = disc.lo;
  if (!(disc.lo > 0.0)) {
    r.stage = "discriminant";
    r.stage_bound = disc.lo;
    return r;
  }
  const Interval sd = sqrt(disc);
  const Interval rho = one_m_a - sd;
  r.rho_minus = rho.hi;
  const Interval E = Interval(e1) / (one_m_a - rho);
  r.E = E.hi;
  const Interval Ehi(E.hi);
  const Interval bcond = Interval(e1) + Interval(e2) * Ehi * Ehi;
  const Interval lip = Interval(2.0) * Interval(e2) * Ehi;
  r.b_condition = bcond.hi;
  r.lipschitz = lip.hi;
  if (!(bcond.hi < (one_m_a * Ehi).lo) || !(lip.hi < one_m_a.lo)) {
    r.stage = "contraction";
    r.stage_bound = std::max(bcond.hi / (one_m_a * Ehi).lo, lip.hi / one_m_a.lo);
    return r;
  }
  r.ok = true;
  return r;
}

// d_theta of the odd series in the flat layout, as intervals.
std::vector<Interval> dtheta_interval(const TrigPoly2D& u) {
  std::vector<Interval> g(u.size());
  for (int k1 = 1; k1 <= u.d1(); ++k1) {
    for (int k2 = 1; k2 <= u.d2(); ++k2) {
      const Interval k(static_cast<double>(k2));
      g[u.flat_index(k1, k2, false)] = k * Interval(u.b(k1, k2));
      g[u.flat_index(k1, k2, true)] = -(k * Interval(u.a(k1, k2)));
    }
  }
  return g;
}

// Sum of exact products x*y*z accumulated with error-free transformations
// (TwoProduct, TwoSum) and a compensation term; enclosure() returns a
// certified interval around the exact sum.
class CompensatedSum {
 public:
  void add_product3(double x, double y, double z) {
    const double p = x * y;
    if (p == 0.0 && (x == 0.0 || y == 0.0)) return;
    const double pabs = std::abs(p);
    if (!(pabs > kTiny) || !(pabs < kHuge) || !(std::abs(p * z) > kTiny)) {
      // outside the range where the transformations are exact: charge the magnitude
      slack_ = rnd::add_up(slack_, rnd::mul_up(rnd::mul_up(std::abs(x), std::abs(y)) * 2.0, std::abs(z)));
      return;
    }
    const double pe = std::fma(x, y, -p);  // x*y = p + pe
    const double q = p * z;
    const double qe = std::fma(p, z, -q);  // p*z = q + qe
    const double r = qe + pe * z;          // x*y*z = q + r + O(eps^2 |q|)
    add(q);
    add(r);
    approx_ = rnd::add_up(approx_, std::abs(q));
  }

  Interval enclosure() const {
    constexpr double eps = 0x1p-53;
    const double res = s_ + c_;
    // |res - sum| <= (eps |res| + gamma_{n}^2 sum|x|) / (1 - eps), Ogita-Rump-Oishi Sum2
    const double n = static_cast<double>(count_) + 1.0;
    const double gamma = rnd::div_up(rnd::mul_up(n, eps), rnd::sub_down(1.0, rnd::mul_up(n, eps)));
    double err = rnd::add_up(rnd::mul_up(eps, std::abs(res)), rnd::mul_up(rnd::mul_up(gamma, gamma), abs_));
    err = rnd::mul_up(err, 1.0 + 4.0 * eps);
    // rounding of r inside add_product3: |pe z| <= eps |q| (1 + eps), fl error <= 2 eps |r|
    err = rnd::add_up(err, rnd::mul_up(approx_, 8.0 * eps * eps));
    err = rnd::add_up(err, slack_);
    return {rnd::sub_down(res, err), rnd::add_up(res, err)};
  }

 private:
  static constexpr double kTiny = 0x1p-900;
  static constexpr double kHuge = 0x1p+900;

  void add(double x) {
    const double s = s_ + x;
    const double bp = s - s_;
    const double e = (s_ - (s - bp)) + (x - bp);
    s_ = s;
    c_ += e;
    abs_ = rnd::add_up(abs_, std::abs(x));
    ++count_;
  }

  double s_ = 0.0, c_ = 0.0;
  double abs_ = 0.0;
  double approx_ = 0.0;
  double slack_ = 0.0;
  long count_ = 0;
};

template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
  const std::size_t t = static_cast<std::size_t>(std::max(1, threads));
  if (t == 1 || n < 2) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t j = w; j < n; j += t) body(j);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ValidationFailed::ValidationFailed(std::string stage, double bound, ValidationCertificate cert)
    : Error(ErrorCode::kValidationFailed,
            "validation failed at stage " + stage + " (certified value " + std::to_string(bound) + ")"),
      stage_(std::move(stage)),
      bound_(bound),
      cert_(std::move(cert)) {}

const char* k3_mode_name(K3Mode m) { return m == K3Mode::kSup ? "sup" : "conservative"; }

double validation_shift(double nu) {
  require(std::isfinite(nu) && nu > 0.0, "validation_shift: nu must be positive");
  return rnd::div_up(1.0, nu);
}

Interval compute_K1(double nu, double c, double f, int d1, int d2) {
  return sqrt2() * tail_symbol_max(nu, c, f, d1, d2);
}

Interval compute_K2(double nu, double c, double f, int d1, int d2) {
  const Interval m = tail_symbol_max(nu, c, f, d1, d2);
  return sqrt2() * fourth_root_term(nu) * pow(m, Interval(0.75));
}

Interval compute_K3(const TrigPoly2D& u, const WeightParams& w, K3Mode mode) {
  w.validate();
  double acc = 0.0;
  for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1) {
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      const double s = rnd::add_up(std::abs(u.a(k1, k2)), k2 > 0 ? std::abs(u.b(k1, k2)) : 0.0);
      if (s == 0.0) continue;
      const double t = rnd::mul_up(s, weight_interval({k1, k2, false}, w).hi);
      acc = mode == K3Mode::kSup ? std::max(acc, t) : rnd::add_up(acc, t);
    }
  }
  return {0.0, acc};
}

std::pair<Interval, Interval> banach2_bounds(double nu, double f) {
  require(std::isfinite(nu) && nu > 0.0 && std::isfinite(f) && f > 0.0, "banach2_bounds: nu, f must be positive");
  return {sqrt2() * fourth_root_term(nu), sqrt2() / Interval(f)};
}

RowMatrix build_Bhat(const RowMatrix& A_F) {
  require(A_F.rows() == A_F.cols(), "build_Bhat: matrix must be square");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A_F);
  if (!(lu.rcond() > 1e-15)) fail(ErrorCode::kSingularLinearSystem, "build_Bhat: matrix is singular");
  RowMatrix B = lu.inverse();
  if (!B.allFinite()) fail(ErrorCode::kSingularLinearSystem, "build_Bhat: inverse is not finite");
  B.diagonal().array() -= 1.0;
  return B;
}

IntervalMatrix assemble_A_interval(const OrbitCandidate& cand, double c, int threads) {
  cand.validate();
  const TrigPoly2D& u0 = cand.u;
  const int d1 = u0.d1(), d2 = u0.d2();
  const std::size_t n = u0.size();
  IntervalMatrix A(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  A.inf().setZero();
  A.sup().setZero();

  const std::vector<Interval> g = dtheta_interval(u0);
  const Interval pi2 = sqr(pi_interval());
  for (std::size_t j = 0; j < n; ++j) A.set(0, static_cast<Eigen::Index>(j + 1), pi2 * g[j]);

  std::vector<Interval> col0 = g;
  detail::apply_sc_inv_flat(col0, d1, d2, cand.f, cand.nu, c);
  for (std::size_t i = 0; i < n; ++i) A.set(static_cast<Eigen::Index>(i + 1), 0, col0[i]);

  parallel_for(n, threads, [&](std::size_t j) {
    std::vector<Interval> col(n, Interval(0.0));
    const ModeIndex l = u0.mode_at(j);
    detail::for_each_dx_product_term<Interval>(u0, l, [&](int m1, int m2, bool sine, const Interval& v) {
      if (m1 <= d1 && m2 <= d2) col[detail::flat_odd(m1, m2, sine, d2)] += v;
    });
    col[j] -= Interval(c);
    detail::apply_sc_inv_flat(col, d1, d2, cand.f, cand.nu, c);
    col[j] += Interval(1.0);
    const auto jj = static_cast<Eigen::Index>(j + 1);
    for (std::size_t i = 0; i < n; ++i) A.set(static_cast<Eigen::Index>(i + 1), jj, col[i]);
  });
  return A;
}

std::vector<Interval> preconditioned_residual_interval(const OrbitCandidate& cand, double c) {
  cand.validate();
  const TrigPoly2D& u = cand.u;
  const int D1 = 2 * u.d1(), D2 = 2 * u.d2();
  const std::size_t w = 2 * static_cast<std::size_t>(D2) + 1;
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(D1) * w);

  // 1/2 d_x(u^2) = sum_{k,l} u_k u_l (-m1/2) fac over the product terms
  for (std::size_t j = 0; j < u.size(); ++j) {
    const ModeIndex l = u.mode_at(j);
    const double ul = u.at(l);
    if (ul == 0.0) continue;
    for (int k1 = 1; k1 <= u.d1(); ++k1) {
      for (int k2 = 0; k2 <= u.d2(); ++k2) {
        for (int s = 0; s < 2; ++s) {
          const bool ks = s == 1;
          if (ks && k2 == 0) continue;
          const double uk = ks ? u.b(k1, k2) : u.a(k1, k2);
          if (uk == 0.0) continue;
          product_terms(Parity::kOdd, k1, k2, ks, Parity::kOdd, l.k1, l.k2, l.sine,
                        [&](int m1, int m2, bool sine, double fac) {
                          if (m1 == 0) return;
                          // fac * m1 / 2 is exact: fac = +-1/4, m1 a small integer
                          acc[detail::flat_odd(m1, m2, sine, D2)].add_product3(uk, ul, -0.5 * fac * m1);
                        });
        }
      }
    }
  }

  // f d_theta u + L u with L = nu k^4 - k^2 on sin(k x)
  for (int k1 = 1; k1 <= u.d1(); ++k1) {
    const double k = static_cast<double>(k1);
    const double k4 = k * k * k * k;
    for (int k2 = 0; k2 <= u.d2(); ++k2) {
      const double a = u.a(k1, k2);
      const double b = k2 > 0 ? u.b(k1, k2) : 0.0;
      const double q = static_cast<double>(k2);
      CompensatedSum& ea = acc[detail::flat_odd(k1, k2, false, D2)];
      ea.add_product3(cand.nu, a, k4);
      ea.add_product3(-a, k, k);
      ea.add_product3(cand.f, b, q);
      if (k2 > 0) {
        CompensatedSum& eb = acc[detail::flat_odd(k1, k2, true, D2)];
        eb.add_product3(cand.nu, b, k4);
        eb.add_product3(-b, k, k);
        eb.add_product3(-cand.f, a, q);
      }
    }
  }

  std::vector<Interval> e(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) e[i] = acc[i].enclosure();
  detail::apply_sc_inv_flat(e, D1, D2, cand.f, cand.nu, c);
  for (Interval& x : e) x = -x;
  return e;
}

std::pair<int, int> matrix_stage_degrees(int d1, int d2, std::size_t max_dimension) {
  require(d1 >= 1 && d2 >= 0, "matrix_stage_degrees: invalid degrees");
  int t1 = d1, t2 = d2;
  while (bordered_size(t1, t2) > max_dimension && t1 > 1) --t1;
  while (bordered_size(t1, t2) > max_dimension && t2 > 0) --t2;
  return {t1, t2};
}

ValidationCertificate validate(const ValidationInput& in) {
  const OrbitCandidate& cand = in.cand;
  cand.validate();
  in.w.validate();
  ValidationCertificate cert;
  cert.nu = cand.nu;
  cert.f = cand.f;
  cert.d1 = cand.u.d1();
  cert.d2 = cand.u.d2();
  cert.w = in.w;
  cert.k3 = in.k3;
  cert.transcendental_route = transcendental_route();
  const double c = in.c > 0.0 ? in.c : validation_shift(cand.nu);
  require(c >= rnd::div_up(1.0, cand.nu) || (Interval(c) * Interval(cand.nu)).lo >= 1.0,
          "validate: shift c must be >= 1/nu");
  cert.c = c;

  auto stage_log = [&](const char* name, double v) {
    if (in.log) std::fprintf(stderr, "validate stage=%s bound=%.6e\n", name, v);
  };
  auto failed = [&](const std::string& stage, double v) {
    cert.success = false;
    cert.failed_stage = stage;
    cert.failed_bound = v;
    stage_log(("FAILED:" + stage).c_str(), v);
    throw ValidationFailed(stage, v, cert);
  };

  // (1) truncation
  auto t0 = Clock::now();
  if (in.dt1 > 0 || in.dt2 > 0) {
    require(in.dt1 >= 1 && in.dt1 <= cert.d1 && in.dt2 >= 0 && in.dt2 <= cert.d2,
            "validate: reduced degrees must satisfy 1 <= dt1 <= d1, 0 <= dt2 <= d2");
    cert.dt1 = in.dt1;
    cert.dt2 = in.dt2;
  } else {
    std::tie(cert.dt1, cert.dt2) = matrix_stage_degrees(cert.d1, cert.d2, in.max_dimension);
  }
  OrbitCandidate low = cand;
  low.u = truncate(cand.u, cert.dt1, cert.dt2);
  cert.dimension = bordered_size(cert.dt1, cert.dt2);

  // (2) delta >= ||u~ - u||_M
  {
    std::vector<Interval> diff(cand.u.size(), Interval(0.0));
    for (std::size_t i = 0; i < cand.u.size(); ++i) {
      const ModeIndex m = cand.u.mode_at(i);
      if (m.k1 > cert.dt1 || m.k2 > cert.dt2) diff[i] = Interval(cand.u.at(m));
    }
    cert.delta = weighted_vector_norm(diff, BasisMap::flat(cert.d1, cert.d2), in.w).value;
  }
  stage_log("delta", cert.delta);

  // (3) interval A_F and float B
  const IntervalMatrix A = assemble_A_interval(low, c, in.threads);
  cert.timings.emplace_back("assemble", seconds_since(t0));
  t0 = Clock::now();
  RowMatrix Binv = build_Bhat(A.midpoint());
  Binv.diagonal().array() += 1.0;
  cert.timings.emplace_back("inverse", seconds_since(t0));

  // (4) alpha1 >= ||(Id + B^)(Id + A^) - Id||
  const BasisMap map = BasisMap::bordered(cert.dt1, cert.dt2);
  t0 = Clock::now();
  {
    IntervalMatrix P = rump_matmul(IntervalMatrix::point(Binv), A, in.threads);
    for (Eigen::Index i = 0; i < P.rows(); ++i) P.set(i, i, P(i, i) - Interval(1.0));
    cert.alpha1 = weighted_operator_norm(P, map, map, in.w).value;
  }
  cert.timings.emplace_back("alpha1", seconds_since(t0));
  stage_log("alpha1", cert.alpha1);

  // (5)-(6) tail constants
  cert.K1 = compute_K1(cand.nu, c, cand.f, cert.dt1, cert.dt2).hi;
  cert.K2 = compute_K2(cand.nu, c, cand.f, cert.dt1, cert.dt2).hi;
  cert.K3 = compute_K3(low.u, in.w, in.k3).hi;
  cert.alpha2 = (Interval(c) * Interval(cert.K1) + Interval(cert.K2) * Interval(cert.K3)).hi;
  stage_log("K1", cert.K1);
  stage_log("K2", cert.K2);
  stage_log("K3", cert.K3);
  stage_log("alpha2", cert.alpha2);

  // (7) b >= 1 + ||B^||
  {
    IntervalMatrix Bh = IntervalMatrix::point(Binv);
    for (Eigen::Index i = 0; i < Bh.rows(); ++i) Bh.set(i, i, Bh(i, i) - Interval(1.0));
    cert.b = rnd::add_up(1.0, weighted_operator_norm(Bh, map, map, in.w).value);
  }
  stage_log("b", cert.b);

  // (8) alpha
  cert.alpha = (Interval(std::max(cert.alpha1, cert.alpha2)) +
                Interval(cert.K2) * Interval(cert.delta) * Interval(cert.b)).hi;
  stage_log("alpha", cert.alpha);
  if (!(cert.alpha < 1.0)) failed("alpha", cert.alpha);

  // (9)-(11) residual and quadratic constants
  t0 = Clock::now();
  {
    const std::vector<Interval> et = preconditioned_residual_interval(cand, c);
    cert.e0 = weighted_vector_norm(et, BasisMap::flat(2 * cert.d1, 2 * cert.d2), in.w).value;
  }
  cert.timings.emplace_back("residual", seconds_since(t0));
  stage_log("e0", cert.e0);
  cert.e1 = rnd::mul_up(cert.b, cert.e0);
  const auto [bdx, bdth] = banach2_bounds(cand.nu, cand.f);
  cert.banach_dx = bdx.hi;
  cert.banach_dtheta = bdth.hi;
  cert.e2 = (Interval(cert.b) * (bdth + Interval(0.5) * bdx)).hi;
  stage_log("e1", cert.e1);
  stage_log("e2", cert.e2);

  // (12) discriminant and radius
  const Radius r = existence_radius(cert.alpha, cert.e1, cert.e2);
  cert.discriminant = r.discriminant;
  cert.rho_minus = r.rho_minus;
  cert.E = r.E;
  cert.b_condition = r.b_condition;
  cert.lipschitz = r.lipschitz;
  if (!r.ok) failed(r.stage, r.stage_bound);
  stage_log("E", cert.E);
  cert.success = true;
  return cert;
}

double scaled_existence_radius(const ValidationCertificate& cert, int d1, int d2, double r) {
  require(r >= 0.0 && std::isfinite(r), "improve_analyticity: radius must be non-negative");
  const Interval s = exp(Interval(r) * Interval(static_cast<double>(d1)) * Interval(static_cast<double>(d2)));
  const double a = (Interval(cert.alpha) * s).hi;
  const double e1 = (Interval(cert.e1) * s * s).hi;
  const double e2 = (Interval(cert.e2) * s).hi;
  const Radius rad = existence_radius(a, e1, e2);
  return rad.ok ? rad.E : -1.0;
}

std::pair<double, double> improve_analyticity(ValidationCertificate& cert, int d1, int d2) {
  require(d1 >= 1 && d2 >= 0, "improve_analyticity: invalid degrees");
  if (!cert.success || scaled_existence_radius(cert, d1, d2, 0.0) < 0.0) {
    fail(ErrorCode::kNoImprovement, "improve_analyticity: base certificate does not certify");
  }
  constexpr int kGrid = 60;
  const double lo = 1e-12, hi = 1e-2;
  double best = 0.0, next = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (kGrid - 1));
    if (scaled_existence_radius(cert, d1, d2, r) >= 0.0) {
      best = r;
    } else {
      next = r;
      break;
    }
  }
  if (next > 0.0) {
    double a = best, b = next;
    for (int it = 0; it < 60 && b - a > 1e-3 * a; ++it) {
      const double m = 0.5 * (a + b);
      if (scaled_existence_radius(cert, d1, d2, m) >= 0.0) a = m; else b = m;
    }
    best = a;
  }
  const double E = scaled_existence_radius(cert, d1, d2, best);
  cert.improved = true;
  cert.r_hat = best;
  cert.E_r_hat = E;
  return {best, E};
}

}  // namespace ks
