// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ksorbit/flow.hpp"
#include "ksorbit/fourier.hpp"
#include "ksorbit/interval.hpp"

namespace ks::oracle {

namespace {

constexpr mpfr_prec_t kPrec = 256;

// RAII mpfr_t.
class Big {
 public:
  Big() { mpfr_init2(v_, kPrec); }
  explicit Big(double x) : Big() { mpfr_set_d(v_, x, MPFR_RNDN); }  // exact
  Big(const Big&) = delete;
  Big& operator=(const Big&) = delete;
  ~Big() { mpfr_clear(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

bool inside(const Interval& r, const Big& down, const Big& up) {
  return mpfr_cmp_d(down.get(), r.lo) >= 0 && mpfr_cmp_d(up.get(), r.hi) <= 0;
}

double random_scaled(std::mt19937_64& rng, int emin, int emax) {
  std::uniform_real_distribution<double> m(-1.0, 1.0);
  std::uniform_int_distribution<int> e(emin, emax);
  return std::ldexp(m(rng), e(rng));
}

Interval random_interval(std::mt19937_64& rng, int emin, int emax) {
  const double a = random_scaled(rng, emin, emax);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  const double r = std::abs(a) * (w(rng) < 0.2 ? 0.0 : std::pow(10.0, -16.0 * w(rng)));
  const double lo = a - r, hi = a + r;
  return Interval(std::min(lo, hi), std::max(lo, hi));
}

// Endpoints and one interior point.
std::vector<double> probes(std::mt19937_64& rng, const Interval& x) {
  std::uniform_real_distribution<double> t(0.0, 1.0);
  double m = x.lo + (x.hi - x.lo) * t(rng);
  m = std::clamp(m, x.lo, x.hi);
  return {x.lo, x.hi, m, x.mid()};
}

}  // namespace

Tally interval_scalar(std::size_t ops, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 7);
  Tally t;
  Big X, Y, down, up;
  for (std::size_t n = 0; n < ops; ++n) {
    const int op = pick(rng);
    Interval x = random_interval(rng, -30, 30), y = random_interval(rng, -30, 30);
    if (op == 3 && y.contains_zero()) y = Interval(1.0) + abs(y);
    if (op == 5 || op == 7) x = abs(x) + Interval(op == 7 ? 1e-300 : 0.0);
    if (op == 6) x = random_interval(rng, -6, 5);
    Interval r;
    switch (op) {
      case 0: r = x + y; break;
      case 1: r = x - y; break;
      case 2: r = x * y; break;
      case 3: r = x / y; break;
      case 4: r = sqr(x); break;
      case 5: r = sqrt(x); break;
      case 6: r = exp(x); break;
      default: r = log(x); break;
    }
    for (double xp : probes(rng, x)) {
      for (double yp : probes(rng, y)) {
        mpfr_set_d(X.get(), xp, MPFR_RNDN);
        mpfr_set_d(Y.get(), yp, MPFR_RNDN);
        for (mpfr_rnd_t rnd : {MPFR_RNDD, MPFR_RNDU}) {
          mpfr_ptr out = rnd == MPFR_RNDD ? down.get() : up.get();
          switch (op) {
            case 0: mpfr_add(out, X.get(), Y.get(), rnd); break;
            case 1: mpfr_sub(out, X.get(), Y.get(), rnd); break;
            case 2: mpfr_mul(out, X.get(), Y.get(), rnd); break;
            case 3: mpfr_div(out, X.get(), Y.get(), rnd); break;
            case 4: mpfr_sqr(out, X.get(), rnd); break;
            case 5: mpfr_sqrt(out, X.get(), rnd); break;
            case 6: mpfr_exp(out, X.get(), rnd); break;
            default: mpfr_log(out, X.get(), rnd); break;
          }
        }
        ++t.checks;
        if (!inside(r, down, up)) ++t.violations;
        if (op >= 4) break;  // unary: y is unused
      }
    }
  }
  return t;
}

Tally rump_corners(std::size_t instances, std::size_t samples, int max_n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, max_n);
  std::bernoulli_distribution coin(0.5);
  Tally t;
  Big acc, prod, a, b;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const int n = size(rng), m = size(rng), p = size(rng);
    IntervalMatrix A(n, m), B(m, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) A.set(i, j, random_interval(rng, -10, 10));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < p; ++j) B.set(i, j, random_interval(rng, -10, 10));
    const IntervalMatrix C = rump_matmul(A, B);
    RowMatrix As(n, m), Bs(m, p);
    for (std::size_t s = 0; s < samples; ++s) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) As(i, j) = coin(rng) ? A.inf()(i, j) : A.sup()(i, j);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < p; ++j) Bs(i, j) = coin(rng) ? B.inf()(i, j) : B.sup()(i, j);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) {
          mpfr_set_zero(acc.get(), 1);
          for (int k = 0; k < m; ++k) {
            mpfr_set_d(a.get(), As(i, k), MPFR_RNDN);
            mpfr_set_d(b.get(), Bs(k, j), MPFR_RNDN);
            mpfr_mul(prod.get(), a.get(), b.get(), MPFR_RNDN);  // exact: 106 bits
            mpfr_add(acc.get(), acc.get(), prod.get(), MPFR_RNDN);  // exact at 256 bits here
          }
          ++t.checks;
          if (mpfr_cmp_d(acc.get(), C.inf()(i, j)) < 0 || mpfr_cmp_d(acc.get(), C.sup()(i, j)) > 0) ++t.violations;
        }
    }
  }
  return t;
}

namespace {

const WeightParams kWeightSettings[5] = {
    {0.0, 0.0, 0.0}, {1e-12, 1e-12, 1e-12}, {0.1, 0.0, 0.0}, {0.0, 1.0, 1.0}, {0.05, 0.5, 2.0}};

// M(k1,k2) at 256 bits.
void big_weight(Big& out, const ModeIndex& m, const WeightParams& w) {
  if (m.k1 < 0) {
    mpfr_set_ui(out.get(), 1, MPFR_RNDN);
    return;
  }
  Big t, base, ex;
  mpfr_set_d(t.get(), w.r, MPFR_RNDN);
  mpfr_mul_si(t.get(), t.get(), std::abs(m.k1) + std::abs(m.k2), MPFR_RNDN);
  mpfr_exp(out.get(), t.get(), MPFR_RNDN);
  const int ks[2] = {m.k1, m.k2};
  const double ss[2] = {w.s1, w.s2};
  for (int i = 0; i < 2; ++i) {
    mpfr_set_si(base.get(), 1 + std::abs(ks[i]), MPFR_RNDN);
    mpfr_set_d(ex.get(), ss[i], MPFR_RNDN);
    mpfr_pow(t.get(), base.get(), ex.get(), MPFR_RNDN);
    mpfr_mul(out.get(), out.get(), t.get(), MPFR_RNDN);
  }
}

}  // namespace

Tally operator_norm(std::size_t matrices, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0), L(-3.0, 3.0);
  const BasisMap map = BasisMap::flat(6, 2);  // 30 modes
  const int n = static_cast<int>(map.size());
  Tally t;
  Big col, wi, wj, term, best;
  for (std::size_t inst = 0; inst < matrices; ++inst) {
    const WeightParams& w = kWeightSettings[inst % 5];
    RowMatrix T(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) T(i, j) = U(rng) * std::pow(10.0, L(rng));
    const double got = weighted_operator_norm(T, map, map, w).value;
    mpfr_set_zero(best.get(), 1);
    for (int j = 0; j < n; ++j) {
      mpfr_set_zero(col.get(), 1);
      for (int i = 0; i < n; ++i) {
        big_weight(wi, map.modes[i], w);
        mpfr_set_d(term.get(), std::abs(T(i, j)), MPFR_RNDN);
        mpfr_mul(term.get(), term.get(), wi.get(), MPFR_RNDN);
        mpfr_add(col.get(), col.get(), term.get(), MPFR_RNDN);
      }
      big_weight(wj, map.modes[j], w);
      mpfr_div(col.get(), col.get(), wj.get(), MPFR_RNDN);
      mpfr_max(best.get(), best.get(), col.get(), MPFR_RNDN);
    }
    const double exact = mpfr_get_d(best.get(), MPFR_RNDN);
    const double rel = std::abs(got - exact) / exact;
    ++t.checks;
    t.worst = std::max(t.worst, rel);
    if (rel > 1e-12 || mpfr_cmp_d(best.get(), got) > 0) ++t.violations;
  }
  return t;
}

Tally banach_algebra(std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> deg(1, 5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Tally t;
  auto rand_poly = [&](Parity p) {
    TrigPoly2D u(deg(rng), deg(rng) - 1, p);
    for (int k1 = u.k1_min(); k1 <= u.d1(); ++k1)
      for (int k2 = 0; k2 <= u.d2(); ++k2) {
        u.a(k1, k2) = U(rng);
        if (k2) u.b(k1, k2) = U(rng);
      }
    return u;
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    const TrigPoly2D u = rand_poly(coin(rng) ? Parity::kOdd : Parity::kEven);
    const TrigPoly2D v = rand_poly(coin(rng) ? Parity::kOdd : Parity::kEven);
    const TrigPoly2D uv = product(u, v);
    for (const WeightParams& w : kWeightSettings) {
      const double lhs = norm_M(uv, w), rhs = norm_M(u, w) * norm_M(v, w);
      ++t.checks;
      t.worst = std::max(t.worst, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12)) ++t.violations;
    }
  }
  return t;
}

Tally galerkin(std::size_t states, int order, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0), V(0.01, 0.2);
  const int N = order, M = 4 * N;  // M > 3N: the cosine coefficients of u^2 up to N are alias-free
  std::vector<long double> sn(static_cast<std::size_t>(M) * (N + 1)), cs(sn.size());
  for (int j = 0; j < M; ++j)
    for (int k = 0; k <= N; ++k) {
      const long double x = 2.0L * M_PIl * j / M;
      sn[static_cast<std::size_t>(j) * (N + 1) + k] = std::sin(k * x);
      cs[static_cast<std::size_t>(j) * (N + 1) + k] = std::cos(k * x);
    }
  Tally t;
  std::vector<double> a(N), out(N);
  std::vector<long double> w(M);
  for (std::size_t s = 0; s < states; ++s) {
    const double nu = V(rng);
    for (int k = 1; k <= N; ++k) a[k - 1] = U(rng) / k;
    galerkin_rhs(nu, a, out);
    for (int j = 0; j < M; ++j) {
      long double u = 0.0L;
      for (int k = 1; k <= N; ++k) u += a[k - 1] * sn[static_cast<std::size_t>(j) * (N + 1) + k];
      w[j] = u * u;
    }
    for (int k = 1; k <= N; ++k) {
      long double c = 0.0L;
      for (int j = 0; j < M; ++j) c += w[j] * cs[static_cast<std::size_t>(j) * (N + 1) + k];
      c *= 2.0L / M;
      const long double kk = static_cast<long double>(k) * k;
      const long double ref = (kk - nu * kk * kk) * a[k - 1] + 0.5L * k * c;
      const double dev = static_cast<double>(std::abs(out[k - 1] - ref) / std::max(1.0L, std::abs(ref)));
      ++t.checks;
      t.worst = std::max(t.worst, dev);
      if (dev > 1e-12) ++t.violations;
    }
  }
  return t;
}

}  // namespace ks::oracle
