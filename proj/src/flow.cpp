// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "ksorbit/error.hpp"

namespace ks {

void GalerkinState::validate() const {
  require(std::isfinite(nu) && nu > 0.0, "GalerkinState: nu must be positive");
  require(!a.empty(), "GalerkinState: N must be >= 1");
  for (double v : a) require(std::isfinite(v), "GalerkinState: non-finite coefficient");
}

void galerkin_rhs(double nu, std::span<const double> a, std::span<double> out) {
  const int n = static_cast<int>(a.size());
  for (int k = 1; k <= n; ++k) {
    const double kk = static_cast<double>(k) * k;
    double s1 = 0.0;
    for (int l = 1; l + k <= n; ++l) s1 += a[k + l - 1] * a[l - 1];
    double s2 = 0.0;
    for (int l = 1; l < k; ++l) s2 += a[l - 1] * a[k - l - 1];
    out[k - 1] = (kk - nu * kk * kk) * a[k - 1] + 0.5 * k * (s1 - 0.5 * s2);
  }
}

std::vector<double> galerkin_rhs(const GalerkinState& s) {
  s.validate();
  std::vector<double> out(s.a.size());
  galerkin_rhs(s.nu, s.a, out);
  return out;
}

double energy(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// ---- Dormand-Prince --------------------------------------------------------

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

void DenseStep::eval(double t, std::span<double> out) const {
  const double s = h_ == 0.0 ? 0.0 : (t - t0_) / h_;
  const double s1 = 1.0 - s;
  for (std::size_t i = 0; i < r1_.size(); ++i) {
    out[i] = r1_[i] + s * (r2_[i] + s1 * (r3_[i] + s * (r4_[i] + s1 * r5_[i])));
  }
}

std::vector<double> DenseStep::eval(double t) const {
  std::vector<double> out(r1_.size());
  eval(t, out);
  return out;
}

Dopri5::Dopri5(OdeRhs rhs, std::size_t dim, IntegratorOptions opt)
    : rhs_(std::move(rhs)), n_(dim), opt_(opt), h_(opt.h0) {
  require(opt.tol > 0.0, "integrator: tol must be positive");
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_}) v->resize(n_);
}

double Dopri5::integrate(std::vector<double>& y, double t0, double t1,
                         const std::function<bool(const DenseStep&)>& observer) {
  if (y.size() != n_) fail(ErrorCode::kDimensionMismatch, "integrator: state size");
  if (t1 <= t0) return t0;
  const double tol = opt_.tol;
  double t = t0;
  double h = std::min(h_, opt_.h_max);
  rhs_(t, y, k1_);
  ++stats_.rhs_evals;
  DenseStep step;
  long steps = 0;
  while (t < t1) {
    if (++steps > opt_.max_steps) fail(ErrorCode::kStepSizeUnderflow, "integrator: step budget exhausted");
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    auto stage = [&](std::vector<double>& out, auto&& combo, double c) {
      for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + h * combo(i);
      rhs_(t + c * h, ytmp_, out);
    };
    stage(k2_, [&](std::size_t i) { return a21 * k1_[i]; }, c2);
    stage(k3_, [&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; }, c3);
    stage(k4_, [&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; }, c4);
    stage(k5_, [&](std::size_t i) {
      return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
    }, c5);
    stage(k6_, [&](std::size_t i) {
      return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    }, 1.0);
    for (std::size_t i = 0; i < n_; ++i) {
      ynew_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                             a76 * k6_[i]);
    }
    rhs_(t + h, ynew_, k7_);
    stats_.rhs_evals += 6;

    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double ei = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                             e6 * k6_[i] + e7 * k7_[i]);
      const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      err = std::max(err, std::abs(ei) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      ++stats_.accepted;
      if (observer) {
        step.t0_ = t;
        step.h_ = h;
        step.r1_ = y;
        step.r2_.resize(n_);
        step.r3_.resize(n_);
        step.r4_.resize(n_);
        step.r5_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
          const double ydiff = ynew_[i] - y[i];
          const double bspl = h * k1_[i] - ydiff;
          step.r2_[i] = ydiff;
          step.r3_[i] = bspl;
          step.r4_[i] = ydiff - h * k7_[i] - bspl;
          step.r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                             d6 * k6_[i] + d7 * k7_[i]);
        }
        step.y1_ = ynew_;
      }
      t = last ? t1 : t + h;
      y.swap(ynew_);
      k1_.swap(k7_);
      if (observer && !observer(step)) {
        h_ = h;
        return t;
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!last) h = std::min(h * fac, opt_.h_max);
      h_ = h;
    } else {
      ++stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < opt_.h_min) {
        fail(ErrorCode::kStepSizeUnderflow, "integrator: required step below minimum");
      }
    }
  }
  return t;
}

namespace {

OdeRhs galerkin_ode(double nu) {
  return [nu](double, std::span<const double> y, std::span<double> dy) {
    galerkin_rhs(nu, y, dy);
  };
}

}  // namespace

Trajectory integrate(const GalerkinState& s0, double t_end, double tol) {
  s0.validate();
  IntegratorOptions opt;
  opt.tol = tol;
  Dopri5 ode(galerkin_ode(s0.nu), s0.a.size(), opt);
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.y.push_back(s0.a);
  std::vector<double> y = s0.a;
  ode.integrate(y, 0.0, t_end, [&](const DenseStep& st) {
    tr.t.push_back(st.t1());
    tr.y.emplace_back(st.y1().begin(), st.y1().end());
    return true;
  });
  return tr;
}

// ---- Exploration -----------------------------------------------------------

GalerkinState default_initial_state(double nu, int order) {
  require(order >= 1, "order must be >= 1");
  GalerkinState s;
  s.nu = nu;
  s.a.assign(order, 0.0);
  s.a[0] = 1.0;
  return s;
}

namespace {

// g(t) = d/dt (E^2 / 2) = a . a'
double energy_slope(double nu, std::span<const double> a, std::vector<double>& scratch) {
  scratch.resize(a.size());
  galerkin_rhs(nu, a, scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * scratch[i];
  return s;
}

// Runs the flow from s (at time t_begin) to t_end, calling on_min for every
// sign change - to + of the energy slope, located by bisection on the dense output.
template <class OnMin>
void scan_minima(double nu, std::vector<double>& y, double t_begin, double t_end, double tol,
                 OnMin&& on_min) {
  IntegratorOptions opt;
  opt.tol = tol;
  Dopri5 ode(galerkin_ode(nu), y.size(), opt);
  std::vector<double> scratch, ya(y.size());
  double g_prev = energy_slope(nu, y, scratch);
  ode.integrate(y, t_begin, t_end, [&](const DenseStep& st) {
    const double g1 = energy_slope(nu, st.y1(), scratch);
    bool keep = true;
    if (g_prev < 0.0 && g1 >= 0.0) {
      double lo = st.t0(), hi = st.t1();
      for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        st.eval(mid, ya);
        if (energy_slope(nu, ya, scratch) < 0.0) lo = mid; else hi = mid;
      }
      const double tm = 0.5 * (lo + hi);
      st.eval(tm, ya);
      keep = on_min(tm, ya);
    }
    g_prev = g1;
    return keep;
  });
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Integrates the transient in place; false when the state decays below
// noise_floor first (the stiff tail of a decaying run is then skipped).
bool run_transient(double nu, std::vector<double>& y, double t_end, double tol, double noise_floor) {
  IntegratorOptions io;
  io.tol = tol;
  Dopri5 ode(galerkin_ode(nu), y.size(), io);
  bool alive = true;
  ode.integrate(y, 0.0, t_end, [&](const DenseStep& st) {
    alive = energy(st.y1()) > noise_floor;
    return alive;
  });
  return alive;
}

}  // namespace

std::vector<EnergyMinimum> energy_minima(const GalerkinState& s0, double t_begin, double t_end,
                                         double tol) {
  s0.validate();
  std::vector<double> y = s0.a;
  if (t_begin > 0.0) {
    IntegratorOptions opt;
    opt.tol = tol;
    Dopri5 ode(galerkin_ode(s0.nu), y.size(), opt);
    ode.integrate(y, 0.0, t_begin);
  }
  std::vector<EnergyMinimum> out;
  scan_minima(s0.nu, y, t_begin, t_end, tol, [&](double t, std::span<const double> a) {
    out.push_back({t, energy(a), std::vector<double>(a.begin(), a.end())});
    return true;
  });
  return out;
}

std::vector<double> cluster_levels(std::vector<double> values, double rel_gap) {
  std::sort(values.begin(), values.end());
  std::vector<double> centres;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() ||
        values[i] - values[i - 1] > rel_gap * std::max(std::abs(values[i]), 1e-300)) {
      const double sum = std::accumulate(values.begin() + begin, values.begin() + i, 0.0);
      if (i > begin) centres.push_back(sum / static_cast<double>(i - begin));
      begin = i;
    }
  }
  return centres;
}

CascadePoint cascade_point(double inv_nu, const ExploreOptions& opt) {
  CascadePoint p;
  p.inv_nu = inv_nu;
  try {
    require(std::isfinite(inv_nu) && inv_nu > 0.0, "1/nu must be positive");
    GalerkinState s = default_initial_state(1.0 / inv_nu, opt.order);
    if (!run_transient(s.nu, s.a, opt.transient, opt.tol, opt.noise_floor)) return p;
    const auto mins = energy_minima(s, 0.0, opt.window, opt.tol);
    std::vector<double> values;
    for (const auto& m : mins) {
      if (m.value > opt.noise_floor) values.push_back(m.value);
    }
    p.minima = cluster_levels(std::move(values), opt.cluster_gap);
  } catch (const Error& e) {
    p.failed = true;
    p.error = e.what();
  }
  return p;
}

std::vector<CascadePoint> cascade_scan(double inv_nu_min, double inv_nu_max, int steps,
                                       const ExploreOptions& opt, int threads) {
  require(steps >= 0, "cascade_scan: steps must be >= 0");
  require(inv_nu_min <= inv_nu_max, "cascade_scan: empty range");
  std::vector<CascadePoint> out(static_cast<std::size_t>(steps) + 1);
  auto at = [&](int i) {
    return steps == 0 ? inv_nu_min : inv_nu_min + (inv_nu_max - inv_nu_min) * i / steps;
  };
  const int nt = std::max(1, std::min(threads, steps + 1));
  std::vector<std::thread> pool;
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i <= steps; i += nt) out[i] = cascade_point(at(i), opt);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

double doubling_threshold(double inv_nu_lo, double inv_nu_hi, std::size_t count_below,
                          double width, const ExploreOptions& opt) {
  require(inv_nu_lo < inv_nu_hi && width > 0.0, "doubling_threshold: bad bracket");
  auto count = [&](double x) {
    const auto p = cascade_point(x, opt);
    if (p.failed) fail(ErrorCode::kStepSizeUnderflow, p.error);
    return p.minima.size();
  };
  require(count(inv_nu_lo) <= count_below && count(inv_nu_hi) > count_below,
          "doubling_threshold: bracket does not straddle the doubling");
  double lo = inv_nu_lo, hi = inv_nu_hi;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) <= count_below) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double feigenbaum_ratio(double l1, double l2, double l3) {
  require(l3 != l2, "feigenbaum_ratio: coincident thresholds");
  return (l1 - l2) / (l2 - l3);
}

OrbitSeed find_attracting_orbit(double nu, const ExploreOptions& opt) {
  require(std::isfinite(nu) && nu > 0.0, "nu must be positive");
  require(opt.samples >= 4, "at least 4 samples per period");
  GalerkinState s0 = default_initial_state(nu, opt.order);
  std::vector<double> y = s0.a;
  if (!run_transient(nu, y, opt.transient, opt.tol, opt.noise_floor)) {
    fail(ErrorCode::kNoPeriodicityDetected, "the state decayed to zero; no periodic orbit");
  }
  // Minima of the energy act as a Poincare section; a period is accepted when
  // the full state returns to an earlier section point.
  std::vector<EnergyMinimum> seen;
  bool found = false;
  double t_start = 0.0, period = 0.0, resid = 0.0;
  std::vector<double> start;
  scan_minima(nu, y, opt.transient, opt.transient + opt.budget, opt.tol,
              [&](double t, std::span<const double> a) {
                const double e = energy(a);
                if (e <= opt.noise_floor) return true;
                for (auto it = seen.rbegin(); it != seen.rend(); ++it) {
                  const double d = distance(a, it->state) / e;
                  if (d < opt.recurrence_tol) {
                    found = true;
                    t_start = it->t;
                    period = t - it->t;
                    resid = d;
                    start = it->state;
                    return false;
                  }
                }
                seen.push_back({t, e, std::vector<double>(a.begin(), a.end())});
                if (seen.size() > 64) seen.erase(seen.begin());
                return true;
              });
  if (!found) {
    fail(ErrorCode::kNoPeriodicityDetected, "no recurrence below threshold within the time budget");
  }
  OrbitSeed seed;
  seed.nu = nu;
  seed.period = period;
  seed.recurrence_residual = resid;
  seed.transient = opt.transient;
  seed.samples.reserve(opt.samples);
  IntegratorOptions io;
  io.tol = opt.tol;
  Dopri5 ode(galerkin_ode(nu), start.size(), io);
  std::vector<double> z = start;
  int next = 0;
  seed.samples.push_back(start);
  next = 1;
  ode.integrate(z, t_start, t_start + period, [&](const DenseStep& st) {
    while (next < opt.samples) {
      const double ts = t_start + period * next / opt.samples;
      if (ts > st.t1()) break;
      seed.samples.push_back(st.eval(ts));
      ++next;
    }
    return true;
  });
  while (static_cast<int>(seed.samples.size()) < opt.samples) seed.samples.push_back(z);
  return seed;
}

OrbitCandidate seed_to_orbit_candidate(const OrbitSeed& seed, int d1, int d2) {
  require(d1 >= 1 && d2 >= 0, "seed_to_orbit_candidate: bad degrees");
  require(seed.period > 0.0, "seed_to_orbit_candidate: period must be positive");
  const int n = static_cast<int>(seed.samples.size());
  if (n < 2 * d2 + 2) {
    fail(ErrorCode::kInsufficientSamples, "seed has fewer than 2*d2+2 samples");
  }
  OrbitCandidate c;
  c.nu = seed.nu;
  c.f = 2.0 * M_PI / seed.period;
  c.u = TrigPoly2D(d1, d2, Parity::kOdd);
  const int order = static_cast<int>(seed.samples.front().size());
  for (int k1 = 1; k1 <= std::min(d1, order); ++k1) {
    for (int m = 0; m <= d2; ++m) {
      double sc = 0.0, ss = 0.0;
      for (int j = 0; j < n; ++j) {
        const double th = 2.0 * M_PI * static_cast<double>(j) * m / n;
        sc += seed.samples[j][k1 - 1] * std::cos(th);
        ss += seed.samples[j][k1 - 1] * std::sin(th);
      }
      const double s = (m == 0 ? 1.0 : 2.0) / n;
      c.u.a(k1, m) = s * sc;
      if (m > 0) c.u.b(k1, m) = s * ss;
    }
  }
  return c;
}

}  // namespace ks
