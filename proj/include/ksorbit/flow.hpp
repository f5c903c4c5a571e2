// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ksorbit/orbit.hpp"

namespace ks {

// Truncated sine-Galerkin state: u(x) = sum_{k=1..N} a_k sin(k x).
struct GalerkinState {
  double nu = 1.0;
  std::vector<double> a;  // a[k-1] = a_k

  int order() const { return static_cast<int>(a.size()); }
  void validate() const;
};

// da_k/dt = (k^2 - nu k^4) a_k + (k/2)(sum_l a_{k+l} a_l - 1/2 sum_{l+m=k} a_l a_m)
std::vector<double> galerkin_rhs(const GalerkinState& s);
void galerkin_rhs(double nu, std::span<const double> a, std::span<double> out);

// sqrt(sum a_k^2)
double energy(std::span<const double> a);

// ---- Dormand-Prince 5(4) ---------------------------------------------------

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct IntegratorOptions {
  double tol = 1e-10;     // absolute and relative local error target
  double h0 = 1e-4;       // first trial step
  double h_min = 1e-14;   // StepSizeUnderflow below this
  double h_max = 1.0;
  long max_steps = 200'000'000;
};

// One accepted step with its continuous extension.
class DenseStep {
 public:
  double t0() const { return t0_; }
  double t1() const { return t0_ + h_; }
  double h() const { return h_; }
  std::span<const double> y0() const { return r1_; }
  std::span<const double> y1() const { return y1_; }
  void eval(double t, std::span<double> out) const;
  std::vector<double> eval(double t) const;

 private:
  friend class Dopri5;
  double t0_ = 0.0;
  double h_ = 0.0;
  std::vector<double> r1_, r2_, r3_, r4_, r5_, y1_;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

class Dopri5 {
 public:
  Dopri5(OdeRhs rhs, std::size_t dim, IntegratorOptions opt = {});

  // Integrates y from t0 to t1 in place. The observer, if set, sees every
  // accepted step and may return false to stop early (then t holds the stop time).
  double integrate(std::vector<double>& y, double t0, double t1,
                   const std::function<bool(const DenseStep&)>& observer = {});
  const IntegrationStats& stats() const { return stats_; }
  double last_step() const { return h_; }

 private:
  OdeRhs rhs_;
  std::size_t n_;
  IntegratorOptions opt_;
  IntegrationStats stats_;
  double h_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
};

// Adaptive integration of the Galerkin system; records every accepted step.
Trajectory integrate(const GalerkinState& s0, double t_end, double tol);

// ---- Attractor exploration ------------------------------------------------

struct ExploreOptions {
  int order = 20;                 // N
  double transient = 200.0;       // time discarded before detection
  double window = 100.0;          // time over which minima are collected
  double budget = 2000.0;         // max time spent searching for recurrence
  double tol = 1e-10;
  double recurrence_tol = 1e-6;   // relative full-state return distance
  double cluster_gap = 1e-3;      // relative gap separating minima clusters
  double noise_floor = 1e-8;      // energies below this count as decayed
  int samples = 128;              // samples per period in an OrbitSeed
};

struct OrbitSeed {
  double nu = 0.0;
  double period = 0.0;
  std::vector<std::vector<double>> samples;  // equispaced over [0, period)
  double recurrence_residual = 0.0;          // relative return distance
  double transient = 0.0;
};

// Initial condition sin(x) with N modes.
GalerkinState default_initial_state(double nu, int order);

// Local minima in time of energy() along the trajectory after the transient,
// located with the dense output. Returns (time, state) pairs.
struct EnergyMinimum {
  double t;
  double value;
  std::vector<double> state;
};
std::vector<EnergyMinimum> energy_minima(const GalerkinState& s0, double t_begin, double t_end,
                                         double tol);

OrbitSeed find_attracting_orbit(double nu, const ExploreOptions& opt = {});

struct CascadePoint {
  double inv_nu = 0.0;
  std::vector<double> minima;  // cluster centres, sorted
  bool failed = false;
  std::string error;
};

// Distinct minimum levels (cluster centres) of a sorted-or-not value list.
std::vector<double> cluster_levels(std::vector<double> values, double rel_gap);

CascadePoint cascade_point(double inv_nu, const ExploreOptions& opt = {});
// Uniform grid in 1/nu, steps+1 points including both ends.
std::vector<CascadePoint> cascade_scan(double inv_nu_min, double inv_nu_max, int steps,
                                       const ExploreOptions& opt = {}, int threads = 1);

// Bisection in 1/nu for the point where the cluster count first exceeds
// `count_below`. Requires count(lo) <= count_below < count(hi).
double doubling_threshold(double inv_nu_lo, double inv_nu_hi, std::size_t count_below,
                          double width, const ExploreOptions& opt = {});
// (l1 - l2) / (l2 - l3) for three successive thresholds.
double feigenbaum_ratio(double l1, double l2, double l3);

// DFT in theta of one period of samples, truncated to degrees (d1, d2).
OrbitCandidate seed_to_orbit_candidate(const OrbitSeed& seed, int d1, int d2);

}  // namespace ks
