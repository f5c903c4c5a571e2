// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ksorbit/interval.hpp"
#include "ksorbit/orbit.hpp"

namespace ks {

// Dense (n+1)x(n+1) linearisation in the flat coefficient layout of degrees
// (d1, d2). Row 0 is the phase condition, column 0 the frequency direction.
struct BorderedMatrix {
  int d1 = 0;
  int d2 = 0;
  RowMatrix m;

  std::size_t n() const { return m.rows() == 0 ? 0 : static_cast<std::size_t>(m.rows() - 1); }
};

// Default shift c = 1/nu.
inline double default_shift(double nu) { return 1.0 / nu; }

// e = f d_theta u + L u + 1/2 d_x(u^2) at full degrees (2 d1, 2 d2).
TrigPoly2D residual(const OrbitCandidate& cand);
// -S_c^{-1} e, also at full degrees. c <= 0 selects 1/nu.
TrigPoly2D preconditioned_residual(const OrbitCandidate& cand, double c = 0.0);

// Coefficients of delta -> integral over the torus of delta * d_theta u0.
std::vector<double> phase_row(const TrigPoly2D& u0);

// Matrix of (sigma, delta) -> (phase(delta), sigma S_c^{-1} d_theta u0
//   + (Id - c S_c^{-1}) delta + S_c^{-1} d_x(u0 delta)) truncated to (d1, d2).
BorderedMatrix assemble_A(const OrbitCandidate& cand, double c = 0.0);

// The same operator applied without forming the matrix (test oracle for columns).
std::vector<double> apply_A(const OrbitCandidate& cand, double c, std::span<const double> z);

struct NewtonOptions {
  double tol = 5e-11;
  int max_iter = 30;
  double c = 0.0;              // shift; <= 0 selects 1/nu
  WeightParams weights;        // norm used for the stopping tests
  double degenerate_tol = 1e-8;
  bool fix_phase = true;
  bool log = false;            // one line per iterate to stderr
};

struct NewtonIterate {
  double residual = 0.0;  // ||e~_k||_M before the step
  double step = 0.0;      // ||(sigma, delta)||_M of the step taken (0 for the last row)
};

struct NewtonReport {
  std::vector<NewtonIterate> iterates;
  bool converged = false;
  std::string stop_reason;
  double quadratic_constant = 0.0;  // max ||e_{k+1}|| / ||e_k||^2 once ||e_k|| < 1e-3
  double final_residual = 0.0;
  OrbitCandidate final;
};

// Throws kDegenerateSeed, kSingularLinearSystem or kMaxIterExceeded.
NewtonReport newton_solve(const OrbitCandidate& seed, const NewtonOptions& opt = {});

// Shifts theta so that the sine coefficient of mode (1,1) vanishes and its
// cosine coefficient is non-negative.
OrbitCandidate fix_theta_phase(const OrbitCandidate& cand);

// Relative weight of the top 10% of modes in each direction.
struct ModeTail {
  double x_tail = 0.0;
  double theta_tail = 0.0;
};
ModeTail mode_tail(const TrigPoly2D& u);

struct ModeGrowthOptions {
  double threshold = 1e-8;
  double factor = 1.5;
  int max_rounds = 3;
  int max_d1 = 128;
  int max_d2 = 96;
};

// newton_solve followed by degree growth while a mode tail exceeds the threshold.
NewtonReport newton_solve_with_growth(const OrbitCandidate& seed, const NewtonOptions& opt = {},
                                      const ModeGrowthOptions& growth = {});

struct ContinuationOptions {
  NewtonOptions newton;
  double dnu_min = 1e-9;
  double grow = 1.3;
};

struct ContinuationResult {
  std::vector<OrbitCandidate> family;
  std::vector<int> newton_steps;
  bool step_underflow = false;
  std::string message;
};

// Natural-parameter continuation in nu from a converged start.
ContinuationResult continue_orbit(const OrbitCandidate& start, double nu_target, double dnu_max,
                                  const ContinuationOptions& opt = {});

}  // namespace ks
