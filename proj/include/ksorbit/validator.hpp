// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ksorbit/interval.hpp"
#include "ksorbit/newton.hpp"
#include "ksorbit/orbit.hpp"

namespace ks {

// sup_k (|a_k|+|b_k|) M(k) over stored modes, or the Banach-algebra bound ||u||_M.
enum class K3Mode { kSup, kConservative };
const char* k3_mode_name(K3Mode m);

struct ValidationInput {
  OrbitCandidate cand;
  WeightParams w{1e-12, 1e-12, 1e-12};
  int dt1 = 0;  // matrix-stage degrees; <= 0 selects automatically
  int dt2 = 0;
  double c = 0.0;  // <= 0 selects 1/nu rounded up
  K3Mode k3 = K3Mode::kSup;
  std::size_t max_dimension = 4000;  // bordered size cap for automatic degrees
  int threads = 1;
  bool log = false;  // one line per stage to stderr
};

struct ValidationCertificate {
  bool success = false;
  std::string failed_stage;
  double failed_bound = 0.0;

  double alpha = 0.0, alpha1 = 0.0, alpha2 = 0.0;
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;
  double banach_dx = 0.0, banach_dtheta = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double discriminant = 0.0;
  double rho_minus = 0.0;
  double E = 0.0;
  // Contraction hypotheses re-checked at radius E: e1 + e2 E^2 and 2 e2 E.
  double b_condition = 0.0;
  double lipschitz = 0.0;

  bool improved = false;
  double r_hat = 0.0;
  double E_r_hat = 0.0;

  double nu = 0.0, f = 0.0, c = 0.0;
  int d1 = 0, d2 = 0, dt1 = 0, dt2 = 0;
  std::size_t dimension = 0;  // bordered real dimension of the matrix stage
  WeightParams w;
  K3Mode k3 = K3Mode::kSup;
  std::string transcendental_route;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
};

// Thrown by validate when an inequality fails; carries the partial certificate.
class ValidationFailed : public Error {
 public:
  ValidationFailed(std::string stage, double bound, ValidationCertificate cert);
  const std::string& stage() const { return stage_; }
  double bound() const { return bound_; }
  const ValidationCertificate& certificate() const { return cert_; }

 private:
  std::string stage_;
  double bound_;
  ValidationCertificate cert_;
};

// 1/nu rounded upward; the shift used by validation.
double validation_shift(double nu);

Interval compute_K1(double nu, double c, double f, int d1, int d2);
Interval compute_K2(double nu, double c, double f, int d1, int d2);
Interval compute_K3(const TrigPoly2D& u, const WeightParams& w, K3Mode mode = K3Mode::kSup);
// (||S_c^{-1} d_x||, ||S_c^{-1} d_theta||) for c = 1/nu.
std::pair<Interval, Interval> banach2_bounds(double nu, double f);

// (A_F)^{-1} - Id in floats. Throws kSingularLinearSystem.
RowMatrix build_Bhat(const RowMatrix& A_F);

// Interval enclosure of the bordered matrix of module newton for cand.
IntervalMatrix assemble_A_interval(const OrbitCandidate& cand, double c, int threads = 1);
// Enclosure of -S_c^{-1} e at full degrees (2 d1, 2 d2), flat layout.
std::vector<Interval> preconditioned_residual_interval(const OrbitCandidate& cand, double c);

// Automatic matrix-stage degrees: (d1, d2) when the bordered size fits, else
// d1 is reduced first and then d2.
std::pair<int, int> matrix_stage_degrees(int d1, int d2, std::size_t max_dimension);

// Throws ValidationFailed.
ValidationCertificate validate(const ValidationInput& in);

// Largest r (60-point geometric grid on [1e-12, 1e-2] refined by bisection)
// for which the exponentially scaled bounds still certify. Throws kNoImprovement.
std::pair<double, double> improve_analyticity(ValidationCertificate& cert, int d1, int d2);

// Scaled conditions of improve_analyticity at a given r; returns E_r or a
// negative value when the conditions fail.
double scaled_existence_radius(const ValidationCertificate& cert, int d1, int d2, double r);

}  // namespace ks
