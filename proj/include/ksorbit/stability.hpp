// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "ksorbit/flow.hpp"
#include "ksorbit/interval.hpp"
#include "ksorbit/orbit.hpp"

namespace ks {

enum class StabilityMethod { kMonodromy, kOperatorSpectrum };
const char* stability_method_name(StabilityMethod m);

struct StabilityReport {
  StabilityMethod method = StabilityMethod::kMonodromy;
  // Monodromy: multipliers sorted by decreasing modulus.
  // Operator spectrum: eigenvalues in the strip sorted by increasing real part.
  std::vector<std::complex<double>> eigenvalues;
  int unstable_dimension = 0;
  int marginal = 0;            // within the margin of the stability boundary
  double strip_offset = 0.0;   // a (operator method only)
  double f = 0.0;
  int n_x = 0;                 // monodromy truncation
  int d1 = 0, d2 = 0;          // operator truncation
  std::size_t total_eigenvalues = 0;  // before strip filtering
};

struct MonodromyOptions {
  double margin = 1e-6;
  IntegratorOptions integrator{1e-12, 1e-5, 1e-14, 0.5, 200'000'000};
};

// Multipliers of f dv/dtheta = -L v - d_x(u v) over theta in [0, 2 pi] in the
// sine-Galerkin basis of n_x modes.
StabilityReport monodromy(const OrbitCandidate& cand, int n_x, const MonodromyOptions& opt = {});

// Real matrix of f d_theta + L + d_x(u .) on the odd flat basis of degrees (d1, d2).
RowMatrix stability_operator_matrix(const OrbitCandidate& cand, int d1, int d2);

// Spectrum of the truncated operator restricted to the strip a <= Im z < a + f.
// Unstable eigenvalues have Re z < -margin. a defaults to -f/2.
StabilityReport operator_spectrum(const OrbitCandidate& cand, int d1, int d2,
                                  std::optional<double> a = std::nullopt, double margin = 1e-6);

// -log(lambda) / T with T = 2 pi / f (principal branch).
std::complex<double> multiplier_exponent(std::complex<double> lambda, double f);
// |Re(z - w)| + distance of Im(z - w) to the nearest multiple of f.
double distance_mod_if(std::complex<double> z, std::complex<double> w, double f);

struct StabilityCrossCheck {
  int monodromy_unstable = 0;
  int operator_unstable = 0;
  bool agree = true;
  std::string warning;
};
StabilityCrossCheck cross_check(const StabilityReport& mono, const StabilityReport& op);

}  // namespace ks
