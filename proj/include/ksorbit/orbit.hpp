// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include "ksorbit/error.hpp"
#include "ksorbit/fourier.hpp"

namespace ks {

// A periodic orbit u(f t, x) of the rescaled equation; period T = 2 pi / f.
struct OrbitCandidate {
  double nu = 0.0;
  double f = 0.0;
  TrigPoly2D u;

  double period() const { return 2.0 * M_PI / f; }
  double inv_nu() const { return 1.0 / nu; }
  void validate() const {
    require(std::isfinite(nu) && nu > 0.0, "orbit: nu must be positive");
    require(std::isfinite(f) && f > 0.0, "orbit: f must be positive");
    require(u.parity() == Parity::kOdd, "orbit: u must be odd in x");
    require(u.all_finite(), "orbit: coefficients must be finite");
  }
};

}  // namespace ks
