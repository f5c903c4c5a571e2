// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "ksorbit/flow.hpp"
#include "ksorbit/newton.hpp"
#include "ksorbit/validator.hpp"
#include "test_util.hpp"

using namespace ks;

TEST_CASE("K1 by hand") {
  const Interval k1 = compute_K1(1.0, 1.0, 1.0, 3, 0);
  CHECK(k1.contains(std::sqrt(2.0)));
  CHECK(k1.width() < 1e-14);
}

TEST_CASE("K2 composes from K1") {
  for (int d : {5, 20, 60}) {
    const double nu = 1.0 / 32.97, f = 7.0, c = validation_shift(nu);
    const Interval k1 = compute_K1(nu, c, f, d, d / 2);
    const Interval k2 = compute_K2(nu, c, f, d, d / 2);
    const double expect = std::sqrt(2.0) * std::pow(4.0 / (3.0 * nu), 0.25) * std::pow(k1.mid() / std::sqrt(2.0), 0.75);
    CHECK(k2.mid() == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("tail constants decrease with the degrees") {
  const double nu = 1.0 / 32.97, f = 2 * M_PI / 0.895839, c = validation_shift(nu);
  double p1 = INFINITY, p2 = INFINITY;
  for (int d = 10; d <= 200; d += 10) {
    const double k1 = compute_K1(nu, c, f, d, d).hi, k2 = compute_K2(nu, c, f, d, d).hi;
    CHECK(k1 <= p1);
    CHECK(k2 <= p2);
    p1 = k1;
    p2 = k2;
  }
  CHECK(validation_shift(nu) >= 1.0 / nu);
}

TEST_CASE("banach2 bounds") {
  CHECK(banach2_bounds(4.0 / 3.0, 1.0).first.contains(std::sqrt(2.0)));
  CHECK(banach2_bounds(0.5, std::sqrt(2.0)).second.contains(1.0));

  // symbol sampling: |k1| / |i f k2 + p(k1)| and f|k2| / |i f k2 + p(k1)| stay below the bounds
  const double nu = 1.0 / 32.97, f = 7.0, c = validation_shift(nu);
  const auto [bx, bt] = banach2_bounds(nu, f);
  double sx = 0.0, st = 0.0;
  for (int k1 = 1; k1 <= 400; ++k1)
    for (int k2 = 0; k2 <= 400; ++k2) {
      const double p = shifted_symbol(k1, nu, c), m = std::hypot(f * k2, p);
      sx = std::max(sx, k1 / m);
      st = std::max(st, k2 / m);
    }
  CHECK(sx <= bx.hi);
  CHECK(st <= bt.hi);
}

TEST_CASE("K3") {
  TrigPoly2D z(4, 3, Parity::kOdd);
  CHECK(compute_K3(z, {1e-12, 1e-12, 1e-12}).hi == 0.0);
  std::mt19937_64 rng(8);
  const TrigPoly2D u = test::random_poly(rng, 6, 5, Parity::kOdd);
  const WeightParams w{0.01, 0.5, 0.5};
  const double sup = compute_K3(u, w, K3Mode::kSup).hi, cons = compute_K3(u, w, K3Mode::kConservative).hi;
  CHECK(sup <= cons);
  CHECK(cons >= norm_M(u, w) * (1 - 1e-14));
}

TEST_CASE("build_Bhat") {
  const RowMatrix I = RowMatrix::Identity(4, 4);
  CHECK(build_Bhat(I).cwiseAbs().maxCoeff() == 0.0);
  const RowMatrix D = 2.0 * I;
  const RowMatrix B = build_Bhat(D);
  for (int i = 0; i < 4; ++i) CHECK(B(i, i) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(build_Bhat(RowMatrix::Zero(3, 3)), Error);
}

TEST_CASE("matrix stage degrees") {
  const auto [t1, t2] = matrix_stage_degrees(64, 48, 4000);
  CHECK(t1 == 41);
  CHECK(t2 == 48);
  CHECK(1 + static_cast<std::size_t>(t1) * (2 * t2 + 1) <= 4000u);
  const auto [s1, s2] = matrix_stage_degrees(10, 5, 4000);
  CHECK(s1 == 10);
  CHECK(s2 == 5);
}

TEST_CASE("analyticity scaling") {
  ValidationCertificate cert;
  cert.success = true;
  cert.alpha = 0.4;
  cert.e1 = 1e-9;
  cert.e2 = 1e4;
  const double E0 = scaled_existence_radius(cert, 30, 20, 0.0);
  REQUIRE(E0 > 0.0);
  CHECK(E0 == doctest::Approx(cert.e1 / (1 - cert.alpha)).epsilon(1e-3));
  double prev = E0;
  for (double r = 1e-6; r < 1e-3; r *= 1.5) {
    const double E = scaled_existence_radius(cert, 30, 20, r);
    if (E < 0) break;
    CHECK(E >= prev);
    prev = E;
  }
  const auto [rh, Er] = improve_analyticity(cert, 30, 20);
  CHECK(rh > 0.0);
  CHECK(Er >= E0);
  CHECK(cert.improved);
  CHECK(scaled_existence_radius(cert, 30, 20, rh * 1.01) < 0.0);

  ValidationCertificate bad = cert;
  bad.success = false;
  CHECK_THROWS_AS(improve_analyticity(bad, 30, 20), Error);
}

TEST_CASE("a coarse orbit fails validation with a stage") {
  ExploreOptions eo;
  eo.samples = 64;
  const OrbitSeed s = find_attracting_orbit(1.0 / 32.97, eo);
  const NewtonReport r = newton_solve(seed_to_orbit_candidate(s, 16, 12));
  ValidationInput in;
  in.cand = r.final;
  try {
    validate(in);
    FAIL("expected validation to fail at degrees (16,12)");
  } catch (const ValidationFailed& e) {
    CHECK_FALSE(e.stage().empty());
    CHECK_FALSE(e.certificate().success);
    CHECK(e.certificate().failed_stage == e.stage());
    CHECK(e.certificate().K1 > 0.0);
    CHECK(e.code() == ErrorCode::kValidationFailed);
  }
}
