// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "ksorbit/flow.hpp"
#include "ksorbit/newton.hpp"
#include "test_util.hpp"

using namespace ks;

namespace {

OrbitCandidate random_candidate(std::mt19937_64& rng, int d1, int d2) {
  OrbitCandidate c;
  c.nu = 1.0 / 32.97;
  c.f = 7.0;
  c.u = test::random_poly(rng, d1, d2, Parity::kOdd, 2.0);
  return c;
}

}  // namespace

TEST_CASE("zero is a fixed point") {
  OrbitCandidate c;
  c.nu = 0.03;
  c.f = 5.0;
  c.u = TrigPoly2D(4, 3, Parity::kOdd);
  CHECK(residual(c).is_zero());
  CHECK(preconditioned_residual(c).is_zero());
  CHECK_THROWS_AS(newton_solve(c), Error);
  try {
    newton_solve(c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSeed);
  }
}

TEST_CASE("phase row") {
  TrigPoly2D flat(3, 2, Parity::kOdd);
  flat.a(1, 0) = 1.0;
  for (double v : phase_row(flat)) CHECK(v == 0.0);

  std::mt19937_64 rng(2);
  const TrigPoly2D u0 = test::random_poly(rng, 3, 2, Parity::kOdd);
  const TrigPoly2D du = dtheta(u0);
  const auto row = phase_row(u0);
  const auto fd = du.to_flat();
  double self = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) self += row[i] * fd[i];
  CHECK(self > 0.0);

  const TrigPoly2D delta = test::random_poly(rng, 3, 2, Parity::kOdd);
  const auto fl = delta.to_flat();
  double val = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) val += row[i] * fl[i];
  const int n = 32;
  const Grid2D gd = eval_grid(delta, n, n), gu = eval_grid(du, n, n);
  double q = 0.0;
  for (std::size_t i = 0; i < gd.values.size(); ++i) q += gd.values[i] * gu.values[i];
  q *= 4.0 * M_PI * M_PI / (n * n);
  CHECK(val == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("assemble_A with u0 = 0") {
  OrbitCandidate c;
  c.nu = 0.5;
  c.f = 2.0;
  c.u = TrigPoly2D(2, 1, Parity::kOdd);
  const double shift = 3.0;
  const BorderedMatrix A = assemble_A(c, shift);
  CHECK(A.m(0, 0) == 0.0);
  for (Eigen::Index i = 1; i < A.m.rows(); ++i) {
    CHECK(A.m(0, i) == 0.0);
    CHECK(A.m(i, 0) == 0.0);
  }
  // k2 = 0 entry of mode k1: 1 - c/p(k1)
  const std::size_t j = c.u.flat_index(2, 0, false) + 1;
  CHECK(A.m(j, j) == doctest::Approx(1.0 - shift / shifted_symbol(2, c.nu, shift)));
}

TEST_CASE("assemble_A columns match the matrix-free application") {
  std::mt19937_64 rng(4);
  const OrbitCandidate c = random_candidate(rng, 4, 3);
  const double shift = 1.0 / c.nu;
  const BorderedMatrix A = assemble_A(c, shift);
  const std::size_t n = A.n() + 1;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    const auto col = apply_A(c, shift, e);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(col[i] - A.m(i, j)) <= 1e-12);
  }
}

TEST_CASE("Newton converges from a flow seed") {
  ExploreOptions eo;
  eo.samples = 72;
  const OrbitSeed s = find_attracting_orbit(1.0 / 32.97, eo);
  const OrbitCandidate seed = seed_to_orbit_candidate(s, 40, 32);
  const NewtonReport r = newton_solve(seed);
  CHECK(r.converged);
  CHECK(r.iterates.size() <= 11u);
  CHECK(r.final.period() == doctest::Approx(0.895839).epsilon(1e-4));
  CHECK(r.final_residual < r.iterates.front().residual);

  SUBCASE("zero-length continuation returns the start") {
    const ContinuationResult cr = continue_orbit(r.final, r.final.nu, 0.0);
    REQUIRE(cr.family.size() == 1u);
    CHECK(cr.family[0].f == r.final.f);
  }
  SUBCASE("short continuation") {
    const double target = 1.0 / 32.9;
    // the residual floor at these degrees is about 1e-7
    ContinuationOptions co;
    co.newton.tol = 1e-6;
    const ContinuationResult cr = continue_orbit(r.final, target, 2e-5, co);
    REQUIRE(cr.family.size() >= 2u);
    CHECK_FALSE(cr.step_underflow);
    CHECK(cr.family.back().nu == doctest::Approx(target));
    for (int steps : cr.newton_steps) CHECK(steps <= 8);
  }
}

TEST_CASE("mode tails") {
  TrigPoly2D u(10, 10, Parity::kOdd);
  u.a(1, 0) = 1.0;
  CHECK(mode_tail(u).x_tail == 0.0);
  u.a(10, 0) = 1.0;
  CHECK(mode_tail(u).x_tail > 0.1);
}
