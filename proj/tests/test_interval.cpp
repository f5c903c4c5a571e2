// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "ksorbit/interval.hpp"

using namespace ks;
using namespace ks::rnd;

TEST_CASE("scalar ops") {
  const Interval s = Interval(1, 2) + Interval(3, 4);
  CHECK(s.lo == 4.0);
  CHECK(s.hi == 6.0);
  const Interval p = Interval(-1, 2) * Interval(-3, 1);
  CHECK(p.lo == -6.0);
  CHECK(p.hi == 3.0);
  const Interval third = Interval(1.0) / Interval(3.0);
  CHECK(third.lo < third.hi);
  CHECK(third.hi == next_up(third.lo));
  CHECK_THROWS_AS(Interval(1.0) / Interval(-1, 1), Error);
  CHECK_THROWS_AS(Interval(2.0, 1.0), Error);
  CHECK_THROWS_AS(sqrt(Interval(-1.0, 1.0)), Error);
}

TEST_CASE("directed rounding brackets the exact value") {
  const double a = 0.1, b = 0.2;
  CHECK(add_down(a, b) < add_up(a, b));
  CHECK(mul_down(a, 3.0) <= a * 3.0);
  CHECK(mul_up(a, 3.0) >= a * 3.0);
  const Interval r2 = sqrt(Interval(2.0));
  CHECK(r2.contains(std::sqrt(2.0)));
  CHECK(sqr(r2).contains(2.0));
}

TEST_CASE("pi and transcendentals enclose libm") {
  CHECK(pi_interval().contains(M_PI));
  CHECK(exp(Interval(1.0)).contains(std::exp(1.0)));
  CHECK(log(Interval(10.0)).contains(std::log(10.0)));
  CHECK(pow(Interval(2.0), Interval(0.75)).contains(std::pow(2.0, 0.75)));
  CHECK(pow_int(Interval(-2.0, 1.0), 2).lo == 0.0);
}

TEST_CASE("rump_matmul on exact point matrices is exact") {
  RowMatrix A(3, 3), B(3, 3);
  A << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  B << 1, 0, -1, 2, 1, 0, 0, 3, 1;
  const std::uint64_t before = dense_product_count();
  const IntervalMatrix C = rump_matmul(IntervalMatrix::point(A), IntervalMatrix::point(B));
  CHECK(dense_product_count() - before == 4u);
  const RowMatrix E = A * B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(C(i, j).lo == E(i, j));
      CHECK(C(i, j).hi == E(i, j));
    }
}

TEST_CASE("rump_matmul encloses sampled products") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 7;
    RowMatrix Ai(n, n), As(n, n), Bi(n, n), Bs(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double a = U(rng), ra = 0.1 * std::abs(U(rng)), b = U(rng), rb = 0.1 * std::abs(U(rng));
        Ai(i, j) = a - ra;
        As(i, j) = a + ra;
        Bi(i, j) = b - rb;
        Bs(i, j) = b + rb;
      }
    const IntervalMatrix C = rump_matmul(IntervalMatrix(Ai, As), IntervalMatrix(Bi, Bs));
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < 20; ++s) {
      RowMatrix A(n, n), B(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          A(i, j) = coin(rng) ? Ai(i, j) : As(i, j);
          B(i, j) = coin(rng) ? Bi(i, j) : Bs(i, j);
        }
      // the float product may round; allow one ulp of slack per entry
      const RowMatrix P = A * B;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double slack = 4.0 * n * 1.2e-16 * A.row(i).cwiseAbs().dot(B.col(j).cwiseAbs());
          CHECK(C(i, j).lo <= P(i, j) + slack);
          CHECK(P(i, j) - slack <= C(i, j).hi);
        }
    }
  }
}

TEST_CASE("weighted norms") {
  const BasisMap map = BasisMap::flat(3, 2);
  std::vector<Interval> zero(map.size(), Interval(0.0));
  CHECK(weighted_vector_norm(std::span<const Interval>(zero), map, {0, 0, 0}).value == 0.0);

  std::vector<Interval> e(map.size(), Interval(0.0));
  e[0] = Interval(1.0);
  const double n1 = weighted_vector_norm(std::span<const Interval>(e), map, {0, 0, 0}).value;
  CHECK(n1 >= 1.0);
  CHECK(n1 <= 1.0 + 1e-15);

  const RowMatrix I = RowMatrix::Identity(map.size(), map.size());
  const double ni = weighted_operator_norm(I, map, map, {0.1, 1, 1}).value;
  CHECK(ni >= 1.0);
  CHECK(ni <= 1.0 + 1e-12);

  RowMatrix D = RowMatrix::Zero(map.size(), map.size());
  for (std::size_t j = 0; j < map.size(); ++j) D(j, j) = (j % 3 == 0 ? -1.0 : 0.5) * (1.0 + 0.1 * j);
  const double nd = weighted_operator_norm(D, map, map, {0.1, 1, 1}).value;
  CHECK(nd == doctest::Approx(D.cwiseAbs().maxCoeff()).epsilon(1e-13));
}

TEST_CASE("bordered basis map carries the scalar first") {
  const BasisMap m = BasisMap::bordered(2, 1);
  CHECK(m.size() == 1u + 2u * 3u);
  CHECK(m.modes[0].k1 < 0);
  CHECK(weight_interval(m.modes[0], {1.0, 1.0, 1.0}).contains(1.0));
}
