// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cblas.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "ksorbit/interval.hpp"

namespace ks {

namespace {

std::atomic<std::uint64_t> g_products{0};

void pin_blas_single_thread() {
  // Worker threads spawned by the BLAS would not inherit our rounding mode.
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

// C = A*B + beta*C under whatever rounding mode is active.
void gemm(const RowMatrix& A, const RowMatrix& B, double beta, RowMatrix& C) {
  const int m = static_cast<int>(A.rows());
  const int k = static_cast<int>(A.cols());
  const int n = static_cast<int>(B.cols());
  if (m == 0 || n == 0) return;
  if (k == 0) {
    C *= beta;
    return;
  }
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0, A.data(), k, B.data(), n,
              beta, C.data(), n);
}

struct MidRad {
  RowMatrix mid;
  RowMatrix rad;
};

// Must run under FE_UPWARD: mid = (lo+hi)/2, rad = mid - lo, both rounded up,
// so that [lo, hi] is contained in [mid - rad, mid + rad].
MidRad mid_rad_upward(const RowMatrix& lo, const RowMatrix& hi) {
  MidRad r;
  r.mid = (0.5 * (lo.array() + hi.array())).matrix();
  r.rad = (r.mid.array() - lo.array()).matrix();
  return r;
}

// The four products for a horizontal slice of rows of A.
void rump_block(const RowMatrix& A1, const RowMatrix& A2, const RowMatrix& mB,
                const RowMatrix& absB_plus_rB, const RowMatrix& rB, RowMatrix& C1, RowMatrix& C2) {
  RoundingGuard up(FE_UPWARD);
  const MidRad a = mid_rad_upward(A1, A2);
  const RowMatrix abs_mA = a.mid.cwiseAbs();
  RowMatrix rC = RowMatrix::Zero(A1.rows(), mB.cols());
  gemm(abs_mA, rB, 0.0, rC);
  gemm(a.rad, absB_plus_rB, 1.0, rC);
  C2 = rC;
  gemm(a.mid, mB, 1.0, C2);
  std::fesetround(FE_DOWNWARD);
  C1 = -rC;
  gemm(a.mid, mB, 1.0, C1);
}

}  // namespace

std::uint64_t dense_product_count() { return g_products.load(); }

IntervalMatrix rump_matmul(const IntervalMatrix& A, const IntervalMatrix& B, int threads) {
  if (A.cols() != B.rows()) {
    fail(ErrorCode::kDimensionMismatch, "rump_matmul: inner dimensions differ");
  }
  pin_blas_single_thread();
  g_products.fetch_add(4);

  MidRad b;
  RowMatrix absB_plus_rB;
  {
    RoundingGuard up(FE_UPWARD);
    b = mid_rad_upward(B.inf(), B.sup());
    absB_plus_rB = (b.mid.cwiseAbs() + b.rad).eval();
  }

  const Eigen::Index m = A.rows();
  RowMatrix C1(m, B.cols()), C2(m, B.cols());
  const int nt = std::clamp<int>(threads, 1, static_cast<int>(std::max<Eigen::Index>(m, 1)));
  if (nt == 1) {
    rump_block(A.inf(), A.sup(), b.mid, absB_plus_rB, b.rad, C1, C2);
    return IntervalMatrix(std::move(C1), std::move(C2));
  }

  // Row blocks are independent; each worker owns its rounding state.
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (m + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const Eigen::Index r0 = t * chunk;
    const Eigen::Index rows = std::min(chunk, m - r0);
    if (rows <= 0) break;
    pool.emplace_back([&, r0, rows] {
      RowMatrix a1 = A.inf().middleRows(r0, rows);
      RowMatrix a2 = A.sup().middleRows(r0, rows);
      RowMatrix c1, c2;
      rump_block(a1, a2, b.mid, absB_plus_rB, b.rad, c1, c2);
      C1.middleRows(r0, rows) = c1;
      C2.middleRows(r0, rows) = c2;
    });
  }
  for (auto& th : pool) th.join();
  return IntervalMatrix(std::move(C1), std::move(C2));
}

RowMatrix float_matmul(const RowMatrix& A, const RowMatrix& B) {
  if (A.cols() != B.rows()) {
    fail(ErrorCode::kDimensionMismatch, "float_matmul: inner dimensions differ");
  }
  pin_blas_single_thread();
  RowMatrix C = RowMatrix::Zero(A.rows(), B.cols());
  gemm(A, B, 0.0, C);
  return C;
}

}  // namespace ks
