// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

// Building blocks shared by the float and interval assemblies of the
// linearised operator. Scalar type T is double or Interval.

#pragma once

#include <vector>

#include "ksorbit/fourier.hpp"

namespace ks::detail {

// Emits the terms of d_x(u0 * X_l), u0 odd, X_l an odd basis function, as
// emit(m1, m2, sine, value) with m1 >= 1.
template <class T, class Emit>
void for_each_dx_product_term(const TrigPoly2D& u0, const ModeIndex& l, Emit&& emit) {
  for (int k1 = u0.k1_min(); k1 <= u0.d1(); ++k1) {
    for (int k2 = 0; k2 <= u0.d2(); ++k2) {
      for (int s = 0; s < 2; ++s) {
        const bool ks = s == 1;
        if (ks && k2 == 0) continue;
        const double coef = ks ? u0.b(k1, k2) : u0.a(k1, k2);
        if (coef == 0.0) continue;
        product_terms(Parity::kOdd, k1, k2, ks, Parity::kOdd, l.k1, l.k2, l.sine,
                      [&](int m1, int m2, bool sine, double fac) {
                        if (m1 == 0) return;
                        // d_x cos(m1 x) = -m1 sin(m1 x)
                        const T v = T(coef) * T(fac) * T(-static_cast<double>(m1));
                        emit(m1, m2, sine, v);
                      });
      }
    }
  }
}

template <class T>
T shifted_symbol_t(int k1, double nu, double c) {
  const double k = static_cast<double>(k1);
  const T kk = T(k) * T(k);
  return T(nu) * kk * kk - kk + T(c);
}

// In-place S_c^{-1} on a vector in the flat layout of degrees (d1, d2), odd parity.
template <class T>
void apply_sc_inv_flat(std::vector<T>& v, int d1, int d2, double f, double nu, double c) {
  const std::size_t w = 2 * static_cast<std::size_t>(d2) + 1;
  for (int k1 = 1; k1 <= d1; ++k1) {
    const T p = shifted_symbol_t<T>(k1, nu, c);
    const std::size_t base = static_cast<std::size_t>(k1 - 1) * w;
    v[base] = v[base] / p;
    const T p2 = p * p;
    for (int k2 = 1; k2 <= d2; ++k2) {
      const T q = T(f) * T(static_cast<double>(k2));
      const T det = p2 + q * q;
      T& A = v[base + 2 * k2 - 1];
      T& B = v[base + 2 * k2];
      const T a = (p * A - q * B) / det;
      const T b = (q * A + p * B) / det;
      A = a;
      B = b;
    }
  }
}

inline std::size_t flat_odd(int k1, int k2, bool sine, int d2) {
  return static_cast<std::size_t>(k1 - 1) * (2 * d2 + 1) + (k2 == 0 ? 0 : 2 * k2 - (sine ? 0 : 1));
}

}  // namespace ks::detail
