#pragma once

#include <cstdint>

namespace freqcross {

// Row-major matrix kernels for the conv/linear layers. Every reduction runs
// in a fixed order (no reassociation beyond the fixed lane pattern below), so
// outputs are bitwise reproducible run to run and across thread counts.

// c (m x n) = a (m x k) * b (k x n), optionally accumulating into c.
template <typename T>
void gemm_nn(int64_t m, int64_t n, int64_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  for (int64_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    if (!accumulate) {
      for (int64_t j = 0; j < n; ++j) ci[j] = T(0);
    }
    const T* ai = a + i * k;
    for (int64_t l = 0; l < k; ++l) {
      const T av = ai[l];
      const T* bl = b + l * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

// c (m x n) = a^T * b with a stored (k x m), b stored (k x n).
template <typename T>
void gemm_tn(int64_t m, int64_t n, int64_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  if (!accumulate) {
    for (int64_t i = 0; i < m * n; ++i) c[i] = T(0);
  }
  for (int64_t l = 0; l < k; ++l) {
    const T* al = a + l * m;
    const T* bl = b + l * n;
    for (int64_t i = 0; i < m; ++i) {
      const T av = al[i];
      T* ci = c + i * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

// c (m x n) = a (m x k) * b^T with b stored (n x k). Row-times-row dot
// products, accumulated over a fixed 8-lane pattern so the sum order never
// depends on the optimizer.
template <typename T>
void gemm_nt(int64_t m, int64_t n, int64_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  constexpr int64_t kLanes = 8;
  for (int64_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    T* ci = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const T* bj = b + j * k;
      T acc[kLanes] = {};
      int64_t l = 0;
      for (; l + kLanes <= k; l += kLanes) {
        for (int64_t t = 0; t < kLanes; ++t) acc[t] += ai[l + t] * bj[l + t];
      }
      T tail = T(0);
      for (; l < k; ++l) tail += ai[l] * bj[l];
      const T sum = (((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                     ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
                    tail;
      ci[j] = accumulate ? ci[j] + sum : sum;
    }
  }
}

}  // namespace freqcross
