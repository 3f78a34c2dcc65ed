// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2/FMA kernels. This translation unit is the only one compiled with
// -mavx2 -mfma; callers reach it through the dispatch layer in kernels.cpp.

#include <cstddef>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace wsep::kernels::avx2 {

namespace {
inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}
}  // namespace

void axpy(std::size_t n, float a, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(y + i);
    vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot(std::size_t n, const float* x, const float* y) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  float s = hsum256(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

float sum_abs(std::size_t n, const float* x) {
  const __m256 mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_add_ps(acc, _mm256_and_ps(_mm256_loadu_ps(x + i), mask));
  float s = hsum256(acc);
  for (; i < n; ++i) s += x[i] < 0 ? -x[i] : x[i];
  return s;
}

float sum_sq(std::size_t n, const float* x) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float s = hsum256(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

// C += A * B, all row major. Broadcast one A element, stream a B row into
// a C row; with n in the few-hundreds both rows stay in L1.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    const float* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) axpy(n, arow[p], b + p * n, crow);
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot(k, a + i * k, b + j * k);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const float* brow = b + p * n;
    const float* acol = a + p * m;
    for (std::size_t i = 0; i < m; ++i) axpy(n, acol[i], brow, c + i * n);
  }
}

}  // namespace wsep::kernels::avx2

#else  // non-x86: dispatch never selects this backend, keep stubs.

namespace wsep::kernels::avx2 {
void axpy(std::size_t, float, const float*, float*) {}
float dot(std::size_t, const float*, const float*) { return 0; }
float sum_abs(std::size_t, const float*) { return 0; }
float sum_sq(std::size_t, const float*) { return 0; }
void gemm_nn(std::size_t, std::size_t, std::size_t, const float*, const float*,
             float*) {}
void gemm_nt(std::size_t, std::size_t, std::size_t, const float*, const float*,
             float*) {}
void gemm_tn(std::size_t, std::size_t, std::size_t, const float*, const float*,
             float*) {}
}  // namespace wsep::kernels::avx2

#endif
