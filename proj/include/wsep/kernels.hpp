// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops used by the tensor and network code.  Scalar
// reference kernels plus an AVX2/FMA variant selected at runtime.  The
// float overloads dispatch; double overloads always run the scalar path
// (they only appear in tests and in the signal front-end).

#ifndef WSEP_KERNELS_HPP_
#define WSEP_KERNELS_HPP_

#include <cstddef>

namespace wsep::kernels {

enum class Backend { kAuto, kScalar, kAvx2 };

// Returns true if the CPU supports AVX2+FMA.
bool cpu_has_avx2();

// Force a backend (tests use this to compare scalar vs SIMD results).
// kAuto re-enables runtime detection.
void set_backend(Backend b);
Backend active_backend();

// y += a * x
void axpy(std::size_t n, float a, const float* x, float* y);
float dot(std::size_t n, const float* x, const float* y);
float sum_abs(std::size_t n, const float* x);
float sum_sq(std::size_t n, const float* x);

// Row-major accumulating matrix products. C is [m x n] and is added to,
// never overwritten.
//   gemm_nn: C += A[m x k] * B[k x n]
//   gemm_nt: C += A[m x k] * B[n x k]^T
//   gemm_tn: C += A[k x m]^T * B[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);

// Scalar double versions, used by the double-precision instantiations of
// the autodiff stack (gradient-check tests).
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
double sum_abs(std::size_t n, const double* x);
double sum_sq(std::size_t n, const double* x);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

namespace detail {
// Scalar reference implementations, exposed for equivalence tests.
template <typename T>
void axpy_scalar(std::size_t n, T a, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
template <typename T>
T dot_scalar(std::size_t n, const T* x, const T* y) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}
template <typename T>
T sum_abs_scalar(std::size_t n, const T* x) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] < 0 ? -x[i] : x[i];
  return s;
}
template <typename T>
T sum_sq_scalar(std::size_t n, const T* x) {
  T s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}
template <typename T>
void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k,
                    const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_scalar(n, a[i * k + p], b + p * n, c + i * n);
}
template <typename T>
void gemm_nt_scalar(std::size_t m, std::size_t n, std::size_t k,
                    const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c[i * n + j] += dot_scalar(k, a + i * k, b + j * k);
}
template <typename T>
void gemm_tn_scalar(std::size_t m, std::size_t n, std::size_t k,
                    const T* a, const T* b, T* c) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i)
      axpy_scalar(n, a[p * m + i], b + p * n, c + i * n);
}
}  // namespace detail

}  // namespace wsep::kernels

#endif  // WSEP_KERNELS_HPP_
