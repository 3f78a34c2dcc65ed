// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/kernels.hpp"

#include <atomic>

namespace wsep::kernels {

// Implemented in kernels_avx2.cpp (compiled with -mavx2 -mfma).
namespace avx2 {
void axpy(std::size_t n, float a, const float* x, float* y);
float dot(std::size_t n, const float* x, const float* y);
float sum_abs(std::size_t n, const float* x);
float sum_sq(std::size_t n, const float* x);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c);
}  // namespace avx2

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {
std::atomic<Backend> g_backend{Backend::kAuto};

inline bool use_avx2() {
  Backend b = g_backend.load(std::memory_order_relaxed);
  if (b == Backend::kScalar) return false;
  if (b == Backend::kAvx2) return true;
  static const bool has = cpu_has_avx2();
  return has;
}
}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend active_backend() { return g_backend.load(); }

void axpy(std::size_t n, float a, const float* x, float* y) {
  if (use_avx2()) return avx2::axpy(n, a, x, y);
  detail::axpy_scalar(n, a, x, y);
}
float dot(std::size_t n, const float* x, const float* y) {
  if (use_avx2()) return avx2::dot(n, x, y);
  return detail::dot_scalar(n, x, y);
}
float sum_abs(std::size_t n, const float* x) {
  if (use_avx2()) return avx2::sum_abs(n, x);
  return detail::sum_abs_scalar(n, x);
}
float sum_sq(std::size_t n, const float* x) {
  if (use_avx2()) return avx2::sum_sq(n, x);
  return detail::sum_sq_scalar(n, x);
}
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  if (use_avx2()) return avx2::gemm_nn(m, n, k, a, b, c);
  detail::gemm_nn_scalar(m, n, k, a, b, c);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  if (use_avx2()) return avx2::gemm_nt(m, n, k, a, b, c);
  detail::gemm_nt_scalar(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const float* a, const float* b, float* c) {
  if (use_avx2()) return avx2::gemm_tn(m, n, k, a, b, c);
  detail::gemm_tn_scalar(m, n, k, a, b, c);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  detail::axpy_scalar(n, a, x, y);
}
double dot(std::size_t n, const double* x, const double* y) {
  return detail::dot_scalar(n, x, y);
}
double sum_abs(std::size_t n, const double* x) {
  return detail::sum_abs_scalar(n, x);
}
double sum_sq(std::size_t n, const double* x) {
  return detail::sum_sq_scalar(n, x);
}
void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
  detail::gemm_nn_scalar(m, n, k, a, b, c);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
  detail::gemm_nt_scalar(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
  detail::gemm_tn_scalar(m, n, k, a, b, c);
}

}  // namespace wsep::kernels
