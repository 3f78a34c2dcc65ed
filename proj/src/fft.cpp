// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/fft.hpp"

#include <cmath>

#include "wsep/common.hpp"

namespace wsep {

void fft(std::vector<std::complex<double>>& x, bool inverse) {
  const std::size_t n = x.size();
  WSEP_CHECK(n > 0 && (n & (n - 1)) == 0, "fft length must be a power of two");
  // Bit reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : x) v /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& frame) {
  const int n = static_cast<int>(frame.size());
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft(buf, false);
  buf.resize(static_cast<std::size_t>(n / 2 + 1));
  return buf;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          int n) {
  WSEP_CHECK(static_cast<int>(bins.size()) == n / 2 + 1,
             "irfft bin count mismatch");
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
  for (int k = 0; k <= n / 2; ++k) buf[static_cast<std::size_t>(k)] = bins[k];
  for (int k = n / 2 + 1; k < n; ++k)
    buf[static_cast<std::size_t>(k)] = std::conj(bins[n - k]);
  fft(buf, true);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace wsep
