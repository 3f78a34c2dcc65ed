// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_FFT_HPP_
#define WSEP_FFT_HPP_

#include <complex>
#include <vector>

namespace wsep {

// In-place iterative radix-2 FFT. Length must be a power of two (the STFT
// configuration guarantees this).
void fft(std::vector<std::complex<double>>& x, bool inverse);

// Forward DFT of a real frame; returns the first n/2+1 bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& frame);

// Inverse of rfft: reconstructs n real samples from n/2+1 bins.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          int n);

}  // namespace wsep

#endif  // WSEP_FFT_HPP_
