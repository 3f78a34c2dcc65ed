// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_MEL_HPP_
#define WSEP_MEL_HPP_

#include "wsep/stft.hpp"
#include "wsep/tensor.hpp"

namespace wsep {

struct MelFilterbank {
  Tensor<double> weights;  // [n_mels x F]
  int n_mels = 0;
  double f_min = 0.0;
  double f_max = 0.0;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters on the mel scale covering [0, Nyquist].
MelFilterbank mel_filterbank(int n_mels, const StftConfig& config,
                             int sample_rate);

// weights [n_mels x F] applied to a linear magnitude spectrogram.
Spectrogram apply_mel(const MelFilterbank& fb, const Spectrogram& mag);

}  // namespace wsep

#endif  // WSEP_MEL_HPP_
