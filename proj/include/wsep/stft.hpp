// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Forward/inverse STFT with a sqrt-Hann analysis and synthesis window.
// Analysis reflect-pads half a window at both ends; synthesis trims it,
// giving exact round trips for any hop that divides the window.

#ifndef WSEP_STFT_HPP_
#define WSEP_STFT_HPP_

#include <complex>
#include <vector>

#include "wsep/audio.hpp"
#include "wsep/tensor.hpp"

namespace wsep {

struct StftConfig {
  double window_ms = 32.0;
  double hop_ms = 8.0;

  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  // Window length padded to the next power of two (equal to the window
  // for the 8/16/32/64 ms sweep at 16 kHz).
  int fft_size(int sample_rate) const;

  bool operator==(const StftConfig& o) const = default;
};

enum class SpecKind { kComplex, kMagnitude, kLogMagnitude, kMelMagnitude };

struct Spectrogram {
  SpecKind kind = SpecKind::kComplex;
  StftConfig config;
  int sample_rate = 16000;
  int freq_bins = 0;
  int frames = 0;
  std::size_t source_samples = 0;  // pre-padding length, used by istft

  // Column-per-frame complex STFT (kComplex) ...
  std::vector<std::complex<double>> cvalues;  // freq_bins * frames, row major
  // ... or nonnegative real values for the magnitude kinds.
  Tensor<double> values;

  std::complex<double>& cat(int f, int t) {
    return cvalues[static_cast<std::size_t>(f) * frames + t];
  }
  std::complex<double> cat(int f, int t) const {
    return cvalues[static_cast<std::size_t>(f) * frames + t];
  }
};

// Number of frames produced for a clip of `samples` samples.
int stft_frame_count(std::size_t samples, const StftConfig& config,
                     int sample_rate);

Spectrogram stft(const AudioClip& clip, const StftConfig& config);
AudioClip istft(const Spectrogram& spec, const StftConfig& config);

Spectrogram magnitude(const Spectrogram& complex_spec);
// log(magnitude + floor); floor keeps silent bins finite.
Spectrogram log_magnitude(const Spectrogram& complex_or_mag,
                          double floor = 1e-8);

// Rebuild a waveform from an estimated magnitude and the mixture phase.
AudioClip reconstruct(const Tensor<double>& est_mag,
                      const Spectrogram& mixture_complex,
                      const StftConfig& config);

std::vector<double> sqrt_hann_window(int n);

}  // namespace wsep

#endif  // WSEP_STFT_HPP_
