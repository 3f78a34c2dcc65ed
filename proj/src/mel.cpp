// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/mel.hpp"

#include <cmath>

#include "wsep/common.hpp"

namespace wsep {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank mel_filterbank(int n_mels, const StftConfig& config,
                             int sample_rate) {
  const int nfft = config.fft_size(sample_rate);
  const int bins = nfft / 2 + 1;
  WSEP_CHECK(n_mels >= 1 && n_mels <= bins,
             "n_mels must be in [1, " << bins << "], got " << n_mels);

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.f_min = 0.0;
  fb.f_max = sample_rate / 2.0;
  fb.weights = Tensor<double>({n_mels, bins});

  const double mel_lo = hz_to_mel(fb.f_min);
  const double mel_hi = hz_to_mel(fb.f_max);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int m = 0; m < n_mels + 2; ++m)
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1));

  const double bin_hz = static_cast<double>(sample_rate) / nfft;
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], ctr = edges[m + 1], hi = edges[m + 2];
    bool nonzero = false;
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < ctr)
        w = (f - lo) / (ctr - lo);
      else if (f >= ctr && f < hi)
        w = (hi - f) / (hi - ctr);
      fb.weights.at(m, k) = w;
      nonzero = nonzero || w > 0.0;
    }
    if (!nonzero) {
      // Filter narrower than one bin: place unit weight on the bin
      // nearest its center so every row stays usable.
      int k = static_cast<int>(std::lround(ctr / bin_hz));
      k = std::min(bins - 1, std::max(0, k));
      fb.weights.at(m, k) = 1.0;
    }
  }
  return fb;
}

Spectrogram apply_mel(const MelFilterbank& fb, const Spectrogram& mag) {
  WSEP_CHECK(mag.kind == SpecKind::kMagnitude,
             "apply_mel expects a linear magnitude spectrogram");
  WSEP_CHECK(fb.weights.dim(1) == mag.freq_bins, "mel/spectrogram bin mismatch");
  Spectrogram out;
  out.kind = SpecKind::kMelMagnitude;
  out.config = mag.config;
  out.sample_rate = mag.sample_rate;
  out.freq_bins = fb.n_mels;
  out.frames = mag.frames;
  out.source_samples = mag.source_samples;
  out.values = Tensor<double>({fb.n_mels, mag.frames});
  for (int m = 0; m < fb.n_mels; ++m)
    for (int t = 0; t < mag.frames; ++t) {
      double s = 0.0;
      for (int k = 0; k < mag.freq_bins; ++k)
        s += fb.weights.at(m, k) * mag.values.at(k, t);
      out.values.at(m, t) = s;
    }
  return out;
}

}  // namespace wsep
