// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/loudness.hpp"

#include <cmath>
#include <vector>

#include "wsep/common.hpp"

namespace wsep {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void process(const std::vector<double>& in, std::vector<double>& out) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      double x0 = in[i];
      double y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      out[i] = y0;
      x2 = x1;
      x1 = x0;
      y2 = y1;
      y1 = y0;
    }
  }
};

// K-weighting prefilters designed from the analog prototypes so they are
// correct at any sample rate, not only 48 kHz.
Biquad k_shelf(double fs) {
  const double f0 = 1681.974450955533;
  const double gain_db = 3.999843853973347;
  const double q = 0.7071752369554196;
  const double k = std::tan(M_PI * f0 / fs);
  const double vh = std::pow(10.0, gain_db / 20.0);
  const double vb = std::pow(vh, 0.4996667741545416);
  const double a0 = 1.0 + k / q + k * k;
  Biquad f;
  f.b0 = (vh + vb * k / q + k * k) / a0;
  f.b1 = 2.0 * (k * k - vh) / a0;
  f.b2 = (vh - vb * k / q + k * k) / a0;
  f.a1 = 2.0 * (k * k - 1.0) / a0;
  f.a2 = (1.0 - k / q + k * k) / a0;
  return f;
}

Biquad k_highpass(double fs) {
  const double f0 = 38.13547087602444;
  const double q = 0.5003270373238773;
  const double k = std::tan(M_PI * f0 / fs);
  const double a0 = 1.0 + k / q + k * k;
  Biquad f;
  f.b0 = 1.0;
  f.b1 = -2.0;
  f.b2 = 1.0;
  f.a1 = 2.0 * (k * k - 1.0) / a0;
  f.a2 = (1.0 - k / q + k * k) / a0;
  return f;
}

constexpr double kAbsoluteGateLufs = -70.0;
constexpr double kLoudnessOffset = -0.691;

double block_loudness(double mean_square) {
  return kLoudnessOffset + 10.0 * std::log10(mean_square + 1e-300);
}

}  // namespace

std::optional<double> measure_loudness(const AudioClip& clip) {
  const double fs = clip.sample_rate;
  std::vector<double> w1, w2;
  k_shelf(fs).process(clip.samples, w1);
  k_highpass(fs).process(w1, w2);

  const std::size_t block = static_cast<std::size_t>(std::lround(0.400 * fs));
  const std::size_t step = block / 4;  // 75% overlap
  std::vector<double> energies;
  if (w2.size() < block) {
    // Clip shorter than one gating block: single ungated block.
    double e = 0.0;
    for (double v : w2) e += v * v;
    if (w2.empty()) return std::nullopt;
    energies.push_back(e / static_cast<double>(w2.size()));
  } else {
    for (std::size_t start = 0; start + block <= w2.size(); start += step) {
      double e = 0.0;
      for (std::size_t i = start; i < start + block; ++i) e += w2[i] * w2[i];
      energies.push_back(e / static_cast<double>(block));
    }
  }

  // Absolute gate.
  double sum = 0.0;
  std::size_t count = 0;
  for (double e : energies) {
    if (block_loudness(e) > kAbsoluteGateLufs) {
      sum += e;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;

  // Relative gate at -10 LU below the absolutely gated mean.
  const double rel_threshold = block_loudness(sum / count) - 10.0;
  sum = 0.0;
  count = 0;
  for (double e : energies) {
    double l = block_loudness(e);
    if (l > kAbsoluteGateLufs && l > rel_threshold) {
      sum += e;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return block_loudness(sum / count);
}

AudioClip normalize_loudness(const AudioClip& clip, double target_lufs) {
  auto current = measure_loudness(clip);
  WSEP_CHECK(current.has_value(), "cannot normalize a silent clip");
  AudioClip out = clip;
  // Two passes: the gain shifts which blocks pass the gates, so re-measure
  // once after the first adjustment.
  for (int pass = 0; pass < 2; ++pass) {
    const double gain = std::pow(10.0, (target_lufs - *current) / 20.0);
    for (auto& s : out.samples) s *= gain;
    current = measure_loudness(out);
    WSEP_CHECK(current.has_value(), "clip became silent during normalization");
    if (std::abs(*current - target_lufs) <= 0.05) break;
  }
  return out;
}

}  // namespace wsep
