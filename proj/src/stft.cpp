// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/stft.hpp"

#include <cmath>

#include "wsep/common.hpp"
#include "wsep/fft.hpp"

namespace wsep {

namespace {
int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

int StftConfig::window_samples(int sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}
int StftConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}
int StftConfig::fft_size(int sample_rate) const {
  return next_pow2(window_samples(sample_rate));
}

std::vector<double> sqrt_hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * M_PI * i / n));
  return w;
}

int stft_frame_count(std::size_t samples, const StftConfig& config,
                     int sample_rate) {
  const int win = config.window_samples(sample_rate);
  const int hop = config.hop_samples(sample_rate);
  const std::size_t padded = samples + static_cast<std::size_t>(win);
  WSEP_CHECK(padded >= static_cast<std::size_t>(win), "empty clip");
  return static_cast<int>((padded - win) / hop) + 1;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& config) {
  const int sr = clip.sample_rate;
  const int win = config.window_samples(sr);
  const int hop = config.hop_samples(sr);
  const int nfft = config.fft_size(sr);
  WSEP_CHECK(hop > 0 && win % hop == 0, "hop must divide the window length");
  WSEP_CHECK(clip.samples.size() >= static_cast<std::size_t>(win),
             "clip shorter than one analysis window ("
                 << clip.samples.size() << " < " << win << " samples)");

  // Reflect-pad half a window at both ends.
  const int pad = win / 2;
  const std::size_t n = clip.samples.size();
  std::vector<double> x(n + 2 * static_cast<std::size_t>(pad));
  for (int i = 0; i < pad; ++i) x[i] = clip.samples[static_cast<std::size_t>(pad - i)];
  std::copy(clip.samples.begin(), clip.samples.end(), x.begin() + pad);
  for (int i = 0; i < pad; ++i)
    x[pad + n + i] = clip.samples[n - 2 - static_cast<std::size_t>(i)];

  const int frames = static_cast<int>((x.size() - win) / hop) + 1;
  const int bins = nfft / 2 + 1;
  const std::vector<double> w = sqrt_hann_window(win);

  Spectrogram spec;
  spec.kind = SpecKind::kComplex;
  spec.config = config;
  spec.sample_rate = sr;
  spec.freq_bins = bins;
  spec.frames = frames;
  spec.source_samples = n;
  spec.cvalues.resize(static_cast<std::size_t>(bins) * frames);

  std::vector<double> frame(static_cast<std::size_t>(nfft), 0.0);
  for (int t = 0; t < frames; ++t) {
    const double* src = x.data() + static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < win; ++i) frame[i] = src[i] * w[i];
    for (int i = win; i < nfft; ++i) frame[i] = 0.0;
    auto bins_t = rfft(frame);
    for (int f = 0; f < bins; ++f) spec.cat(f, t) = bins_t[f];
  }
  return spec;
}

AudioClip istft(const Spectrogram& spec, const StftConfig& config) {
  WSEP_CHECK(spec.kind == SpecKind::kComplex, "istft requires a complex STFT");
  WSEP_CHECK(spec.config == config, "istft config mismatch");
  const int sr = spec.sample_rate;
  const int win = config.window_samples(sr);
  const int hop = config.hop_samples(sr);
  const int nfft = config.fft_size(sr);
  WSEP_CHECK(spec.freq_bins == nfft / 2 + 1, "istft bin count mismatch");

  const std::vector<double> w = sqrt_hann_window(win);
  const std::size_t padded_len =
      static_cast<std::size_t>(spec.frames - 1) * hop + win;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wsum(padded_len, 0.0);

  std::vector<std::complex<double>> col(static_cast<std::size_t>(spec.freq_bins));
  for (int t = 0; t < spec.frames; ++t) {
    for (int f = 0; f < spec.freq_bins; ++f) col[f] = spec.cat(f, t);
    std::vector<double> frame = irfft(col, nfft);
    double* dst = acc.data() + static_cast<std::size_t>(t) * hop;
    double* wd = wsum.data() + static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < win; ++i) {
      dst[i] += frame[i] * w[i];
      wd[i] += w[i] * w[i];
    }
  }

  const int pad = win / 2;
  std::size_t out_len = spec.source_samples > 0
                            ? spec.source_samples
                            : padded_len - 2 * static_cast<std::size_t>(pad);
  AudioClip clip;
  clip.sample_rate = sr;
  clip.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t j = i + pad;
    clip.samples[i] = wsum[j] > 1e-12 ? acc[j] / wsum[j] : 0.0;
  }
  return clip;
}

Spectrogram magnitude(const Spectrogram& cs) {
  WSEP_CHECK(cs.kind == SpecKind::kComplex, "magnitude needs a complex STFT");
  Spectrogram out;
  out.kind = SpecKind::kMagnitude;
  out.config = cs.config;
  out.sample_rate = cs.sample_rate;
  out.freq_bins = cs.freq_bins;
  out.frames = cs.frames;
  out.source_samples = cs.source_samples;
  out.values = Tensor<double>({cs.freq_bins, cs.frames});
  for (std::size_t i = 0; i < cs.cvalues.size(); ++i)
    out.values.data[i] = std::abs(cs.cvalues[i]);
  return out;
}

Spectrogram log_magnitude(const Spectrogram& s, double floor) {
  Spectrogram mag = s.kind == SpecKind::kComplex ? magnitude(s) : s;
  WSEP_CHECK(mag.kind == SpecKind::kMagnitude,
             "log_magnitude needs complex or magnitude input");
  Spectrogram out = mag;
  out.kind = SpecKind::kLogMagnitude;
  for (auto& v : out.values.data) v = std::log(v + floor);
  return out;
}

AudioClip reconstruct(const Tensor<double>& est_mag,
                      const Spectrogram& mix, const StftConfig& config) {
  WSEP_CHECK(mix.kind == SpecKind::kComplex, "reconstruct needs mixture STFT");
  WSEP_CHECK(est_mag.dim(0) == mix.freq_bins && est_mag.dim(1) == mix.frames,
             "reconstruct shape mismatch");
  Spectrogram est = mix;
  for (int f = 0; f < mix.freq_bins; ++f) {
    for (int t = 0; t < mix.frames; ++t) {
      std::complex<double> c = mix.cat(f, t);
      double m = std::abs(c);
      // Mixture phase, estimated magnitude.
      est.cat(f, t) = m > 1e-300 ? c * (est_mag.at(f, t) / m)
                                 : std::complex<double>(est_mag.at(f, t), 0.0);
    }
  }
  return istft(est, config);
}

}  // namespace wsep
