// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/labels.hpp"

#include <algorithm>

namespace wsep::scene {

std::vector<int> LabelSet::active_frame_set(int tau) const {
  std::vector<int> out;
  for (int i = 0; i < frame_labels.dim(0); ++i)
    if (frame_labels.at(i, tau) > 0.5) out.push_back(i);
  return out;
}

std::vector<int> LabelSet::active_clip_set() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < clip_labels.size(); ++i)
    if (clip_labels[i]) out.push_back(static_cast<int>(i));
  return out;
}

LabelSet derive_labels(const Scene& scene, const StftConfig& config,
                       bool with_strong) {
  const int n = static_cast<int>(scene.references.size());
  const int sr = scene.mixture.sample_rate;
  const int t_frames =
      stft_frame_count(scene.mixture.samples.size(), config, sr);
  const int hop = config.hop_samples(sr);
  const int win = config.window_samples(sr);

  LabelSet out;
  out.frame_labels = Tensor<double>({n, t_frames});
  out.clip_labels.assign(n, 0);

  // Analysis reflect-pads half a window, so frame tau's window covers
  // original samples [tau*hop - win/2, tau*hop + win/2).
  for (const auto& ev : scene.events) {
    const double ev_lo = ev.start_s * sr;
    const double ev_hi = ev_lo + ev.duration_s * sr;
    for (int tau = 0; tau < t_frames; ++tau) {
      const double w_lo = static_cast<double>(tau) * hop - win / 2;
      const double w_hi = w_lo + win;
      if (ev_lo < w_hi && w_lo < ev_hi)
        out.frame_labels.at(ev.class_index, tau) = 1.0;
    }
    out.clip_labels[ev.class_index] = 1;
  }

  if (with_strong) {
    out.strong_refs.reserve(n);
    for (const auto& ref : scene.references)
      out.strong_refs.push_back(magnitude(stft(ref, config)));
  }
  return out;
}

}  // namespace wsep::scene
