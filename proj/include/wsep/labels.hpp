// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_LABELS_HPP_
#define WSEP_LABELS_HPP_

#include <vector>

#include "wsep/scene.hpp"
#include "wsep/stft.hpp"
#include "wsep/tensor.hpp"

namespace wsep::scene {

struct LabelSet {
  Tensor<double> frame_labels;       // [n x T], entries in {0,1}
  std::vector<int> clip_labels;      // [n]
  std::vector<Spectrogram> strong_refs;  // magnitude spectra when requested

  std::vector<int> active_frame_set(int tau) const;
  std::vector<int> active_clip_set() const;
};

// A frame tau is active for class i when some event of class i intersects
// the frame's analysis-window span. Analysis reflect-pads half a window,
// so frame tau covers original samples [tau*hop - win/2, tau*hop + win/2).
LabelSet derive_labels(const Scene& scene, const StftConfig& config,
                       bool with_strong);

}  // namespace wsep::scene

#endif  // WSEP_LABELS_HPP_
