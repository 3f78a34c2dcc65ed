// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Integrated loudness per the broadcast standard: K-weighting (shelf +
// high-pass), 400 ms gating blocks at 75% overlap, -70 LUFS absolute gate
// and -10 LU relative gate.

#ifndef WSEP_LOUDNESS_HPP_
#define WSEP_LOUDNESS_HPP_

#include <optional>

#include "wsep/audio.hpp"

namespace wsep {

// Integrated loudness in LUFS; nullopt for digital silence (no gating
// block reaches the absolute gate).
std::optional<double> measure_loudness(const AudioClip& clip);

// Pure-gain normalization to the target loudness (within 0.1 LU).
// Throws on silent input.
AudioClip normalize_loudness(const AudioClip& clip, double target_lufs);

}  // namespace wsep

#endif  // WSEP_LOUDNESS_HPP_
