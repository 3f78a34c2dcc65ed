// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_AUDIO_HPP_
#define WSEP_AUDIO_HPP_

#include <string>
#include <vector>

namespace wsep {

// Fixed-rate mono waveform. Samples are doubles in [-1, 1] nominal range.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::size_t length() const { return samples.size(); }
};

// 16-bit PCM mono WAV at the clip's sample rate.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace wsep

#endif  // WSEP_AUDIO_HPP_
