// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic-scene sampling: event counts, placement, leveling, rendering.

#ifndef WSEP_SCENE_HPP_
#define WSEP_SCENE_HPP_

#include <string>
#include <vector>

#include "wsep/audio.hpp"
#include "wsep/rng.hpp"

namespace wsep::scene {

// A pool of isolated source events grouped by class.
struct EventPool {
  std::vector<std::string> classes;
  std::vector<std::vector<AudioClip>> events;  // events[class][event]

  int n() const { return static_cast<int>(classes.size()); }
  void validate() const;
};

// Built-in three-class synthetic pool (harmonic tone, linear chirp,
// band-passed noise burst). The class bands overlap heavily across draws
// (tone partials reach ~2.5 kHz, chirps sweep inside 0.4-3.4 kHz, noise
// bands sit anywhere in ~0.3-5.7 kHz), so neither classification nor
// separation can be solved by a fixed band split — the cues are harmonic
// structure, spectral motion, and texture. variants_per_class controls
// pool size.
EventPool toy_pool(std::uint64_t seed, int variants_per_class = 8);

struct SceneSpec {
  double lambda = 5.0;
  double clip_duration_s = 4.0;
  double event_min_s = 0.5;
  double event_max_s = 4.0;
  double level_lo_lufs = -30.0;
  double level_hi_lufs = -25.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SceneEvent {
  int class_index = 0;
  int source_event_id = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  double target_lufs = 0.0;
};

struct Scene {
  std::vector<SceneEvent> events;
  AudioClip mixture;
  std::vector<AudioClip> references;  // one per class; silent when absent
};

// Zero-truncated Poisson draw, k >= 1.
int sample_event_count(double lambda, Rng& rng);

Scene sample_scene(const SceneSpec& spec, const EventPool& pool, Rng& rng);

}  // namespace wsep::scene

#endif  // WSEP_SCENE_HPP_
