// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests: one JSON object per line. The first line is a header
// carrying the class list and analysis settings; every following line is
// one clip record with run-length-encoded frame labels.

#ifndef WSEP_MANIFEST_HPP_
#define WSEP_MANIFEST_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wsep/labels.hpp"
#include "wsep/losses.hpp"
#include "wsep/scene.hpp"
#include "wsep/stft.hpp"

namespace wsep::scene {

struct ClipRecord {
  std::string clip_id;
  std::string mixture_path;
  std::vector<std::string> reference_paths;  // empty when refs not stored
  std::vector<int> clip_labels;
  // Per class: active runs as (start_frame, length) pairs.
  std::vector<std::vector<std::pair<int, int>>> frame_rle;
  int frames = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
};

struct Manifest {
  std::vector<std::string> classes;
  StftConfig stft;
  int sample_rate = 16000;
  std::vector<ClipRecord> records;

  int n() const { return static_cast<int>(classes.size()); }
};

std::vector<std::pair<int, int>> rle_encode(const double* row, int frames);
Tensor<double> rle_decode(const std::vector<std::vector<std::pair<int, int>>>& rle,
                          int n, int frames);

void write_manifest(const std::string& path, const Manifest& m);
Manifest read_manifest(const std::string& path);

// Fraction of active frames per class over the manifest (Table II style).
ClassPriors compute_class_priors(const Manifest& m);

struct BuildOptions {
  bool store_references = true;
  StftConfig stft;  // analysis settings used for frame labels
};

// Render `count` scenes into out_dir and write out_dir/manifest.jsonl.
// Deterministic in (spec, pool, count); clip i uses substream(seed, i).
// On I/O failure, removes everything it created before rethrowing.
Manifest build_dataset(const SceneSpec& spec, const EventPool& pool, int count,
                       const std::string& out_dir,
                       const BuildOptions& opts = {});

}  // namespace wsep::scene

#endif  // WSEP_MANIFEST_HPP_
