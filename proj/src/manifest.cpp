// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace wsep::scene {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::pair<int, int>> rle_encode(const double* row, int frames) {
  std::vector<std::pair<int, int>> runs;
  int t = 0;
  while (t < frames) {
    if (row[t] > 0.5) {
      int start = t;
      while (t < frames && row[t] > 0.5) ++t;
      runs.emplace_back(start, t - start);
    } else {
      ++t;
    }
  }
  return runs;
}

Tensor<double> rle_decode(
    const std::vector<std::vector<std::pair<int, int>>>& rle, int n,
    int frames) {
  Tensor<double> out({n, frames});
  WSEP_CHECK(static_cast<int>(rle.size()) == n, "rle class count mismatch");
  for (int i = 0; i < n; ++i) {
    for (const auto& [start, len] : rle[i]) {
      WSEP_CHECK(start >= 0 && len > 0 && start + len <= frames,
                 "rle run out of range");
      for (int t = start; t < start + len; ++t) out.at(i, t) = 1.0;
    }
  }
  return out;
}

void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path, std::ios::trunc);
  WSEP_CHECK(f.good(), "cannot open manifest for writing: " + path);
  json header = {{"type", "header"},
                 {"classes", m.classes},
                 {"window_ms", m.stft.window_ms},
                 {"hop_ms", m.stft.hop_ms},
                 {"sample_rate", m.sample_rate}};
  f << header.dump() << "\n";
  for (const auto& r : m.records) {
    json rec = {{"clip_id", r.clip_id},
                {"mixture_path", r.mixture_path},
                {"reference_paths", r.reference_paths},
                {"clip_labels", r.clip_labels},
                {"frame_rle", r.frame_rle},
                {"frames", r.frames},
                {"seed", r.seed},
                {"lambda", r.lambda}};
    f << rec.dump() << "\n";
  }
  WSEP_CHECK(f.good(), "manifest write failed: " + path);
}

Manifest read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw MissingArtifactError("manifest not found: " + path);
  Manifest m;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (!have_header) {
      WSEP_CHECK(j.value("type", "") == "header",
                 "manifest must start with a header line");
      m.classes = j.at("classes").get<std::vector<std::string>>();
      m.stft.window_ms = j.at("window_ms").get<double>();
      m.stft.hop_ms = j.at("hop_ms").get<double>();
      m.sample_rate = j.at("sample_rate").get<int>();
      have_header = true;
      continue;
    }
    ClipRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.mixture_path = j.at("mixture_path").get<std::string>();
    r.reference_paths =
        j.at("reference_paths").get<std::vector<std::string>>();
    r.clip_labels = j.at("clip_labels").get<std::vector<int>>();
    r.frame_rle =
        j.at("frame_rle")
            .get<std::vector<std::vector<std::pair<int, int>>>>();
    r.frames = j.at("frames").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.lambda = j.at("lambda").get<double>();
    WSEP_CHECK(r.clip_labels.size() == m.classes.size() &&
                   r.frame_rle.size() == m.classes.size(),
               "manifest record class count mismatch");
    m.records.push_back(std::move(r));
  }
  WSEP_CHECK(have_header, "manifest is empty: " + path);
  return m;
}

ClassPriors compute_class_priors(const Manifest& m) {
  WSEP_CHECK(!m.records.empty(), "cannot compute priors on an empty manifest");
  const int n = m.n();
  std::vector<std::int64_t> active(n, 0);
  std::int64_t total = 0;
  for (const auto& r : m.records) {
    total += r.frames;
    for (int i = 0; i < n; ++i)
      for (const auto& [start, len] : r.frame_rle[i]) active[i] += len;
  }
  ClassPriors p;
  p.gamma.resize(n);
  for (int i = 0; i < n; ++i)
    p.gamma[i] = static_cast<double>(active[i]) / static_cast<double>(total);
  return p;
}

Manifest build_dataset(const SceneSpec& spec, const EventPool& pool, int count,
                       const std::string& out_dir, const BuildOptions& opts) {
  WSEP_CHECK(count >= 0, "build_dataset: negative count");
  spec.validate();
  pool.validate();

  fs::create_directories(out_dir);
  Manifest m;
  m.classes = pool.classes;
  m.stft = opts.stft;
  m.sample_rate = 16000;

  std::vector<fs::path> created;
  try {
    for (int c = 0; c < count; ++c) {
      Rng rng = Rng::substream(spec.rng_seed, static_cast<std::uint64_t>(c));
      Scene scene = sample_scene(spec, pool, rng);
      auto labels = derive_labels(scene, m.stft, false);

      char id[32];
      std::snprintf(id, sizeof(id), "clip_%05d", c);
      ClipRecord r;
      r.clip_id = id;
      r.mixture_path = std::string(id) + "_mix.wav";
      fs::path mix_abs = fs::path(out_dir) / r.mixture_path;
      write_wav(mix_abs.string(), scene.mixture);
      created.push_back(mix_abs);

      if (opts.store_references) {
        for (int i = 0; i < pool.n(); ++i) {
          std::string rel =
              std::string(id) + "_ref_" + pool.classes[i] + ".wav";
          fs::path abs = fs::path(out_dir) / rel;
          write_wav(abs.string(), scene.references[i]);
          created.push_back(abs);
          r.reference_paths.push_back(rel);
        }
      }
      r.clip_labels = labels.clip_labels;
      r.frames = labels.frame_labels.dim(1);
      for (int i = 0; i < pool.n(); ++i)
        r.frame_rle.push_back(
            rle_encode(labels.frame_labels.ptr() +
                           static_cast<std::size_t>(i) * r.frames,
                       r.frames));
      r.seed = spec.rng_seed;
      r.lambda = spec.lambda;
      m.records.push_back(std::move(r));
    }
    write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), m);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : created) fs::remove(p, ec);
    fs::remove(fs::path(out_dir) / "manifest.jsonl", ec);
    throw;
  }
  return m;
}

}  // namespace wsep::scene
