// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/networks.hpp"

#include <cstring>
#include <fstream>

namespace wsep::net {

using nlohmann::json;

void to_json(json& j, const SeparatorSpec& s) {
  j = json{{"recurrent_layers", s.recurrent_layers},
           {"hidden", s.hidden},
           {"n_classes", s.n_classes},
           {"freq_bins", s.freq_bins},
           {"input_norm", s.input_norm}};
}

void from_json(const json& j, SeparatorSpec& s) {
  s.recurrent_layers = j.value("recurrent_layers", s.recurrent_layers);
  s.hidden = j.value("hidden", s.hidden);
  s.n_classes = j.value("n_classes", s.n_classes);
  s.freq_bins = j.value("freq_bins", s.freq_bins);
  s.input_norm = j.value("input_norm", s.input_norm);
}

void to_json(json& j, const ConvStage& s) {
  j = json{{"channels", s.channels}, {"kernel_f", s.kernel_f},
           {"kernel_t", s.kernel_t}, {"pool_f", s.pool_f},
           {"pool_t", s.pool_t}};
}

void from_json(const json& j, ConvStage& s) {
  s.channels = j.value("channels", s.channels);
  s.kernel_f = j.value("kernel_f", s.kernel_f);
  s.kernel_t = j.value("kernel_t", s.kernel_t);
  s.pool_f = j.value("pool_f", s.pool_f);
  s.pool_t = j.value("pool_t", s.pool_t);
}

void to_json(json& j, const ClassifierSpec& s) {
  j = json{{"kind", s.kind},
           {"n_classes", s.n_classes},
           {"freq_bins", s.freq_bins},
           {"input_kind", s.input_kind},
           {"n_mels", s.n_mels},
           {"log_input", s.log_input},
           {"rnn_layers", s.rnn_layers},
           {"rnn_hidden", s.rnn_hidden},
           {"stages", s.stages},
           {"crnn_hidden", s.crnn_hidden},
           {"clip_pool", s.clip_pool}};
}

void from_json(const json& j, ClassifierSpec& s) {
  s.kind = j.value("kind", s.kind);
  s.n_classes = j.value("n_classes", s.n_classes);
  s.freq_bins = j.value("freq_bins", s.freq_bins);
  s.input_kind = j.value("input_kind", s.input_kind);
  s.n_mels = j.value("n_mels", s.n_mels);
  s.log_input = j.value("log_input", s.log_input);
  s.rnn_layers = j.value("rnn_layers", s.rnn_layers);
  s.rnn_hidden = j.value("rnn_hidden", s.rnn_hidden);
  if (j.contains("stages"))
    s.stages = j.at("stages").get<std::vector<ConvStage>>();
  s.crnn_hidden = j.value("crnn_hidden", s.crnn_hidden);
  s.clip_pool = j.value("clip_pool", s.clip_pool);
}

Tensor<double> downsample_labels(const Tensor<double>& frame_labels,
                                 int factor) {
  WSEP_CHECK(factor >= 1, "downsample_labels: factor must be >= 1");
  WSEP_CHECK(frame_labels.rank() == 2, "downsample_labels: expect [n x T]");
  if (factor == 1) return frame_labels;
  const int n = frame_labels.dim(0), t = frame_labels.dim(1);
  const int tp = (t + factor - 1) / factor;
  Tensor<double> out({n, tp});
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < tp; ++b) {
      double m = 0.0;
      for (int k = b * factor; k < std::min(t, (b + 1) * factor); ++k)
        m = std::max(m, frame_labels.at(i, k));
      out.at(i, b) = m;
    }
  return out;
}

Tensor<double> make_classifier_features(const Spectrogram& mag,
                                        const ClassifierSpec& spec,
                                        const MelFilterbank* fb) {
  WSEP_CHECK(mag.kind == SpecKind::kMagnitude,
             "classifier features start from a magnitude spectrogram");
  Tensor<double> feats;
  if (spec.input_kind == FeatureKind::kMelMagnitude) {
    WSEP_CHECK(fb != nullptr, "mel input requires a filterbank");
    WSEP_CHECK(fb->n_mels == spec.n_mels && fb->weights.dim(1) == mag.freq_bins,
               "mel filterbank does not match the classifier spec");
    feats = apply_mel(*fb, mag).values;
  } else {
    WSEP_CHECK(mag.freq_bins == spec.freq_bins,
               "magnitude bins do not match the classifier spec");
    feats = mag.values;
  }
  if (spec.log_input)
    for (auto& v : feats.data) v = std::log(v + 1e-8);
  return feats;
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[] = "WSEPCK1\n";
}

void save_checkpoint(const std::string& path, const ParamMap<float>& params,
                     const json& meta) {
  json header;
  header["meta"] = meta;
  json table = json::array();
  for (const auto& [name, t] : params)
    table.push_back({{"name", name}, {"shape", t.shape}});
  header["tensors"] = table;
  const std::string h = header.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  WSEP_CHECK(f.good(), "cannot open checkpoint for writing: " + path);
  f.write(kMagic, 8);
  std::uint64_t hlen = h.size();
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, t] : params)
    f.write(reinterpret_cast<const char*>(t.ptr()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  WSEP_CHECK(f.good(), "checkpoint write failed: " + path);
}

ParamMap<float> load_checkpoint(const std::string& path, json* meta_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) throw MissingArtifactError("checkpoint not found: " + path);
  char magic[8];
  f.read(magic, 8);
  WSEP_CHECK(f.good() && std::memcmp(magic, kMagic, 8) == 0,
             "not a checkpoint file: " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 8);
  WSEP_CHECK(f.good() && hlen > 0 && hlen < (1u << 26),
             "corrupt checkpoint header: " + path);
  std::string h(hlen, '\0');
  f.read(h.data(), static_cast<std::streamsize>(hlen));
  WSEP_CHECK(f.good(), "truncated checkpoint header: " + path);
  json header = json::parse(h);
  if (meta_out) *meta_out = header.at("meta");

  ParamMap<float> params;
  for (const auto& e : header.at("tensors")) {
    std::string name = e.at("name").get<std::string>();
    auto shape = e.at("shape").get<std::vector<int>>();
    Tensor<float> t(shape);
    f.read(reinterpret_cast<char*>(t.ptr()),
           static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    WSEP_CHECK(f.good(), "truncated checkpoint data: " + path);
    params[name] = std::move(t);
  }
  // Must be exactly at EOF.
  f.peek();
  WSEP_CHECK(f.eof(), "trailing bytes in checkpoint: " + path);
  return params;
}

}  // namespace wsep::net
