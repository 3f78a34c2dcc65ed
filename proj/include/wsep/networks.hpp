// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Network definitions: BLSTM mask-inference separator, RNN and 2-D CRNN
// frame classifiers, clip pooling, label downsampling, checkpoints.
// Forward passes are graph builders templated on the scalar type so the
// same code runs in float (training) and double (gradient checks).

#ifndef WSEP_NETWORKS_HPP_
#define WSEP_NETWORKS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsep/graph.hpp"
#include "wsep/losses.hpp"
#include "wsep/mel.hpp"
#include "wsep/ops.hpp"
#include "wsep/rng.hpp"
#include "wsep/stft.hpp"

namespace wsep::net {

enum class InputNorm { kNone, kPerFeature };

struct SeparatorSpec {
  int recurrent_layers = 3;
  int hidden = 600;  // per direction
  int n_classes = 0;
  int freq_bins = 257;
  InputNorm input_norm = InputNorm::kNone;

  void validate() const {
    WSEP_CHECK(recurrent_layers >= 1 && hidden >= 1 && n_classes >= 1 &&
                   freq_bins >= 1,
               "separator spec: all dimensions must be >= 1");
  }
};

enum class ClassifierKind { kRnn, kCrnn2d };
enum class FeatureKind { kLinearMagnitude, kMelMagnitude };

struct ConvStage {
  int channels = 16;
  int kernel_f = 3;  // frequency extent
  int kernel_t = 3;  // time extent
  int pool_f = 2;
  int pool_t = 1;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kCrnn2d;
  int n_classes = 0;
  int freq_bins = 257;  // bins of the linear-magnitude input
  FeatureKind input_kind = FeatureKind::kLinearMagnitude;
  int n_mels = 40;          // used for mel input
  bool log_input = false;   // known-unstable; kept as an option
  int rnn_layers = 2;       // rnn kind
  int rnn_hidden = 100;     // per direction
  std::vector<ConvStage> stages = {{16, 3, 3, 2, 1},
                                   {32, 3, 3, 2, 2},
                                   {64, 3, 3, 2, 2}};
  int crnn_hidden = 100;  // BLSTM after the conv stack
  PoolMode clip_pool = PoolMode::kMax;

  int input_bins() const {
    return input_kind == FeatureKind::kMelMagnitude ? n_mels : freq_bins;
  }
  int time_downsample_factor() const {
    if (kind == ClassifierKind::kRnn) return 1;
    int f = 1;
    for (const auto& s : stages) f *= s.pool_t;
    return f;
  }
  void validate() const {
    WSEP_CHECK(n_classes >= 1 && input_bins() >= 1,
               "classifier spec: dimensions must be >= 1");
    if (kind == ClassifierKind::kCrnn2d) {
      WSEP_CHECK(!stages.empty(), "crnn2d: need >= 1 conv stage");
      for (const auto& s : stages)
        WSEP_CHECK(s.channels >= 1 && s.kernel_f >= 1 && s.kernel_t >= 1 &&
                       s.pool_f >= 1 && s.pool_t >= 1,
                   "crnn2d: bad stage geometry");
    }
  }
};

NLOHMANN_JSON_SERIALIZE_ENUM(InputNorm, {{InputNorm::kNone, "none"},
                                         {InputNorm::kPerFeature,
                                          "per_feature"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ClassifierKind, {{ClassifierKind::kRnn, "rnn"},
                                              {ClassifierKind::kCrnn2d,
                                               "crnn2d"}})
NLOHMANN_JSON_SERIALIZE_ENUM(FeatureKind,
                             {{FeatureKind::kLinearMagnitude, "linear"},
                              {FeatureKind::kMelMagnitude, "mel"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PoolMode, {{PoolMode::kMax, "max"},
                                        {PoolMode::kAverage, "average"}})

void to_json(nlohmann::json& j, const SeparatorSpec& s);
void from_json(const nlohmann::json& j, SeparatorSpec& s);
void to_json(nlohmann::json& j, const ConvStage& s);
void from_json(const nlohmann::json& j, ConvStage& s);
void to_json(nlohmann::json& j, const ClassifierSpec& s);
void from_json(const nlohmann::json& j, ClassifierSpec& s);

// ---------------------------------------------------------------------------
// Initialization: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero
// biases, LSTM forget-gate bias 1.

namespace detail {

template <typename T>
Tensor<T> uniform_init(Rng& rng, std::vector<int> shape, int fan_in) {
  Tensor<T> t(std::move(shape));
  const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(-k, k));
  return t;
}

template <typename T>
void init_lstm(ParamMap<T>& p, const std::string& prefix, int in_dim,
               int hidden, Rng& rng) {
  for (const char* dir : {"fw", "bw"}) {
    std::string base = prefix + "." + dir;
    p[base + ".wx"] = uniform_init<T>(rng, {4 * hidden, in_dim}, in_dim);
    p[base + ".wh"] = uniform_init<T>(rng, {4 * hidden, hidden}, hidden);
    Tensor<T> b({4 * hidden});
    for (int i = hidden; i < 2 * hidden; ++i) b.data[i] = T(1);  // forget
    p[base + ".b"] = std::move(b);
  }
}

// One BLSTM layer: forward + reverse pass, concatenated to [2h x T].
template <typename T>
Node<T>* blstm(Graph<T>& g, ParamMap<T>& p, const std::string& prefix,
               Node<T>* x, bool trainable) {
  auto layer = [&](const char* dir, bool rev) {
    std::string base = prefix + "." + dir;
    return ops::lstm(g, x, g.param(p, base + ".wx", trainable),
                     g.param(p, base + ".wh", trainable),
                     g.param(p, base + ".b", trainable), rev);
  };
  return ops::concat_rows(g, layer("fw", false), layer("bw", true));
}

}  // namespace detail

template <typename T>
ParamMap<T> init_separator(const SeparatorSpec& spec, Rng& rng) {
  spec.validate();
  ParamMap<T> p;
  if (spec.input_norm == InputNorm::kPerFeature) {
    Tensor<T> gain({spec.freq_bins});
    gain.fill(T(1));
    p["sep.norm.gain"] = std::move(gain);
    p["sep.norm.bias"] = Tensor<T>({spec.freq_bins});
  }
  int in_dim = spec.freq_bins;
  for (int l = 0; l < spec.recurrent_layers; ++l) {
    detail::init_lstm(p, "sep.l" + std::to_string(l), in_dim, spec.hidden,
                      rng);
    in_dim = 2 * spec.hidden;
  }
  const int out = spec.n_classes * spec.freq_bins;
  p["sep.out.w"] = detail::uniform_init<T>(rng, {out, in_dim}, in_dim);
  p["sep.out.b"] = Tensor<T>({out});
  return p;
}

// Input: log-magnitude features [F x T]. Output: masks [n*F x T] in [0,1].
template <typename T>
Node<T>* separator_forward(Graph<T>& g, Node<T>* x, const SeparatorSpec& spec,
                           ParamMap<T>& params, bool trainable) {
  spec.validate();
  WSEP_CHECK(x->val.rank() == 2 && x->val.dim(0) == spec.freq_bins,
             "separator input must be [F x T] with F = "
                 << spec.freq_bins << ", got " << x->val.shape_str());
  Node<T>* h = x;
  if (spec.input_norm == InputNorm::kPerFeature)
    h = ops::norm_rows(g, h, g.param(params, "sep.norm.gain", trainable),
                       g.param(params, "sep.norm.bias", trainable));
  for (int l = 0; l < spec.recurrent_layers; ++l)
    h = detail::blstm(g, params, "sep.l" + std::to_string(l), h, trainable);
  Node<T>* y = ops::linear(g, g.param(params, "sep.out.w", trainable), h,
                           g.param(params, "sep.out.b", trainable));
  return ops::sigmoid(g, y);
}

template <typename T>
ParamMap<T> init_classifier(const ClassifierSpec& spec, Rng& rng) {
  spec.validate();
  ParamMap<T> p;
  if (spec.kind == ClassifierKind::kRnn) {
    int in_dim = spec.input_bins();
    for (int l = 0; l < spec.rnn_layers; ++l) {
      detail::init_lstm(p, "cls.l" + std::to_string(l), in_dim,
                        spec.rnn_hidden, rng);
      in_dim = 2 * spec.rnn_hidden;
    }
    p["cls.out.w"] = detail::uniform_init<T>(rng, {spec.n_classes, in_dim},
                                             in_dim);
    p["cls.out.b"] = Tensor<T>({spec.n_classes});
    return p;
  }
  int ch = 1, bins = spec.input_bins();
  for (std::size_t s = 0; s < spec.stages.size(); ++s) {
    const auto& st = spec.stages[s];
    std::string base = "cls.s" + std::to_string(s);
    int fan = ch * st.kernel_f * st.kernel_t;
    p[base + ".w"] =
        detail::uniform_init<T>(rng, {st.channels, ch, st.kernel_f,
                                      st.kernel_t},
                                fan);
    p[base + ".b"] = Tensor<T>({st.channels});
    Tensor<T> gain({st.channels});
    gain.fill(T(1));
    p[base + ".gain"] = std::move(gain);
    p[base + ".bias"] = Tensor<T>({st.channels});
    ch = st.channels;
    bins = (bins + st.pool_f - 1) / st.pool_f;
  }
  detail::init_lstm(p, "cls.rnn", ch * bins, spec.crnn_hidden, rng);
  p["cls.out.w"] = detail::uniform_init<T>(
      rng, {spec.n_classes, 2 * spec.crnn_hidden}, 2 * spec.crnn_hidden);
  p["cls.out.b"] = Tensor<T>({spec.n_classes});
  return p;
}

// Input: features [B x T] matching spec.input_bins(). Output: frame
// probabilities [n x T'] with T' = ceil(T / time_downsample_factor).
template <typename T>
Node<T>* classifier_forward(Graph<T>& g, Node<T>* x,
                            const ClassifierSpec& spec, ParamMap<T>& params,
                            bool trainable) {
  spec.validate();
  WSEP_CHECK(x->val.rank() == 2 && x->val.dim(0) == spec.input_bins(),
             "classifier input must be [" << spec.input_bins()
                                          << " x T], got "
                                          << x->val.shape_str());
  if (spec.kind == ClassifierKind::kRnn) {
    Node<T>* h = x;
    for (int l = 0; l < spec.rnn_layers; ++l)
      h = detail::blstm(g, params, "cls.l" + std::to_string(l), h, trainable);
    Node<T>* y = ops::linear(g, g.param(params, "cls.out.w", trainable), h,
                             g.param(params, "cls.out.b", trainable));
    return ops::sigmoid(g, y);
  }

  const int t_in = x->val.dim(1);
  Node<T>* h = ops::reshape(g, x, {1, spec.input_bins(), t_in});
  for (std::size_t s = 0; s < spec.stages.size(); ++s) {
    const auto& st = spec.stages[s];
    std::string base = "cls.s" + std::to_string(s);
    h = ops::conv2d(g, h, g.param(params, base + ".w", trainable),
                    g.param(params, base + ".b", trainable));
    // Per-feature-map statistical normalization before the nonlinearity.
    const int c = h->val.dim(0), fh = h->val.dim(1), fw = h->val.dim(2);
    h = ops::reshape(g, h, {c, fh * fw});
    h = ops::norm_rows(g, h, g.param(params, base + ".gain", trainable),
                       g.param(params, base + ".bias", trainable));
    h = ops::reshape(g, h, {c, fh, fw});
    h = ops::relu(g, h);
    h = ops::maxpool2d(g, h, st.pool_f, st.pool_t);
  }
  const int c = h->val.dim(0), fh = h->val.dim(1), fw = h->val.dim(2);
  h = ops::reshape(g, h, {c * fh, fw});
  h = detail::blstm(g, params, "cls.rnn", h, trainable);
  Node<T>* y = ops::linear(g, g.param(params, "cls.out.w", trainable), h,
                           g.param(params, "cls.out.b", trainable));
  return ops::sigmoid(g, y);
}

// Frame probs [n x T'] -> clip probs [n x 1].
template <typename T>
Node<T>* clip_pool(Graph<T>& g, Node<T>* frame_probs, PoolMode mode) {
  return mode == PoolMode::kMax ? ops::max_over_cols(g, frame_probs)
                                : ops::mean_over_cols(g, frame_probs);
}

// Block-wise max over groups of `factor` frames; last block may be short.
Tensor<double> downsample_labels(const Tensor<double>& frame_labels,
                                 int factor);

// Classifier features from a magnitude spectrogram (kind-checked).
// fb required for mel input; projection is fb.weights * mag.
Tensor<double> make_classifier_features(const Spectrogram& mag,
                                        const ClassifierSpec& spec,
                                        const MelFilterbank* fb);

// ---------------------------------------------------------------------------
// Checkpoints: "WSEPCK1\n" magic, JSON header (meta + tensor table), then
// raw little-endian f32 data. Round trips are bit-exact.

void save_checkpoint(const std::string& path, const ParamMap<float>& params,
                     const nlohmann::json& meta);
ParamMap<float> load_checkpoint(const std::string& path,
                                nlohmann::json* meta_out = nullptr);

}  // namespace wsep::net

#endif  // WSEP_NETWORKS_HPP_
