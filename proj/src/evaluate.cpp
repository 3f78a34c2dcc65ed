// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace wsep::eval {

double si_sdr(const std::vector<double>& est, const std::vector<double>& ref) {
  WSEP_CHECK(est.size() == ref.size() && !ref.empty(),
             "si_sdr: length mismatch or empty signals");
  double dot = 0, ref_sq = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    dot += est[i] * ref[i];
    ref_sq += ref[i] * ref[i];
  }
  WSEP_CHECK(ref_sq > 0, "si_sdr: silent reference");
  const double a = dot / ref_sq;
  const double target_sq = a * a * ref_sq;
  if (target_sq <= 0) return -kSiSdrCapDb;  // estimate orthogonal to target
  double err_sq = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = est[i] - a * ref[i];
    err_sq += e * e;
  }
  if (err_sq <= 0) return kSiSdrCapDb;
  const double db = 10.0 * std::log10(target_sq / err_sq);
  return std::min(db, kSiSdrCapDb);
}

bool is_silent(const std::vector<double>& x) {
  if (x.empty()) return true;
  double sq = 0;
  for (double v : x) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(x.size()));
  return rms < std::pow(10.0, kSilentRmsDbfs / 20.0);
}

double median(std::vector<double> v) {
  WSEP_CHECK(!v.empty(), "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<PrCounts> count_binary(const Tensor<double>& probs,
                                   const Tensor<double>& labels,
                                   double thresh) {
  WSEP_CHECK(probs.same_shape(labels) && probs.rank() == 2,
             "count_binary: need matching [n x T] tensors");
  const int n = probs.dim(0), t = probs.dim(1);
  std::vector<PrCounts> out(n);
  for (int i = 0; i < n; ++i)
    for (int tau = 0; tau < t; ++tau) {
      const bool pred = probs.at(i, tau) >= thresh;
      const bool truth = labels.at(i, tau) > 0.5;
      if (pred && truth) ++out[i].tp;
      else if (pred && !truth) ++out[i].fp;
      else if (!pred && truth) ++out[i].fn;
    }
  return out;
}

std::vector<AudioClip> apply_masks(const Tensor<float>& masks,
                                   const Spectrogram& mixture_complex,
                                   const StftConfig& config, int n) {
  WSEP_CHECK(mixture_complex.kind == SpecKind::kComplex,
             "apply_masks needs the complex mixture STFT");
  const int f = mixture_complex.freq_bins, t = mixture_complex.frames;
  WSEP_CHECK(masks.dim(0) == n * f && masks.dim(1) == t,
             "apply_masks: mask shape does not match the mixture");
  std::vector<AudioClip> out(n);
  Tensor<double> est({f, t});
  for (int i = 0; i < n; ++i) {
    for (int ff = 0; ff < f; ++ff)
      for (int tau = 0; tau < t; ++tau)
        est.at(ff, tau) = static_cast<double>(masks.at(i * f + ff, tau)) *
                          std::abs(mixture_complex.cat(ff, tau));
    out[i] = reconstruct(est, mixture_complex, config);
  }
  return out;
}

ClipScore score_clip(const std::string& clip_id, const AudioClip& mixture,
                     const std::vector<AudioClip>& estimates,
                     const std::vector<AudioClip>& references) {
  WSEP_CHECK(estimates.size() == references.size() && !references.empty(),
             "score_clip: estimate/reference count mismatch");
  ClipScore cs;
  cs.clip_id = clip_id;
  cs.sources.resize(references.size());

  int active = 0;
  for (const auto& r : references)
    if (!is_silent(r.samples)) ++active;
  if (active < 2) return cs;  // nothing to separate; leave unscored
  cs.scored = true;

  for (std::size_t i = 0; i < references.size(); ++i) {
    const auto& ref = references[i].samples;
    if (is_silent(ref)) continue;
    auto& s = cs.sources[i];
    s.scored = true;
    s.input_db = si_sdr(mixture.samples, ref);
    s.output_db = si_sdr(estimates[i].samples, ref);
  }
  return cs;
}

void summarize(SeparationReport& report) {
  const int n = static_cast<int>(report.classes.size());
  report.per_class.assign(n, {});
  report.overall = {};
  std::vector<std::vector<double>> deltas(n);
  std::vector<double> all;

  for (const auto& clip : report.clips) {
    if (!clip.scored) continue;
    for (int i = 0; i < n; ++i) {
      const auto& s = clip.sources[i];
      if (!s.scored) continue;
      auto& c = report.per_class[i];
      ++c.count;
      c.mean_input += s.input_db;
      c.mean_output += s.output_db;
      deltas[i].push_back(s.delta_db());
      all.push_back(s.delta_db());
    }
  }
  for (int i = 0; i < n; ++i) {
    auto& c = report.per_class[i];
    if (c.count == 0) continue;
    c.mean_input /= c.count;
    c.mean_output /= c.count;
    c.mean_delta = 0;
    for (double d : deltas[i]) c.mean_delta += d;
    c.mean_delta /= c.count;
    c.median_delta = median(deltas[i]);
    report.overall.count += c.count;
    report.overall.mean_input += c.mean_input * c.count;
    report.overall.mean_output += c.mean_output * c.count;
  }
  if (report.overall.count > 0) {
    report.overall.mean_input /= report.overall.count;
    report.overall.mean_output /= report.overall.count;
    double md = 0;
    for (double d : all) md += d;
    report.overall.mean_delta = md / static_cast<double>(all.size());
    report.overall.median_delta = median(all);
  }
}

SeparationReport evaluate_separator(const train::Dataset& ds,
                                    const net::SeparatorSpec& spec,
                                    const ParamMap<float>& params) {
  spec.validate();
  const int n = ds.manifest.n();
  WSEP_CHECK(spec.n_classes == n,
             "separator spec class count does not match the dataset");

  SeparationReport report;
  report.classes = ds.manifest.classes;
  const std::string base = ds.dir.empty() ? std::string() : ds.dir + "/";
  ParamMap<float> p = params;  // graph registration is non-const

  for (const auto& rec : ds.manifest.records) {
    if (static_cast<int>(rec.reference_paths.size()) != n)
      throw MissingArtifactError("clip " + rec.clip_id +
                                 " has no stored references");
    AudioClip mix = read_wav(base + rec.mixture_path);
    Spectrogram cs = stft(mix, ds.manifest.stft);
    Spectrogram mag = magnitude(cs);
    Tensor<double> lm = mag.values;
    for (auto& v : lm.data) v = std::log(v + 1e-8);

    Graph<float> g;
    Node<float>* x = g.leaf(lm.cast<float>());
    Node<float>* masks = net::separator_forward(g, x, spec, p, false);
    auto est = apply_masks(masks->val, cs, ds.manifest.stft, n);

    std::vector<AudioClip> refs(n);
    for (int i = 0; i < n; ++i)
      refs[i] = read_wav(base + rec.reference_paths[i]);

    ClipScore sc = score_clip(rec.clip_id, mix, est, refs);
    if (!sc.scored) ++report.excluded_clips;
    report.clips.push_back(std::move(sc));
  }
  summarize(report);
  return report;
}

ClassifierReport evaluate_classifier(const train::Dataset& ds,
                                     const net::ClassifierSpec& spec,
                                     const ParamMap<float>& params,
                                     const MelFilterbank* fb) {
  spec.validate();
  const int n = ds.manifest.n();
  WSEP_CHECK(spec.n_classes == n,
             "classifier spec class count does not match the dataset");

  ClassifierReport report;
  report.classes = ds.manifest.classes;
  report.frame_per_class.assign(n, {});
  report.clip_per_class.assign(n, {});
  ParamMap<float> p = params;
  const int factor = spec.time_downsample_factor();

  for (const auto& rec : ds.manifest.records) {
    train::ClipData d = train::load_clip(ds, rec, false);
    Spectrogram mag;
    mag.kind = SpecKind::kMagnitude;
    mag.freq_bins = d.xmag.dim(0);
    mag.frames = d.xmag.dim(1);
    mag.values = d.xmag.cast<double>();
    Tensor<double> feats = net::make_classifier_features(mag, spec, fb);

    Graph<float> g;
    Node<float>* probs = net::classifier_forward(g, g.leaf(feats.cast<float>()),
                                                 spec, p, false);
    Tensor<double> pv = probs->val.cast<double>();
    Tensor<double> labels =
        net::downsample_labels(d.frame_labels.cast<double>(), factor);
    auto counts = count_binary(pv, labels);
    for (int i = 0; i < n; ++i) {
      report.frame_per_class[i] += counts[i];
      report.frame_overall += counts[i];
    }

    Node<float>* pooled = net::clip_pool(g, probs, spec.clip_pool);
    Tensor<double> cl({n, 1}), cp({n, 1});
    for (int i = 0; i < n; ++i) {
      cl.data[i] = rec.clip_labels[i];
      cp.data[i] = pooled->val.data[i];
    }
    auto ccounts = count_binary(cp, cl);
    for (int i = 0; i < n; ++i) {
      report.clip_per_class[i] += ccounts[i];
      report.clip_overall += ccounts[i];
    }
  }
  return report;
}

void write_separation_table(std::ostream& os, const SeparationReport& r) {
  os << std::fixed << std::setprecision(2);
  os << "class            n   in(dB)  out(dB)  mean d  median d\n";
  auto row = [&](const std::string& name, const ClassSummary& c) {
    os << std::left << std::setw(14) << name << std::right << std::setw(5)
       << c.count << std::setw(9) << c.mean_input << std::setw(9)
       << c.mean_output << std::setw(8) << c.mean_delta << std::setw(10)
       << c.median_delta << "\n";
  };
  for (std::size_t i = 0; i < r.classes.size(); ++i)
    row(r.classes[i], r.per_class[i]);
  row("overall", r.overall);
  os << "excluded clips: " << r.excluded_clips << "\n";
}

void write_classifier_table(std::ostream& os, const ClassifierReport& r) {
  os << std::fixed << std::setprecision(3);
  os << "class            frame P     R     F    clip P     R     F\n";
  auto row = [&](const std::string& name, const PrCounts& f,
                 const PrCounts& c) {
    os << std::left << std::setw(14) << name << std::right << std::setw(9)
       << f.precision() << std::setw(6) << f.recall() << std::setw(6)
       << f.f1() << std::setw(9) << c.precision() << std::setw(6)
       << c.recall() << std::setw(6) << c.f1() << "\n";
  };
  for (std::size_t i = 0; i < r.classes.size(); ++i)
    row(r.classes[i], r.frame_per_class[i], r.clip_per_class[i]);
  row("overall", r.frame_overall, r.clip_overall);
}

void write_scatter_files(const std::string& prefix,
                         const SeparationReport& r) {
  for (std::size_t i = 0; i < r.classes.size(); ++i) {
    const std::string path = prefix + r.classes[i] + ".tsv";
    std::ofstream f(path, std::ios::trunc);
    WSEP_CHECK(f.good(), "cannot write scatter file: " + path);
    f << "input_db\tdelta_db\n";
    for (const auto& clip : r.clips) {
      if (!clip.scored || !clip.sources[i].scored) continue;
      f << clip.sources[i].input_db << "\t" << clip.sources[i].delta_db()
        << "\n";
    }
  }
}

}  // namespace wsep::eval
