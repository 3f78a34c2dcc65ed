// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation: scale-invariant SDR for separation quality, precision/
// recall/F-measure for tagging, and report assembly over a dataset.

#ifndef WSEP_EVALUATE_HPP_
#define WSEP_EVALUATE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsep/trainer.hpp"

namespace wsep::eval {

// Improvements beyond this are treated as numerically perfect.
constexpr double kSiSdrCapDb = 80.0;
// References quieter than this RMS level are excluded from scoring.
constexpr double kSilentRmsDbfs = -80.0;

// SI-SDR of an estimate against a reference, in dB, capped at +80.
// The reference must not be silent (callers filter with is_silent).
double si_sdr(const std::vector<double>& est, const std::vector<double>& ref);

bool is_silent(const std::vector<double>& x);

// Median by sorting a copy; throws on empty input.
double median(std::vector<double> v);

struct PrCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;

  // Vacuous sets count as perfect: an empty denominator yields 1.
  double precision() const { return tp + fp == 0 ? 1.0 : double(tp) / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 1.0 : double(tp) / double(tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  PrCounts& operator+=(const PrCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

// Threshold `probs` at `thresh` and count against binary labels.
// Both tensors are [n x T]; row i is tallied into the i-th entry.
std::vector<PrCounts> count_binary(const Tensor<double>& probs,
                                   const Tensor<double>& labels,
                                   double thresh = 0.5);

// ---------------------------------------------------------------------------
// Separation scoring.

struct SourceScore {
  bool scored = false;  // false: silent reference, or clip excluded
  double input_db = 0;
  double output_db = 0;

  double delta_db() const { return output_db - input_db; }
};

struct ClipScore {
  std::string clip_id;
  bool scored = false;  // false when fewer than two sources are active
  std::vector<SourceScore> sources;
};

struct ClassSummary {
  int count = 0;
  double mean_input = 0;
  double mean_output = 0;
  double mean_delta = 0;
  double median_delta = 0;
};

struct SeparationReport {
  std::vector<std::string> classes;
  std::vector<ClipScore> clips;
  std::vector<ClassSummary> per_class;
  ClassSummary overall;
  int excluded_clips = 0;
};

// Mask tensor [n*F x T] + mixture STFT -> time-domain source estimates
// (mixture phase, inverse transform).
std::vector<AudioClip> apply_masks(const Tensor<float>& masks,
                                   const Spectrogram& mixture_complex,
                                   const StftConfig& config, int n);

// Scores one clip. A source is scored only when its reference is not
// silent; the whole clip is skipped unless at least two sources are
// active.
ClipScore score_clip(const std::string& clip_id, const AudioClip& mixture,
                     const std::vector<AudioClip>& estimates,
                     const std::vector<AudioClip>& references);

// Fills per_class and overall from the clip scores.
void summarize(SeparationReport& report);

// Runs the separator over every clip in the dataset (references required)
// and scores it. Params may contain extra (classifier) entries; only the
// separator keys are read.
SeparationReport evaluate_separator(const train::Dataset& ds,
                                    const net::SeparatorSpec& spec,
                                    const ParamMap<float>& params);

// ---------------------------------------------------------------------------
// Tagging scoring.

struct ClassifierReport {
  std::vector<std::string> classes;
  std::vector<PrCounts> frame_per_class;  // at the classifier's resolution
  std::vector<PrCounts> clip_per_class;
  PrCounts frame_overall;  // micro-averaged
  PrCounts clip_overall;
};

ClassifierReport evaluate_classifier(const train::Dataset& ds,
                                     const net::ClassifierSpec& spec,
                                     const ParamMap<float>& params,
                                     const MelFilterbank* fb);

// ---------------------------------------------------------------------------
// Text tables and scatter data.

void write_separation_table(std::ostream& os, const SeparationReport& r);
void write_classifier_table(std::ostream& os, const ClassifierReport& r);

// One TSV per class at <prefix><class>.tsv with "input_db\tdelta_db"
// rows, one per scored (clip, source) pair.
void write_scatter_files(const std::string& prefix,
                         const SeparationReport& r);

}  // namespace wsep::eval

#endif  // WSEP_EVALUATE_HPP_
