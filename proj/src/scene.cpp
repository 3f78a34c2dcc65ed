// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#include "wsep/scene.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "wsep/fft.hpp"
#include "wsep/loudness.hpp"

namespace wsep::scene {

namespace {

constexpr int kSr = 16000;

void apply_fade(std::vector<double>& x, int ramp) {
  const int n = static_cast<int>(x.size());
  ramp = std::min(ramp, n / 2);
  for (int i = 0; i < ramp; ++i) {
    double g = 0.5 - 0.5 * std::cos(M_PI * i / ramp);
    x[i] *= g;
    x[n - 1 - i] *= g;
  }
}

AudioClip make_tone(Rng& rng, double seconds) {
  AudioClip c;
  c.sample_rate = kSr;
  c.samples.resize(static_cast<std::size_t>(seconds * kSr));
  // Harmonic complex: f0 anywhere in [150, 800] Hz with 2-5 harmonics, so
  // partials reach up to ~4 kHz and overlap both the chirp's sweep range
  // and the noise bands. Wide intra-class variability is deliberate:
  // class identity should come from harmonic structure and stationarity,
  // not from a fixed band.
  double f0 = rng.uniform(150.0, 800.0);
  int n_harm = 2 + static_cast<int>(rng.uniform(0.0, 4.0));  // 2..5
  if (n_harm > 5) n_harm = 5;
  double amps[5] = {1.0, 0, 0, 0, 0};
  for (int h = 1; h < n_harm; ++h) amps[h] = rng.uniform(0.1, 0.7);
  double phases[5];
  for (double& p : phases) p = rng.uniform(0.0, 2 * M_PI);
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    double t = static_cast<double>(i) / kSr;
    double v = 0.0;
    for (int h = 0; h < n_harm; ++h)
      v += amps[h] * std::sin(2 * M_PI * f0 * (h + 1) * t + phases[h]);
    c.samples[i] = 0.25 * v;
  }
  apply_fade(c.samples, kSr / 100);
  return c;
}

AudioClip make_chirp(Rng& rng, double seconds) {
  AudioClip c;
  c.sample_rate = kSr;
  c.samples.resize(static_cast<std::size_t>(seconds * kSr));
  // Linear sweep with a random start in [0.4, 1.5] kHz and a random extent
  // of [0.4, 2.5] kHz, so sweeps range from slow and almost tonal to fast,
  // anywhere inside 0.4-4.0 kHz. Overlaps both other classes; the cue is
  // the spectral motion, not the band.
  double f_lo = rng.uniform(400.0, 1500.0);
  double f_hi = f_lo + rng.uniform(400.0, 2500.0);
  if (rng.uniform() < 0.5) std::swap(f_lo, f_hi);
  double dur = seconds;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    double t = static_cast<double>(i) / kSr;
    // Phase is the integral of the instantaneous frequency.
    double phase = 2 * M_PI * (f_lo * t + 0.5 * (f_hi - f_lo) * t * t / dur);
    c.samples[i] = 0.5 * std::sin(phase);
  }
  apply_fade(c.samples, kSr / 100);
  return c;
}

AudioClip make_noise_burst(Rng& rng, double seconds) {
  const std::size_t n = static_cast<std::size_t>(seconds * kSr);
  std::size_t nfft = 1;
  while (nfft < n) nfft <<= 1;
  // White noise band-passed to a random band (center 1.0-4.5 kHz,
  // half-width 0.3-1.5 kHz) by frequency-domain masking. Narrow low bursts
  // overlap the chirp range; the cue is the texture, not the band.
  std::vector<std::complex<double>> spec(nfft / 2 + 1);
  const double bin_hz = static_cast<double>(kSr) / nfft;
  const double center = rng.uniform(1000.0, 4500.0);
  const double half_width = rng.uniform(300.0, 1500.0);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double f = k * bin_hz;
    if (f >= center - half_width && f <= center + half_width)
      spec[k] = {rng.normal(), rng.normal()};
    else
      spec[k] = 0.0;
  }
  spec.front() = 0.0;
  spec.back() = 0.0;
  auto x = irfft(spec, nfft);
  AudioClip c;
  c.sample_rate = kSr;
  c.samples.assign(x.begin(), x.begin() + n);
  double peak = 0.0;
  for (double v : c.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : c.samples) v *= 0.5 / peak;
  apply_fade(c.samples, kSr / 100);
  return c;
}

}  // namespace

void EventPool::validate() const {
  WSEP_CHECK(!classes.empty(), "event pool has no classes");
  WSEP_CHECK(events.size() == classes.size(),
             "event pool class/event list mismatch");
  for (std::size_t i = 0; i < events.size(); ++i)
    WSEP_CHECK(!events[i].empty(), "event pool class '" + classes[i] +
                                       "' has no events");
}

EventPool toy_pool(std::uint64_t seed, int variants_per_class) {
  WSEP_CHECK(variants_per_class >= 1, "toy_pool: need >= 1 variant");
  EventPool pool;
  pool.classes = {"tone", "chirp", "noise"};
  pool.events.resize(3);
  Rng rng(seed ^ 0x746f79ULL);
  for (int v = 0; v < variants_per_class; ++v) {
    double dur = rng.uniform(1.5, 4.0);
    pool.events[0].push_back(make_tone(rng, dur));
    dur = rng.uniform(1.5, 4.0);
    pool.events[1].push_back(make_chirp(rng, dur));
    dur = rng.uniform(1.5, 4.0);
    pool.events[2].push_back(make_noise_burst(rng, dur));
  }
  return pool;
}

void SceneSpec::validate() const {
  WSEP_CHECK(lambda > 0.0, "scene spec: lambda must be > 0");
  WSEP_CHECK(clip_duration_s > 0.0, "scene spec: clip duration must be > 0");
  WSEP_CHECK(event_min_s > 0.0 && event_min_s <= event_max_s,
             "scene spec: event duration range out of order");
  WSEP_CHECK(event_max_s <= clip_duration_s,
             "scene spec: events cannot exceed the clip");
  WSEP_CHECK(level_lo_lufs <= level_hi_lufs,
             "scene spec: level range out of order");
}

int sample_event_count(double lambda, Rng& rng) {
  return rng.poisson_truncated(lambda);
}

Scene sample_scene(const SceneSpec& spec, const EventPool& pool, Rng& rng) {
  spec.validate();
  pool.validate();
  const int n = pool.n();
  const std::size_t clip_len =
      static_cast<std::size_t>(spec.clip_duration_s * kSr);

  Scene out;
  out.references.resize(n);
  for (auto& r : out.references) {
    r.sample_rate = kSr;
    r.samples.assign(clip_len, 0.0);
  }

  const int k = sample_event_count(spec.lambda, rng);
  for (int e = 0; e < k; ++e) {
    SceneEvent ev;
    ev.class_index = static_cast<int>(rng.uniform_index(n));
    const auto& cls = pool.events[ev.class_index];
    ev.source_event_id = static_cast<int>(rng.uniform_index(cls.size()));
    const AudioClip& src = cls[ev.source_event_id];

    double want = rng.uniform(spec.event_min_s, spec.event_max_s);
    ev.duration_s = std::min(want, src.duration_s());
    const std::size_t dur = static_cast<std::size_t>(ev.duration_s * kSr);
    // Uniformly positioned excerpt of the source event.
    std::size_t src_off = 0;
    if (src.samples.size() > dur)
      src_off = rng.uniform_index(src.samples.size() - dur + 1);

    ev.start_s = rng.uniform(0.0, spec.clip_duration_s - ev.duration_s);
    ev.target_lufs = rng.uniform(spec.level_lo_lufs, spec.level_hi_lufs);

    AudioClip excerpt;
    excerpt.sample_rate = kSr;
    excerpt.samples.assign(src.samples.begin() + src_off,
                           src.samples.begin() + src_off + dur);
    excerpt = normalize_loudness(excerpt, ev.target_lufs);

    const std::size_t start = static_cast<std::size_t>(ev.start_s * kSr);
    auto& ref = out.references[ev.class_index].samples;
    for (std::size_t i = 0; i < dur && start + i < clip_len; ++i)
      ref[start + i] += excerpt.samples[i];
    out.events.push_back(ev);
  }

  out.mixture.sample_rate = kSr;
  out.mixture.samples.assign(clip_len, 0.0);
  for (const auto& r : out.references)
    for (std::size_t i = 0; i < clip_len; ++i)
      out.mixture.samples[i] += r.samples[i];

  // Peak-normalize the whole scene on overflow so the mixture stays the
  // exact sample-wise sum of the references.
  double peak = 0.0;
  for (double v : out.mixture.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    const double g = 1.0 / peak;
    for (double& v : out.mixture.samples) v *= g;
    for (auto& r : out.references)
      for (double& v : r.samples) v *= g;
  }
  return out;
}

}  // namespace wsep::scene
