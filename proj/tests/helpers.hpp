#pragma once

// Shared fixtures and scenario samplers for the test suites.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <ctg/rng.hpp>
#include <ctg/signal.hpp>
#include <ctg/synth.hpp>

namespace ctg::test {

inline constexpr double kRate = 4.0;

/// A gap-free record around a constant level.
inline CtgRecord constant_record(double fhr_bpm = 140.0, double uc = 10.0,
                                 double duration_s = 1200.0) {
  CtgRecord rec;
  rec.record_id = "const";
  const std::size_t n = static_cast<std::size_t>(duration_s * kRate);
  rec.fhr.assign(n, fhr_bpm);
  rec.uc.assign(n, uc);
  rec.gap_mask.assign(n, false);
  rec.sample_rate_hz = kRate;
  return rec;
}

/// Wraps raw FHR samples as an all-valid CleanSignal (no preprocessing).
inline CleanSignal clean(std::vector<double> values, double rate = kRate) {
  CleanSignal s;
  s.valid.assign(values.size(), true);
  s.values = std::move(values);
  s.sample_rate_hz = rate;
  return s;
}

inline std::vector<double> constant_samples(double level, double duration_s) {
  return std::vector<double>(static_cast<std::size_t>(duration_s * kRate), level);
}

/// A deterministic baseline estimate for detector tests.
inline BaselineEstimate fixed_baseline(double bpm) {
  BaselineEstimate est;
  est.value_bpm = bpm;
  est.determinable = true;
  est.coverage_s = 1200.0;
  est.iterations = 1;
  return est;
}

/// Adds a trapezoidal excursion in place: ramps of ramp_s at both ends.
inline void add_trapezoid(std::vector<double>& v, double onset_s, double duration_s,
                          double amplitude, double ramp_s = 5.0, double rate = kRate) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = i / rate - onset_s;
    if (u <= 0 || u >= duration_s) continue;
    double shape = 1.0;
    if (u < ramp_s) shape = u / ramp_s;
    else if (u > duration_s - ramp_s) shape = (duration_s - u) / ramp_s;
    v[i] += amplitude * shape;
  }
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ctg_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

// ---- Scenario samplers -----------------------------------------------------
//
// Scenarios are drawn so the ground truth is robustly recoverable: parameters
// keep clear margins from every rule boundary (detected onsets/amplitudes
// wobble a few seconds / bpm around the scheduled values), and features that
// would interact destructively are not combined in one trace. Episode
// amplitudes are >= 20 bpm and durations >= 20 s throughout.

namespace sampler_detail {

struct Draw {
  SplitMix64 rng;
  explicit Draw(std::uint64_t seed) : rng(seed * 0x9E3779B97F4A7C15ULL + 1) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng.next_unit(); }
  int pick(std::initializer_list<int> weights) {
    int total = 0;
    for (int w : weights) total += w;
    int r = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(total)));
    int i = 0;
    for (int w : weights) {
      if (r < w) return i;
      r -= w;
      ++i;
    }
    return i - 1;
  }
};

inline double baseline_draw(Draw& d) {
  switch (d.pick({6, 1, 1, 1, 1})) {
    case 0: return d.uniform(113, 157);
    case 1: return d.uniform(102, 107);   // suspicious low
    case 2: return d.uniform(163, 178);   // suspicious high
    case 3: return d.uniform(85, 97);     // pathological low
    default: return d.uniform(183, 200);  // pathological high
  }
}

inline ContractionSpec wide_contraction(Draw& d, double peak_s) {
  ContractionSpec c;
  c.peak_s = peak_s;
  c.width_s = d.uniform(140, 160);
  c.amplitude = d.uniform(60, 70);
  return c;
}

inline DecelSpec variable_decel(Draw& d, double onset_s) {
  DecelSpec dec;
  dec.shape = EpisodeShape::Trapezoid;
  dec.onset_s = onset_s;
  dec.onset_to_nadir_s = d.uniform(12, 18);
  dec.duration_s = 2 * dec.onset_to_nadir_s + d.uniform(0, 4);
  dec.amplitude_bpm = d.uniform(26, 32);
  return dec;
}

inline DecelSpec prolonged_decel(Draw& d, double onset_s) {
  DecelSpec dec;
  dec.shape = EpisodeShape::Trapezoid;
  dec.onset_s = onset_s;
  dec.onset_to_nadir_s = d.uniform(15, 22);
  dec.duration_s = d.uniform(210, 250);
  dec.amplitude_bpm = d.uniform(26, 32);
  return dec;
}

/// Gradual dip whose nadir sits on the contraction peak.
inline DecelSpec early_decel(Draw& d, const ContractionSpec& c) {
  DecelSpec dec;
  dec.shape = EpisodeShape::RaisedCosine;
  dec.onset_to_nadir_s = d.uniform(45, 48);
  dec.duration_s = dec.onset_to_nadir_s + d.uniform(45, 60);
  dec.amplitude_bpm = d.uniform(26, 32);
  dec.onset_s = c.peak_s + d.uniform(-3, 3) - dec.onset_to_nadir_s;
  return dec;
}

/// Gradual dip starting well after the detectable contraction onset and
/// recovering well after its end.
inline DecelSpec late_decel(Draw& d, const ContractionSpec& c) {
  const double span = synth_detail::contraction_detectable_span(c.amplitude, c.width_s);
  DecelSpec dec;
  dec.shape = EpisodeShape::RaisedCosine;
  dec.onset_to_nadir_s = d.uniform(50, 60);
  dec.duration_s = dec.onset_to_nadir_s + d.uniform(60, 80);
  dec.amplitude_bpm = d.uniform(26, 32);
  dec.onset_s = (c.peak_s - span / 2.0) + d.uniform(32, 40);
  return dec;
}

}  // namespace sampler_detail

struct SamplerOptions {
  bool allow_abnormal_variability = true;
  bool allow_sinusoidal = true;
  double noise_bpm = 0.0;
};

/// One random scenario per seed, spread over five shapes: quiet/acceleration
/// traces, abrupt/prolonged decelerations, contraction-coupled (early/late)
/// decelerations, abnormal variability, sinusoidal segments.
inline Scenario sample_scenario(std::uint64_t seed, const SamplerOptions& opt = {}) {
  using namespace sampler_detail;
  Draw d(seed);
  Scenario s;
  s.record_id = "scn" + std::to_string(seed);
  s.seed = seed;
  s.noise_bpm = opt.noise_bpm;
  s.baseline_bpm = baseline_draw(d);
  s.variability = {d.uniform(8.0, 12.0), d.uniform(3.8, 4.6)};

  int kind = d.pick({3, 3, 2, 2, 2});
  if (!opt.allow_abnormal_variability && kind == 3) kind = 0;
  if (!opt.allow_sinusoidal && kind == 4) kind = 1;

  switch (kind) {
    case 0: {  // accelerations and plain contractions
      const int n_accels = d.pick({1, 2, 4, 3});
      double t = d.uniform(80, 140);
      for (int i = 0; i < n_accels; ++i) {
        AccelSpec a;
        a.onset_s = t;
        a.duration_s = d.uniform(30, 50);
        a.amplitude_bpm = d.uniform(25, 32);
        a.shape = d.pick({2, 1}) == 1 ? EpisodeShape::RaisedCosine : EpisodeShape::Trapezoid;
        s.accelerations.push_back(a);
        t += d.uniform(230, 280);
      }
      // Contractions offset half a slot, so every acceleration peak stays
      // at least 75 s from every contraction peak (no accidental locking).
      if (d.pick({1, 1}) == 1) {
        double ct = d.uniform(200, 230) + (n_accels ? s.accelerations[0].onset_s : 0.0);
        while (ct + 120 < s.duration_s) {
          ContractionSpec c;
          c.peak_s = ct;
          c.width_s = d.uniform(70, 90);
          c.amplitude = d.uniform(45, 65);
          bool near_accel = false;
          for (const auto& a : s.accelerations)
            if (std::fabs(a.onset_s + a.duration_s / 2.0 - ct) < 75.0) near_accel = true;
          if (!near_accel) s.contractions.push_back(c);
          ct += d.uniform(240, 300);
        }
      }
      break;
    }
    case 1: {  // abrupt / prolonged decelerations, plus optional accelerations
      double t = d.uniform(90, 130);
      const int n_decels = 1 + d.pick({2, 1});
      for (int i = 0; i < n_decels; ++i) {
        DecelSpec dec = d.pick({3, 1}) == 1 ? prolonged_decel(d, t) : variable_decel(d, t);
        if (dec.onset_s + dec.duration_s + 95 < s.duration_s) s.decelerations.push_back(dec);
        t = dec.onset_s + dec.duration_s + d.uniform(160, 220);
      }
      const int n_accels = d.pick({1, 2, 2});
      for (int i = 0; i < n_accels && t + 160 < s.duration_s; ++i) {
        AccelSpec a;
        a.onset_s = t;
        a.duration_s = d.uniform(30, 50);
        a.amplitude_bpm = d.uniform(25, 32);
        s.accelerations.push_back(a);
        t += d.uniform(200, 240);
      }
      break;
    }
    case 2: {  // early / late decelerations on dedicated wide contractions
      const int n = 1 + d.pick({2, 1});
      double peak = d.uniform(260, 320);
      for (int i = 0; i < n && peak + 220 < s.duration_s; ++i) {
        const auto c = wide_contraction(d, peak);
        s.contractions.push_back(c);
        s.decelerations.push_back(d.pick({1, 1}) == 1 ? late_decel(d, c) : early_decel(d, c));
        peak += d.uniform(430, 480);
      }
      break;
    }
    case 3: {  // abnormal variability, episode-free
      // High-amplitude (> 25 bpm) traces are left out: their swings cross the
      // episode thresholds, so the excursion feature has no closed-form truth.
      if (d.pick({3, 2}) == 0) s.variability = {d.uniform(1.0, 3.5), d.uniform(3.8, 4.6)};
      else s.variability = {d.uniform(8.0, 12.0), d.uniform(1.2, 2.2)};
      break;
    }
    default: {  // sinusoidal segment, episode-free
      SinusoidSpec sp;
      sp.amplitude_bpm = d.uniform(8.0, 12.0);
      sp.cpm = d.uniform(3.8, 4.6);
      const bool long_span = d.pick({1, 1}) == 0;
      sp.duration_s = long_span ? d.uniform(740, 900) : d.uniform(260, 460);
      sp.start_s = d.uniform(30.0, s.duration_s - sp.duration_s - 30.0);
      // Long spans stay smooth sine (a long noiseless triangle still scores
      // high band-power concentration, so its label would be ambiguous).
      sp.waveform = long_span ? SinusoidWaveform::Sine
                              : (d.pick({1, 1}) == 1 ? SinusoidWaveform::Triangle
                                                     : SinusoidWaveform::Sine);
      s.sinusoidal = sp;
      break;
    }
  }
  return s;
}

/// Canonical deceleration morphologies at their defining parameters, one
/// deceleration per trace, used by the typing tests.
inline Scenario canonical_decel_scenario(DecelType type, std::uint64_t seed) {
  using namespace sampler_detail;
  Draw d(seed ^ 0xD5C3ULL);
  Scenario s;
  s.record_id = std::string("canon_") + to_string(type) + "_" + std::to_string(seed);
  s.seed = seed;
  s.baseline_bpm = d.uniform(125, 150);
  s.variability = {d.uniform(8.0, 12.0), d.uniform(3.8, 4.6)};
  switch (type) {
    case DecelType::Variable:
      s.decelerations.push_back(variable_decel(d, d.uniform(300, 700)));
      break;
    case DecelType::Prolonged:
      s.decelerations.push_back(prolonged_decel(d, d.uniform(300, 600)));
      break;
    case DecelType::Early: {
      const auto c = wide_contraction(d, d.uniform(400, 700));
      s.contractions.push_back(c);
      s.decelerations.push_back(early_decel(d, c));
      break;
    }
    case DecelType::Late: {
      const auto c = wide_contraction(d, d.uniform(400, 700));
      s.contractions.push_back(c);
      s.decelerations.push_back(late_decel(d, c));
      break;
    }
    case DecelType::AtypicalVariable: {
      auto dec = variable_decel(d, d.uniform(300, 700));
      dec.shoulders = false;
      s.decelerations.push_back(dec);
      break;
    }
  }
  return s;
}

}  // namespace ctg::test
