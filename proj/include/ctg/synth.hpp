#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctg/classify.hpp"
#include "ctg/episodes.hpp"
#include "ctg/errors.hpp"
#include "ctg/rng.hpp"
#include "ctg/signal.hpp"
#include "ctg/sinusoidal.hpp"

namespace ctg {

enum class EpisodeShape { Trapezoid, RaisedCosine };

inline const char* to_string(EpisodeShape s) {
  return s == EpisodeShape::Trapezoid ? "trapezoid" : "raised_cosine";
}

struct AccelSpec {
  double onset_s = 0.0;
  double duration_s = 30.0;
  double amplitude_bpm = 25.0;
  EpisodeShape shape = EpisodeShape::Trapezoid;
};

struct DecelSpec {
  double onset_s = 0.0;
  double duration_s = 40.0;
  double amplitude_bpm = 25.0;
  double onset_to_nadir_s = 10.0;  // < 30 reads abrupt, >= 30 gradual
  EpisodeShape shape = EpisodeShape::Trapezoid;
  std::optional<double> lag_to_contraction_s;  // snaps onset to contraction onset + lag
  bool shoulders = true;  // pre/post FHR rises on abrupt drops; false exercises LossOfShoulder
};

struct ContractionSpec {
  double peak_s = 0.0;
  double width_s = 80.0;
  double amplitude = 60.0;  // UC units above tone
};

enum class SinusoidWaveform { Sine, Triangle };

inline const char* to_string(SinusoidWaveform w) {
  return w == SinusoidWaveform::Sine ? "sine" : "triangle";
}

struct SinusoidSpec {
  double amplitude_bpm = 10.0;  // peak deviation
  double cpm = 4.0;
  double start_s = 0.0;
  double duration_s = 720.0;
  SinusoidWaveform waveform = SinusoidWaveform::Sine;
};

struct VariabilitySpec {
  double amplitude_bpm = 10.0;   // per-minute bandwidth (max - min)
  double cycles_per_min = 4.0;
};

struct Scenario {
  std::string record_id = "synth";
  double duration_s = 1200.0;
  double sample_rate_hz = 4.0;
  double baseline_bpm = 140.0;
  VariabilitySpec variability;
  std::vector<AccelSpec> accelerations;
  std::vector<DecelSpec> decelerations;
  std::vector<ContractionSpec> contractions;
  std::optional<SinusoidSpec> sinusoidal;
  double noise_bpm = 0.0;
  std::uint64_t seed = 1;
};

/// Feature labels and expected detections derived from the scenario
/// parameters alone, through the same rule tables the classifier applies.
struct GroundTruth {
  FeatureClass baseline_class{};
  FeatureClass variability_class{};
  FeatureClass accelerations_class{};
  FeatureClass decelerations_class{};
  FeatureClass sinusoidal_class{};
  FeatureClass overall_class{};
  BinaryLabel binary{};
  std::vector<Episode> expected_episodes;
  std::vector<DecelType> expected_decel_types;  // one per scenario deceleration

  FeatureClass feature_class(Feature f) const {
    switch (f) {
      case Feature::Baseline: return baseline_class;
      case Feature::Variability: return variability_class;
      case Feature::Accelerations: return accelerations_class;
      case Feature::Decelerations: return decelerations_class;
      case Feature::Sinusoidal: return sinusoidal_class;
    }
    return baseline_class;
  }
};

namespace synth_detail {

// Fixed-phase five-sine mixture standing in for physiological variability:
// broad enough spectrally that it does not read as a sinusoidal pattern,
// with upward-crossing rate close to the configured cycles_per_min.
inline constexpr double kMixRelFreq[5] = {0.45, 0.70, 1.00, 1.40, 1.90};
inline constexpr double kMixPower[5] = {0.30, 0.25, 0.20, 0.15, 0.10};
inline constexpr double kMixPhase[5] = {0.9501, 2.3311, 4.8432, 1.6015, 3.9716};

inline double mixture(double t, double cpm) {
  double s = 0.0;
  for (int k = 0; k < 5; ++k)
    s += std::sqrt(kMixPower[k]) *
         std::sin(2.0 * M_PI * kMixRelFreq[k] * cpm / 60.0 * t + kMixPhase[k]);
  return s;
}

inline double cos_ramp(double t, double t0, double t1) {  // 0 at t0 -> 1 at t1
  if (t <= t0) return 0.0;
  if (t >= t1) return 1.0;
  return 0.5 * (1.0 - std::cos(M_PI * (t - t0) / (t1 - t0)));
}

inline double trapezoid_shape(double u, double dur, double t_down, double t_up) {
  if (u <= 0.0 || u >= dur) return 0.0;
  if (u < t_down) return u / t_down;
  if (u > dur - t_up) return (dur - u) / t_up;
  return 1.0;
}

inline double raised_cosine_dip(double u, double dur, double t_nadir) {
  if (u <= 0.0 || u >= dur) return 0.0;
  if (u <= t_nadir) return 0.5 * (1.0 - std::cos(M_PI * u / t_nadir));
  return 0.5 * (1.0 + std::cos(M_PI * (u - t_nadir) / (dur - t_nadir)));
}

inline double bump(double t, double center, double width) {  // raised cosine, compact support
  const double x = t - center;
  if (std::fabs(x) >= width / 2.0) return 0.0;
  return 0.5 * (1.0 + std::cos(2.0 * M_PI * x / width));
}

/// Seconds a contraction bump of the given amplitude stays >= 15 units above
/// tone (closed form of the raised-cosine shape).
inline double contraction_detectable_span(double amplitude, double width, double rise = 15.0) {
  if (amplitude < rise) return 0.0;
  const double c = std::clamp(2.0 * rise / amplitude - 1.0, -1.0, 1.0);
  return width * std::acos(c) / M_PI;
}

inline FeatureClass baseline_bucket(double bpm) {
  const long v = std::llround(bpm);
  if (v >= 110 && v <= 160) return FeatureClass::Normal;
  if ((v >= 100 && v <= 109) || (v >= 161 && v <= 180)) return FeatureClass::Suspicious;
  return FeatureClass::Pathological;
}

inline FeatureClass aggregate_classes(const std::vector<FeatureClass>& classes) {
  std::size_t susp = 0, path = 0;
  for (auto c : classes) {
    if (c == FeatureClass::Suspicious) ++susp;
    if (c == FeatureClass::Pathological) ++path;
  }
  if (path >= 1 || susp >= 2) return FeatureClass::Pathological;
  if (susp == 1) return FeatureClass::Suspicious;
  return FeatureClass::Normal;
}

}  // namespace synth_detail

/// Deterministic trace synthesis: FHR = baseline + variability oscillation
/// (suppressed in guard windows around decelerations) + scheduled episode
/// shapes + optional sinusoidal segment + seeded white noise; UC = resting
/// tone + contraction bumps. The ground truth is computed from the scenario
/// parameters, never from the generated samples.
inline std::pair<CtgRecord, GroundTruth> generate(const Scenario& s) {
  if (s.duration_s <= 0 || s.sample_rate_hz <= 0)
    throw OutOfRangeError("duration_s and sample_rate_hz must be positive");

  // Resolve lag-scheduled decelerations against contraction onsets.
  std::vector<DecelSpec> decels = s.decelerations;
  for (auto& d : decels) {
    if (!d.lag_to_contraction_s || s.contractions.empty()) continue;
    double best = 1e300;
    double onset = d.onset_s;
    for (const auto& c : s.contractions) {
      const double candidate = (c.peak_s - c.width_s / 2.0) + *d.lag_to_contraction_s;
      if (std::fabs(candidate - d.onset_s) < best) { best = std::fabs(candidate - d.onset_s); onset = candidate; }
    }
    d.onset_s = onset;
  }

  const auto check_span = [&](double onset, double dur, const char* what) {
    if (onset < 0 || dur <= 0 || onset + dur > s.duration_s)
      throw OutOfRangeError(std::string(what) + " outside trace span");
  };
  const auto check_overlap = [](std::vector<std::pair<double, double>> spans, const char* what) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
      if (spans[i].first < spans[i - 1].second)
        throw OverlapError(what);
  };
  std::vector<std::pair<double, double>> aspans, dspans, cspans;
  for (const auto& a : s.accelerations) {
    check_span(a.onset_s, a.duration_s, "acceleration");
    aspans.emplace_back(a.onset_s, a.onset_s + a.duration_s);
  }
  for (const auto& d : decels) {
    check_span(d.onset_s, d.duration_s, "deceleration");
    if (d.onset_to_nadir_s <= 0 || d.onset_to_nadir_s >= d.duration_s)
      throw OutOfRangeError("onset_to_nadir_s must lie inside the deceleration");
    dspans.emplace_back(d.onset_s, d.onset_s + d.duration_s);
  }
  for (const auto& c : s.contractions) {
    check_span(c.peak_s - c.width_s / 2.0, c.width_s, "contraction");
    cspans.emplace_back(c.peak_s - c.width_s / 2.0, c.peak_s + c.width_s / 2.0);
  }
  if (s.sinusoidal) check_span(s.sinusoidal->start_s, s.sinusoidal->duration_s, "sinusoidal segment");
  check_overlap(aspans, "accelerations");
  check_overlap(dspans, "decelerations");
  check_overlap(cspans, "contractions");

  double max_up = s.variability.amplitude_bpm / 2.0, max_down = max_up;
  for (const auto& a : s.accelerations) max_up = std::max(max_up, a.amplitude_bpm + 8.0);
  for (const auto& d : decels) max_down = std::max(max_down, d.amplitude_bpm);
  if (s.sinusoidal) {
    max_up = std::max(max_up, s.sinusoidal->amplitude_bpm);
    max_down = std::max(max_down, s.sinusoidal->amplitude_bpm);
  }
  const double guard = 4.0 * s.noise_bpm;
  if (s.baseline_bpm + max_up + guard > kFhrMaxBpm || s.baseline_bpm - max_down - guard < kFhrMinBpm)
    throw OutOfRangeError("scenario drives FHR outside " + std::to_string(kFhrMinBpm) + "-" +
                          std::to_string(kFhrMaxBpm) + " bpm");

  const std::size_t n = static_cast<std::size_t>(std::llround(s.duration_s * s.sample_rate_hz));
  const double rate = s.sample_rate_hz;

  // Self-calibrate the mixture so its median per-minute bandwidth equals
  // amplitude_bpm.
  double osc_scale = 0.0;
  if (s.variability.amplitude_bpm > 0) {
    const std::size_t per_min = static_cast<std::size_t>(std::llround(60.0 * rate));
    std::vector<double> ranges;
    for (std::size_t b = 0; b + per_min <= n; b += per_min) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = b; i < b + per_min; ++i) {
        const double w = synth_detail::mixture(i / rate, s.variability.cycles_per_min);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      }
      ranges.push_back(hi - lo);
    }
    std::sort(ranges.begin(), ranges.end());
    const double median = ranges.empty() ? 1.0 : ranges[ranges.size() / 2];
    osc_scale = median > 0 ? s.variability.amplitude_bpm / median : 0.0;
  }

  GaussianRng noise(s.seed);
  CtgRecord rec;
  rec.record_id = s.record_id;
  rec.sample_rate_hz = rate;
  rec.fhr.resize(n);
  rec.uc.resize(n);
  rec.gap_mask.assign(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / rate;

    // Variability envelope: off in guard windows around decelerations and
    // inside a sinusoidal segment. Gradual (raised-cosine) decelerations also
    // silence the oscillation across the episode itself so the nadir stays
    // where it was scheduled; abrupt ones keep it, so their interior retains
    // measurable oscillation.
    double env = 1.0;
    for (const auto& d : decels) {
      const double on = d.onset_s, off = d.onset_s + d.duration_s;
      double g = 1.0;
      if (t < on) {
        if (t >= on - 25.0) g = 0.0;
        else if (t >= on - 30.0) g = 1.0 - synth_detail::cos_ramp(t, on - 30.0, on - 25.0);
      } else if (t <= off) {
        if (d.shape == EpisodeShape::RaisedCosine) g = 0.0;
        else if (t <= on + 5.0) g = synth_detail::cos_ramp(t, on, on + 5.0);
        else if (t >= off - 5.0) g = 1.0 - synth_detail::cos_ramp(t, off - 5.0, off);
      } else {
        // quiet only through the post-episode shoulder window
        if (t <= off + 20.0) g = 0.0;
        else if (t <= off + 25.0) g = synth_detail::cos_ramp(t, off + 20.0, off + 25.0);
      }
      env = std::min(env, g);
    }
    if (s.sinusoidal) {
      const double b = s.sinusoidal->start_s, e = b + s.sinusoidal->duration_s;
      double g = 1.0;
      if (t >= b - 5.0 && t < b) g = 1.0 - synth_detail::cos_ramp(t, b - 5.0, b);
      else if (t >= b && t <= e) g = 0.0;
      else if (t > e && t <= e + 5.0) g = synth_detail::cos_ramp(t, e, e + 5.0);
      env = std::min(env, g);
    }

    double v = s.baseline_bpm + env * osc_scale * synth_detail::mixture(t, s.variability.cycles_per_min);

    for (const auto& a : s.accelerations) {
      const double u = t - a.onset_s;
      if (u <= 0 || u >= a.duration_s) continue;
      if (a.shape == EpisodeShape::Trapezoid) {
        const double ramp = std::min(5.0, a.duration_s / 3.0);
        v += a.amplitude_bpm * synth_detail::trapezoid_shape(u, a.duration_s, ramp, ramp);
      } else {
        v += a.amplitude_bpm * 0.5 * (1.0 - std::cos(2.0 * M_PI * u / a.duration_s));
      }
    }
    for (const auto& d : decels) {
      const double u = t - d.onset_s;
      if (u > 0 && u < d.duration_s) {
        if (d.shape == EpisodeShape::Trapezoid) {
          const double t_up = std::min(d.onset_to_nadir_s, d.duration_s - d.onset_to_nadir_s);
          v -= d.amplitude_bpm *
               synth_detail::trapezoid_shape(u, d.duration_s, d.onset_to_nadir_s, t_up);
        } else {
          v -= d.amplitude_bpm * synth_detail::raised_cosine_dip(u, d.duration_s, d.onset_to_nadir_s);
        }
      }
      if (d.shoulders && d.shape == EpisodeShape::Trapezoid) {
        v += 8.0 * synth_detail::bump(t, d.onset_s - 13.0, 10.0);
        v += 8.0 * synth_detail::bump(t, d.onset_s + d.duration_s + 13.0, 10.0);
      }
    }
    if (s.sinusoidal) {
      const double b = s.sinusoidal->start_s, e = b + s.sinusoidal->duration_s;
      if (t >= b && t <= e) {
        const double edge = std::min(synth_detail::cos_ramp(t, b, b + 3.0),
                                     1.0 - synth_detail::cos_ramp(t, e - 3.0, e));
        const double phase = s.sinusoidal->cpm / 60.0 * (t - b);
        double w;
        if (s.sinusoidal->waveform == SinusoidWaveform::Sine) {
          w = std::sin(2.0 * M_PI * phase);
        } else {
          const double p = phase + 0.75 - std::floor(phase + 0.75);
          w = 4.0 * std::fabs(p - 0.5) - 1.0;
        }
        v += s.sinusoidal->amplitude_bpm * edge * w;
      }
    }

    v += noise.next(s.noise_bpm);
    rec.fhr[i] = std::clamp(v, kFhrMinBpm, kFhrMaxBpm);

    double u = 10.0;  // resting tone
    for (const auto& c : s.contractions) u += c.amplitude * synth_detail::bump(t, c.peak_s, c.width_s);
    rec.uc[i] = std::clamp(u, kUcMin, kUcMax);
  }

  // ---- Ground truth from parameters ----
  GroundTruth gt;
  gt.baseline_class = synth_detail::baseline_bucket(s.baseline_bpm);

  {
    const double amp = s.variability.amplitude_bpm;
    const double cpm = s.variability.cycles_per_min;
    if (amp < 5.0) {
      gt.variability_class =
          s.duration_s >= 900.0 ? FeatureClass::Pathological : FeatureClass::Suspicious;
    } else if (amp > 25.0) {
      gt.variability_class =
          s.duration_s >= 600.0 ? FeatureClass::Pathological : FeatureClass::Suspicious;
    } else if (cpm < 3.0 || cpm > 5.0) {
      gt.variability_class = FeatureClass::Suspicious;
    } else {
      gt.variability_class = FeatureClass::Normal;
    }
  }

  // Expected contraction detections (closed-form detectability).
  std::vector<Episode> expected_contractions;
  for (const auto& c : s.contractions) {
    const double span = synth_detail::contraction_detectable_span(c.amplitude, c.width_s);
    if (c.amplitude < 15.0 || span < 45.0) continue;
    Episode ep;
    ep.kind = EpisodeKind::Contraction;
    ep.onset_s = c.peak_s - span / 2.0;
    ep.extremum_s = c.peak_s;
    ep.offset_s = c.peak_s + span / 2.0;
    ep.amplitude = c.amplitude;
    expected_contractions.push_back(ep);
  }

  std::vector<Episode> expected_accels;
  for (const auto& a : s.accelerations) {
    if (a.amplitude_bpm <= 15.0 || a.duration_s <= 15.0) continue;
    Episode ep;
    ep.kind = EpisodeKind::Acceleration;
    ep.onset_s = a.onset_s;
    ep.extremum_s = a.onset_s + a.duration_s / 2.0;
    ep.offset_s = a.onset_s + a.duration_s;
    ep.amplitude = a.amplitude_bpm;
    expected_accels.push_back(ep);
  }

  {
    std::size_t locked = 0;
    for (const auto& a : expected_accels) {
      for (const auto& c : expected_contractions) {
        if (std::fabs(a.extremum_s - c.extremum_s) <= 30.0) { ++locked; break; }
      }
    }
    if (expected_accels.empty()) {
      gt.accelerations_class = FeatureClass::Pathological;
    } else if (expected_accels.size() == 1) {
      gt.accelerations_class = FeatureClass::Suspicious;
    } else if (expected_contractions.size() >= 2 &&
               static_cast<double>(locked) / expected_accels.size() >= 0.8) {
      gt.accelerations_class = FeatureClass::Suspicious;
    } else {
      gt.accelerations_class = FeatureClass::Normal;
    }
  }

  std::vector<Episode> expected_decels;
  {
    bool any_pathological = false;
    for (const auto& d : decels) {
      if (d.amplitude_bpm <= 15.0 || d.duration_s <= 15.0) continue;
      Episode ep;
      ep.kind = EpisodeKind::Deceleration;
      ep.onset_s = d.onset_s;
      ep.extremum_s = d.onset_s + d.onset_to_nadir_s;
      ep.offset_s = d.onset_s + d.duration_s;
      ep.amplitude = d.amplitude_bpm;
      expected_decels.push_back(ep);

      int overlapped = 0;
      const Episode* assoc = nullptr;
      double best = 1e300;
      for (const auto& c : expected_contractions) {
        if (ep.onset_s < c.offset_s && c.onset_s < ep.offset_s) {
          ++overlapped;
          const double dist = std::fabs(c.extremum_s - ep.extremum_s);
          if (assoc == nullptr || dist < best) { assoc = &c; best = dist; }
        }
      }
      if (assoc == nullptr) {
        for (const auto& c : expected_contractions) {
          const double dist = std::fabs(c.extremum_s - ep.extremum_s);
          if (dist <= 60.0 && dist < best) { assoc = &c; best = dist; }
        }
      }

      DecelType type;
      if (d.duration_s > 180.0) {
        type = DecelType::Prolonged;
      } else if (d.onset_to_nadir_s < 30.0) {
        type = d.shoulders ? DecelType::Variable : DecelType::AtypicalVariable;
      } else {
        bool typed = false;
        if (assoc) {
          const bool early = std::fabs(ep.extremum_s - assoc->extremum_s) <= 15.0 &&
                             ep.onset_s >= assoc->onset_s && ep.onset_s <= assoc->offset_s;
          const bool late = ep.onset_s > assoc->onset_s + 20.0 && ep.offset_s > assoc->offset_s;
          if (early) { type = DecelType::Early; typed = true; }
          else if (late) { type = DecelType::Late; typed = true; }
        }
        if (!typed) type = d.duration_s > 90.0 ? DecelType::Prolonged : DecelType::Late;
      }
      gt.expected_decel_types.push_back(type);
      const bool prolonged_path =
          type == DecelType::Prolonged && (d.duration_s > 180.0 || overlapped > 2);
      if (type == DecelType::Late || type == DecelType::AtypicalVariable || prolonged_path)
        any_pathological = true;
    }
    if (expected_decels.empty()) gt.decelerations_class = FeatureClass::Normal;
    else gt.decelerations_class = any_pathological ? FeatureClass::Pathological : FeatureClass::Suspicious;
  }

  if (!s.sinusoidal) {
    gt.sinusoidal_class = FeatureClass::Normal;
  } else {
    const auto& sin_spec = *s.sinusoidal;
    const bool in_band = sin_spec.amplitude_bpm >= 5.0 && sin_spec.amplitude_bpm <= 15.0 &&
                         sin_spec.cpm >= 3.0 && sin_spec.cpm <= 5.0;
    if (in_band && sin_spec.waveform == SinusoidWaveform::Sine && sin_spec.duration_s >= 600.0 &&
        expected_accels.empty()) {
      gt.sinusoidal_class = FeatureClass::Pathological;
    } else if (in_band) {
      gt.sinusoidal_class = FeatureClass::Suspicious;
    } else {
      gt.sinusoidal_class = FeatureClass::Normal;
    }
  }

  gt.overall_class = synth_detail::aggregate_classes(
      {gt.baseline_class, gt.variability_class, gt.accelerations_class, gt.decelerations_class,
       gt.sinusoidal_class});
  gt.binary = gt.overall_class == FeatureClass::Normal ? BinaryLabel::Normal : BinaryLabel::Abnormal;
  gt.expected_episodes = std::move(expected_accels);
  gt.expected_episodes.insert(gt.expected_episodes.end(), expected_decels.begin(), expected_decels.end());
  gt.expected_episodes.insert(gt.expected_episodes.end(), expected_contractions.begin(),
                              expected_contractions.end());
  rec.reference_label = gt.binary;
  return {std::move(rec), std::move(gt)};
}

// ---- Scenario JSON (the `synth` CLI file format) ----

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.record_id = j.value("record_id", s.record_id);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
  s.baseline_bpm = j.value("baseline_bpm", s.baseline_bpm);
  if (j.contains("variability")) {
    s.variability.amplitude_bpm = j["variability"].value("amplitude_bpm", 10.0);
    s.variability.cycles_per_min = j["variability"].value("cycles_per_min", 4.0);
  }
  const auto shape_of = [](const json& e) {
    const std::string sh = e.value("shape", "trapezoid");
    if (sh == "trapezoid") return EpisodeShape::Trapezoid;
    if (sh == "raised_cosine") return EpisodeShape::RaisedCosine;
    throw OutOfRangeError("unknown shape '" + sh + "'");
  };
  for (const auto& e : j.value("accelerations", json::array())) {
    AccelSpec a;
    a.onset_s = e.at("onset_s").get<double>();
    a.duration_s = e.at("duration_s").get<double>();
    a.amplitude_bpm = e.at("amplitude_bpm").get<double>();
    a.shape = shape_of(e);
    s.accelerations.push_back(a);
  }
  for (const auto& e : j.value("decelerations", json::array())) {
    DecelSpec d;
    d.onset_s = e.at("onset_s").get<double>();
    d.duration_s = e.at("duration_s").get<double>();
    d.amplitude_bpm = e.at("amplitude_bpm").get<double>();
    d.onset_to_nadir_s = e.at("onset_to_nadir_s").get<double>();
    d.shape = shape_of(e);
    if (e.contains("lag_to_contraction_s") && !e["lag_to_contraction_s"].is_null())
      d.lag_to_contraction_s = e["lag_to_contraction_s"].get<double>();
    d.shoulders = e.value("shoulders", true);
    s.decelerations.push_back(d);
  }
  for (const auto& e : j.value("contractions", json::array())) {
    ContractionSpec c;
    c.peak_s = e.at("peak_s").get<double>();
    c.width_s = e.at("width_s").get<double>();
    c.amplitude = e.at("amplitude").get<double>();
    s.contractions.push_back(c);
  }
  if (j.contains("sinusoidal") && !j["sinusoidal"].is_null()) {
    const auto& e = j["sinusoidal"];
    SinusoidSpec sp;
    sp.amplitude_bpm = e.at("amplitude_bpm").get<double>();
    sp.cpm = e.at("cpm").get<double>();
    sp.start_s = e.at("start_s").get<double>();
    sp.duration_s = e.at("duration_s").get<double>();
    const std::string w = e.value("waveform", "sine");
    if (w == "sine") sp.waveform = SinusoidWaveform::Sine;
    else if (w == "triangle") sp.waveform = SinusoidWaveform::Triangle;
    else throw OutOfRangeError("unknown waveform '" + w + "'");
    s.sinusoidal = sp;
  }
  s.noise_bpm = j.value("noise_bpm", 0.0);
  s.seed = j.value("seed", std::uint64_t{1});
  return s;
}

inline json scenario_to_json(const Scenario& s) {
  json j{{"record_id", s.record_id},
         {"duration_s", s.duration_s},
         {"sample_rate_hz", s.sample_rate_hz},
         {"baseline_bpm", s.baseline_bpm},
         {"variability", json{{"amplitude_bpm", s.variability.amplitude_bpm},
                              {"cycles_per_min", s.variability.cycles_per_min}}},
         {"noise_bpm", s.noise_bpm},
         {"seed", s.seed}};
  json accels = json::array();
  for (const auto& a : s.accelerations)
    accels.push_back(json{{"onset_s", a.onset_s},
                          {"duration_s", a.duration_s},
                          {"amplitude_bpm", a.amplitude_bpm},
                          {"shape", to_string(a.shape)}});
  j["accelerations"] = std::move(accels);
  json decels = json::array();
  for (const auto& d : s.decelerations) {
    json e{{"onset_s", d.onset_s},
           {"duration_s", d.duration_s},
           {"amplitude_bpm", d.amplitude_bpm},
           {"onset_to_nadir_s", d.onset_to_nadir_s},
           {"shape", to_string(d.shape)},
           {"shoulders", d.shoulders}};
    e["lag_to_contraction_s"] = d.lag_to_contraction_s ? json(*d.lag_to_contraction_s) : json();
    decels.push_back(std::move(e));
  }
  j["decelerations"] = std::move(decels);
  json contractions = json::array();
  for (const auto& c : s.contractions)
    contractions.push_back(
        json{{"peak_s", c.peak_s}, {"width_s", c.width_s}, {"amplitude", c.amplitude}});
  j["contractions"] = std::move(contractions);
  j["sinusoidal"] = s.sinusoidal
                        ? json{{"amplitude_bpm", s.sinusoidal->amplitude_bpm},
                               {"cpm", s.sinusoidal->cpm},
                               {"start_s", s.sinusoidal->start_s},
                               {"duration_s", s.sinusoidal->duration_s},
                               {"waveform", to_string(s.sinusoidal->waveform)}}
                        : json();
  return j;
}

inline json ground_truth_to_json(const GroundTruth& gt) {
  json eps = json::array();
  for (const auto& e : gt.expected_episodes)
    eps.push_back(json{{"kind", to_string(e.kind)},
                       {"onset_s", e.onset_s},
                       {"extremum_s", e.extremum_s},
                       {"offset_s", e.offset_s},
                       {"amplitude", e.amplitude}});
  json types = json::array();
  for (auto t : gt.expected_decel_types) types.push_back(to_string(t));
  return json{{"features",
               json{{"baseline", to_string(gt.baseline_class)},
                    {"variability", to_string(gt.variability_class)},
                    {"accelerations", to_string(gt.accelerations_class)},
                    {"decelerations", to_string(gt.decelerations_class)},
                    {"sinusoidal", to_string(gt.sinusoidal_class)}}},
              {"overall", to_string(gt.overall_class)},
              {"binary", to_string(gt.binary)},
              {"expected_episodes", std::move(eps)},
              {"expected_decel_types", std::move(types)}};
}

}  // namespace ctg
