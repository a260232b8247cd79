#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ctg/baseline.hpp"
#include "ctg/errors.hpp"
#include "ctg/signal.hpp"

namespace ctg {

enum class EpisodeKind { Acceleration, Deceleration, Contraction };

inline const char* to_string(EpisodeKind k) {
  switch (k) {
    case EpisodeKind::Acceleration: return "acceleration";
    case EpisodeKind::Deceleration: return "deceleration";
    case EpisodeKind::Contraction: return "contraction";
  }
  return "?";
}

/// A detected excursion. amplitude is the peak deviation from the reference
/// level (baseline for FHR episodes, tone for contractions), in bpm or UC units.
struct Episode {
  EpisodeKind kind{};
  double onset_s = 0.0;
  double extremum_s = 0.0;
  double offset_s = 0.0;
  double amplitude = 0.0;

  double duration_s() const { return offset_s - onset_s; }
};

struct ExcursionConfig {
  double deadband_bpm = 5.0;     // excursion opens when |fhr - baseline| exceeds this
  double reentry_sustain_s = 5.0;  // re-entry must hold this long to close it
  double min_amplitude_bpm = 15.0; // acceptance thresholds (strict >)
  double min_duration_s = 15.0;
};

/// Accelerations and decelerations against the estimated baseline.
/// An excursion opens when the smoothed FHR leaves baseline +- deadband,
/// closes when it re-enters and stays inside for reentry_sustain_s, and is
/// accepted as an episode iff peak |deviation| > 15 bpm and duration > 15 s.
/// Invalid stretches close any open excursion.
inline std::vector<Episode> detect_excursions(const CleanSignal& fhr,
                                              const BaselineEstimate& baseline,
                                              const ExcursionConfig& cfg = {}) {
  if (!baseline.determinable) throw BaselineIndeterminableError();
  const double base = *baseline.value_bpm;
  const double rate = fhr.sample_rate_hz;
  const std::size_t sustain = static_cast<std::size_t>(std::lround(cfg.reentry_sustain_s * rate));

  std::vector<Episode> episodes;
  bool open = false;
  std::size_t onset = 0, peak = 0;
  double peak_dev = 0.0;
  std::size_t inside_since = 0;  // first index of the current in-band stretch
  bool inside_pending = false;

  auto close_at = [&](std::size_t end_idx) {
    if (!open) return;
    open = false;
    const double amplitude = std::fabs(peak_dev);
    const double duration = static_cast<double>(end_idx - onset) / rate;
    if (amplitude > cfg.min_amplitude_bpm && duration > cfg.min_duration_s) {
      Episode ep;
      ep.kind = peak_dev > 0 ? EpisodeKind::Acceleration : EpisodeKind::Deceleration;
      ep.onset_s = static_cast<double>(onset) / rate;
      ep.extremum_s = static_cast<double>(peak) / rate;
      ep.offset_s = static_cast<double>(end_idx) / rate;
      ep.amplitude = amplitude;
      episodes.push_back(ep);
    }
  };

  for (std::size_t i = 0; i < fhr.size(); ++i) {
    if (!fhr.valid[i]) {
      close_at(inside_pending ? inside_since : i);
      inside_pending = false;
      continue;
    }
    const double dev = fhr.values[i] - base;
    const bool outside = std::fabs(dev) > cfg.deadband_bpm;
    if (!open) {
      if (outside) {
        open = true;
        onset = i;
        peak = i;
        peak_dev = dev;
        inside_pending = false;
      }
      continue;
    }
    if (outside) {
      inside_pending = false;
      if (std::fabs(dev) > std::fabs(peak_dev)) { peak_dev = dev; peak = i; }
    } else {
      if (!inside_pending) { inside_pending = true; inside_since = i; }
      if (i - inside_since + 1 >= sustain) {
        close_at(inside_since);
        inside_pending = false;
      }
    }
  }
  close_at(inside_pending ? inside_since : fhr.size());
  return episodes;
}

struct ContractionConfig {
  double tone_percentile = 0.10;
  double min_rise = 15.0;       // UC units above tone
  double min_duration_s = 45.0;
};

/// Uterine contractions: excursions of the smoothed UC at least min_rise above
/// the resting tone (low percentile of the channel) lasting min_duration_s.
inline std::vector<Episode> detect_contractions(const CleanSignal& uc,
                                                const ContractionConfig& cfg = {}) {
  std::vector<double> valid_values;
  valid_values.reserve(uc.size());
  for (std::size_t i = 0; i < uc.size(); ++i)
    if (uc.valid[i]) valid_values.push_back(uc.values[i]);
  if (valid_values.empty()) return {};

  std::sort(valid_values.begin(), valid_values.end());
  const double pos = cfg.tone_percentile * static_cast<double>(valid_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, valid_values.size() - 1);
  const double tone = valid_values[lo] + (valid_values[hi] - valid_values[lo]) * (pos - lo);
  const double level = tone + cfg.min_rise;
  const double rate = uc.sample_rate_hz;

  std::vector<Episode> out;
  bool open = false;
  std::size_t onset = 0, peak = 0;
  double peak_val = 0.0;
  auto close_at = [&](std::size_t end_idx) {
    if (!open) return;
    open = false;
    const double duration = static_cast<double>(end_idx - onset) / rate;
    if (duration >= cfg.min_duration_s) {
      Episode ep;
      ep.kind = EpisodeKind::Contraction;
      ep.onset_s = static_cast<double>(onset) / rate;
      ep.extremum_s = static_cast<double>(peak) / rate;
      ep.offset_s = static_cast<double>(end_idx) / rate;
      ep.amplitude = peak_val - tone;
      out.push_back(ep);
    }
  };
  for (std::size_t i = 0; i < uc.size(); ++i) {
    const bool above = uc.valid[i] && uc.values[i] >= level;
    if (above) {
      if (!open) { open = true; onset = i; peak = i; peak_val = uc.values[i]; }
      else if (uc.values[i] > peak_val) { peak_val = uc.values[i]; peak = i; }
    } else {
      close_at(i);
    }
  }
  close_at(uc.size());
  return out;
}

enum class DecelType { Early, Variable, Late, Prolonged, AtypicalVariable };

inline const char* to_string(DecelType t) {
  switch (t) {
    case DecelType::Early: return "early";
    case DecelType::Variable: return "variable";
    case DecelType::Late: return "late";
    case DecelType::Prolonged: return "prolonged";
    case DecelType::AtypicalVariable: return "atypical_variable";
  }
  return "?";
}

enum class AtypicalFeature {
  LossOfShoulder,
  SlowReturn,
  ProlongedElevatedBaseline,
  Biphasic,
  LossOfOscillation,
  LowerBaselineResumption,
};

inline const char* to_string(AtypicalFeature f) {
  switch (f) {
    case AtypicalFeature::LossOfShoulder: return "loss_of_shoulder";
    case AtypicalFeature::SlowReturn: return "slow_return";
    case AtypicalFeature::ProlongedElevatedBaseline: return "prolonged_elevated_baseline";
    case AtypicalFeature::Biphasic: return "biphasic";
    case AtypicalFeature::LossOfOscillation: return "loss_of_oscillation";
    case AtypicalFeature::LowerBaselineResumption: return "lower_baseline_resumption";
  }
  return "?";
}

struct AtypicalConfig {
  double shoulder_rise_bpm = 5.0;       // rise above baseline counting as a shoulder
  double shoulder_window_s = 20.0;      // looked for this long before onset / after offset
  double slow_return_s = 30.0;          // offset more than this after the nadir
  double biphasic_depth_bpm = 15.0;     // both nadirs at least this deep
  double biphasic_recovery_bpm = 10.0;  // partial recovery between them
  double low_osc_bandwidth_bpm = 3.0;   // within-episode residual bandwidth below this
  double low_osc_detrend_s = 10.0;      // moving-average window for the residual
  double post_window_s = 60.0;          // window for the post-episode mean
  double lower_resumption_drop_bpm = 5.0;
  double elevated_rise_bpm = 10.0;
  double elevated_run_s = 60.0;
  double elevated_scan_s = 180.0;
};

/// Evaluates the six atypical-variable criteria on an abrupt deceleration and
/// returns the satisfied subset (sorted by enum order).
inline std::vector<AtypicalFeature> atypical_features(const Episode& d, const CleanSignal& fhr,
                                                      const BaselineEstimate& baseline,
                                                      const AtypicalConfig& cfg = {}) {
  std::vector<AtypicalFeature> out;
  if (!baseline.determinable) return out;
  const double base = *baseline.value_bpm;
  const double rate = fhr.sample_rate_hz;
  const auto idx = [&](double t) {
    return static_cast<std::ptrdiff_t>(std::lround(t * rate));
  };
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(fhr.size());
  auto clamp_idx = [&](std::ptrdiff_t i) { return std::clamp<std::ptrdiff_t>(i, 0, n); };

  const auto max_in = [&](double t0, double t1) {
    double best = -1e300;
    for (std::ptrdiff_t i = clamp_idx(idx(t0)); i < clamp_idx(idx(t1)); ++i)
      if (fhr.valid[static_cast<std::size_t>(i)]) best = std::max(best, fhr.values[static_cast<std::size_t>(i)]);
    return best;
  };
  const auto mean_in = [&](double t0, double t1) -> std::optional<double> {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::ptrdiff_t i = clamp_idx(idx(t0)); i < clamp_idx(idx(t1)); ++i)
      if (fhr.valid[static_cast<std::size_t>(i)]) { sum += fhr.values[static_cast<std::size_t>(i)]; ++count; }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };

  // Loss of primary or secondary rise: no >= shoulder_rise above baseline in
  // the window before onset or after offset.
  const bool pre = max_in(d.onset_s - cfg.shoulder_window_s, d.onset_s) >= base + cfg.shoulder_rise_bpm;
  const bool post = max_in(d.offset_s, d.offset_s + cfg.shoulder_window_s) >= base + cfg.shoulder_rise_bpm;
  if (!pre || !post) out.push_back(AtypicalFeature::LossOfShoulder);

  if (d.offset_s - d.extremum_s > cfg.slow_return_s) out.push_back(AtypicalFeature::SlowReturn);

  // Elevated level (>= baseline + elevated_rise) sustained elevated_run_s after the episode.
  {
    const std::ptrdiff_t b = clamp_idx(idx(d.offset_s));
    const std::ptrdiff_t e = clamp_idx(idx(d.offset_s + cfg.elevated_scan_s));
    std::size_t run = 0;
    const std::size_t need = static_cast<std::size_t>(std::lround(cfg.elevated_run_s * rate));
    bool found = false;
    for (std::ptrdiff_t i = b; i < e; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      run = (fhr.valid[u] && fhr.values[u] >= base + cfg.elevated_rise_bpm) ? run + 1 : 0;
      if (run >= need) { found = true; break; }
    }
    if (found) out.push_back(AtypicalFeature::ProlongedElevatedBaseline);
  }

  // Biphasic: two deep local minima separated by a partial recovery.
  {
    const std::ptrdiff_t b = clamp_idx(idx(d.onset_s));
    const std::ptrdiff_t e = clamp_idx(idx(d.offset_s));
    std::vector<std::ptrdiff_t> deep_minima;
    for (std::ptrdiff_t i = b + 1; i + 1 < e; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      if (!fhr.valid[u] || !fhr.valid[u - 1] || !fhr.valid[u + 1]) continue;
      if (fhr.values[u] > base - cfg.biphasic_depth_bpm) continue;
      if (fhr.values[u] <= fhr.values[u - 1] && fhr.values[u] < fhr.values[u + 1])
        deep_minima.push_back(i);
    }
    bool biphasic = false;
    for (std::size_t a = 0; a + 1 < deep_minima.size() && !biphasic; ++a) {
      for (std::size_t c = a + 1; c < deep_minima.size() && !biphasic; ++c) {
        double between = -1e300;
        for (std::ptrdiff_t i = deep_minima[a]; i <= deep_minima[c]; ++i)
          between = std::max(between, fhr.values[static_cast<std::size_t>(i)]);
        const double higher_nadir = std::max(fhr.values[static_cast<std::size_t>(deep_minima[a])],
                                             fhr.values[static_cast<std::size_t>(deep_minima[c])]);
        if (between - higher_nadir >= cfg.biphasic_recovery_bpm) biphasic = true;
      }
    }
    if (biphasic) out.push_back(AtypicalFeature::Biphasic);
  }

  // Loss of oscillation: residual bandwidth after moving-average detrending,
  // measured over the central part of the episode (ramps excluded, plus half
  // the detrend window so the average never touches them).
  {
    const double trim = std::max(5.0, d.extremum_s - d.onset_s) + cfg.low_osc_detrend_s / 2.0;
    const std::ptrdiff_t b = clamp_idx(idx(d.onset_s + trim));
    const std::ptrdiff_t e = clamp_idx(idx(d.offset_s - trim));
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(std::lround(cfg.low_osc_detrend_s * rate / 2));
    if (e - b >= static_cast<std::ptrdiff_t>(std::lround(10.0 * rate))) {
      double lo = 1e300, hi = -1e300;
      bool any = false;
      for (std::ptrdiff_t i = b; i < e; ++i) {
        const std::size_t u = static_cast<std::size_t>(i);
        if (!fhr.valid[u]) continue;
        double sum = 0.0;
        std::size_t count = 0;
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half);
             j <= std::min<std::ptrdiff_t>(n - 1, i + half); ++j) {
          const std::size_t w = static_cast<std::size_t>(j);
          if (fhr.valid[w]) { sum += fhr.values[w]; ++count; }
        }
        if (count == 0) continue;
        const double resid = fhr.values[u] - sum / static_cast<double>(count);
        lo = std::min(lo, resid);
        hi = std::max(hi, resid);
        any = true;
      }
      if (any && hi - lo < cfg.low_osc_bandwidth_bpm)
        out.push_back(AtypicalFeature::LossOfOscillation);
    }
  }

  // Resumption of the baseline rate at a lower level.
  if (const auto post_mean = mean_in(d.offset_s, d.offset_s + cfg.post_window_s);
      post_mean && *post_mean <= base - cfg.lower_resumption_drop_bpm)
    out.push_back(AtypicalFeature::LowerBaselineResumption);

  std::sort(out.begin(), out.end());
  return out;
}

/// One deceleration with its assigned type.
struct TypedDeceleration {
  Episode episode{};
  DecelType decel_type = DecelType::Variable;
  std::vector<AtypicalFeature> atypical = {};
  std::optional<Episode> associated_contraction;
  double onset_to_nadir_s = 0.0;
  bool sub_three_min = false;        // 90 s < duration <= 180 s fallback
  int overlapped_contractions = 0;   // contractions whose span overlaps the episode
};

struct DecelTypingConfig {
  double prolonged_min_s = 180.0;       // strictly longer -> Prolonged
  double abrupt_onset_to_nadir_s = 30.0;  // below -> abrupt (Variable family)
  double early_peak_window_s = 15.0;    // nadir within this of the contraction peak
  double late_onset_lag_s = 20.0;       // onset more than this after contraction onset
  double association_peak_window_s = 60.0;
  double sub3min_floor_s = 90.0;
  AtypicalConfig atypical;
};

namespace detail {

inline bool spans_overlap(const Episode& a, const Episode& b) {
  return a.onset_s < b.offset_s && b.onset_s < a.offset_s;
}

inline std::optional<Episode> associate_contraction(const Episode& d,
                                                    const std::vector<Episode>& contractions,
                                                    double peak_window_s) {
  const Episode* best = nullptr;
  double best_dist = 1e300;
  for (const auto& c : contractions) {
    const double dist = std::fabs(c.extremum_s - d.extremum_s);
    if (spans_overlap(d, c)) {
      if (best == nullptr || dist < best_dist) { best = &c; best_dist = dist; }
    }
  }
  if (best) return *best;
  for (const auto& c : contractions) {
    const double dist = std::fabs(c.extremum_s - d.extremum_s);
    if (dist <= peak_window_s && dist < best_dist) { best = &c; best_dist = dist; }
  }
  return best ? std::optional<Episode>(*best) : std::nullopt;
}

}  // namespace detail

/// Assigns each deceleration exactly one type. Decision order: Prolonged when
/// longer than 3 minutes; abrupt drops become Variable (upgraded to
/// AtypicalVariable when any atypical criterion holds); gradual drops are
/// tested against their associated contraction for Early then Late timing;
/// a gradual drop matching neither falls to sub-3-min Prolonged when longer
/// than sub3min_floor_s, else Late as the fail-safe.
inline std::vector<TypedDeceleration> type_decelerations(const std::vector<Episode>& decels,
                                                         const std::vector<Episode>& contractions,
                                                         const CleanSignal& fhr,
                                                         const BaselineEstimate& baseline,
                                                         const DecelTypingConfig& cfg = {}) {
  std::vector<TypedDeceleration> out;
  out.reserve(decels.size());
  for (const auto& d : decels) {
    TypedDeceleration td;
    td.episode = d;
    td.onset_to_nadir_s = d.extremum_s - d.onset_s;
    td.associated_contraction =
        detail::associate_contraction(d, contractions, cfg.association_peak_window_s);
    for (const auto& c : contractions)
      if (detail::spans_overlap(d, c)) ++td.overlapped_contractions;

    if (d.duration_s() > cfg.prolonged_min_s) {
      td.decel_type = DecelType::Prolonged;
    } else if (td.onset_to_nadir_s < cfg.abrupt_onset_to_nadir_s) {
      td.atypical = atypical_features(d, fhr, baseline, cfg.atypical);
      td.decel_type = td.atypical.empty() ? DecelType::Variable : DecelType::AtypicalVariable;
    } else {
      bool typed = false;
      if (td.associated_contraction) {
        const Episode& c = *td.associated_contraction;
        const bool early = std::fabs(d.extremum_s - c.extremum_s) <= cfg.early_peak_window_s &&
                           d.onset_s >= c.onset_s && d.onset_s <= c.offset_s;
        const bool late = d.onset_s > c.onset_s + cfg.late_onset_lag_s && d.offset_s > c.offset_s;
        if (early) { td.decel_type = DecelType::Early; typed = true; }
        else if (late) { td.decel_type = DecelType::Late; typed = true; }
      }
      if (!typed) {
        if (d.duration_s() > cfg.sub3min_floor_s) {
          td.decel_type = DecelType::Prolonged;
          td.sub_three_min = true;
        } else {
          td.decel_type = DecelType::Late;  // conservative for unmatched gradual drops
        }
      }
    }
    out.push_back(std::move(td));
  }
  return out;
}

}  // namespace ctg
