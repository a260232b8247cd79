#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ctg/errors.hpp"
#include "ctg/signal.hpp"

namespace ctg {

struct BaselineConfig {
  double exclusion_band_bpm = 8.0;  // samples beyond this deviation are excluded
  int max_iter = 5;
  double converge_bpm = 0.5;
  double min_coverage_s = kMinAnalysisDurationS;
};

/// Baseline level in bpm. determinable implies coverage_s >= 600 and a value
/// in [30, 250]; when false, value_bpm is empty.
struct BaselineEstimate {
  std::optional<double> value_bpm;
  bool determinable = false;
  double coverage_s = 0.0;
  int iterations = 0;
};

/// Iterative trimmed estimate: seed with the sample median of the smoothed
/// signal, then repeatedly average the samples within the exclusion band of
/// the current estimate until the change falls below converge_bpm. Excursion
/// samples fall outside the band and drop out of the average.
///
/// The seed matters: a regular oscillation spends most of its time near its
/// extremes, so a histogram-mode seed lands on one extreme and the iteration
/// settles on a half-capture fixed point offset ~0.64x the oscillation
/// amplitude from the true level. The median sits in the centered basin.
inline BaselineEstimate estimate_baseline(const CleanSignal& fhr, const BaselineConfig& cfg = {}) {
  if (fhr.duration_s() < kMinAnalysisDurationS) throw TooShortError(fhr.duration_s());

  std::vector<double> valid_values;
  valid_values.reserve(fhr.size());
  for (std::size_t i = 0; i < fhr.size(); ++i)
    if (fhr.valid[i]) valid_values.push_back(fhr.values[i]);
  if (valid_values.empty()) throw AllGapsError();
  std::nth_element(valid_values.begin(), valid_values.begin() + valid_values.size() / 2,
                   valid_values.end());

  BaselineEstimate est;
  double value = valid_values[valid_values.size() / 2];
  std::size_t included = 0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    double sum = 0.0;
    included = 0;
    for (std::size_t i = 0; i < fhr.size(); ++i) {
      if (!fhr.valid[i]) continue;
      if (std::fabs(fhr.values[i] - value) > cfg.exclusion_band_bpm) continue;
      sum += fhr.values[i];
      ++included;
    }
    est.iterations = it + 1;
    if (included == 0) break;
    const double next = sum / static_cast<double>(included);
    const bool converged = std::fabs(next - value) < cfg.converge_bpm;
    value = next;
    if (converged) break;
  }

  est.coverage_s = static_cast<double>(included) / fhr.sample_rate_hz;
  est.determinable = included > 0 && est.coverage_s >= cfg.min_coverage_s;
  if (est.determinable) est.value_bpm = value;
  return est;
}

struct MinuteVariability {
  double amplitude_bpm = 0.0;      // bandwidth (max - min) of the minute
  int oscillations_per_min = 0;    // upward crossings of the minute mean
};

/// Per-minute bandwidth/oscillation profile plus run summaries.
/// low/high runs are the longest stretches of consecutive minutes with
/// amplitude < 5 bpm resp. > 25 bpm; normal_fraction is the share of minutes
/// with amplitude in [5, 25].
struct VariabilityProfile {
  std::vector<MinuteVariability> minutes;
  double low_var_longest_run_s = 0.0;
  double high_var_longest_run_s = 0.0;
  double normal_fraction = 0.0;
  double median_oscillations_per_min = 0.0;
};

inline VariabilityProfile variability_profile(const CleanSignal& fhr,
                                              const BaselineEstimate& baseline) {
  (void)baseline;  // crossings use the per-minute mean, which stays meaningful when it drifts
  if (fhr.duration_s() < kMinAnalysisDurationS) throw TooShortError(fhr.duration_s());

  const std::size_t per_min = static_cast<std::size_t>(std::lround(60.0 * fhr.sample_rate_hz));
  const std::size_t n_minutes = fhr.size() / per_min;
  VariabilityProfile prof;
  prof.minutes.reserve(n_minutes);

  for (std::size_t m = 0; m < n_minutes; ++m) {
    const std::size_t b = m * per_min, e = b + per_min;
    double lo = 0.0, hi = 0.0, mean = 0.0;
    std::size_t count = 0;
    for (std::size_t i = b; i < e; ++i) {
      if (!fhr.valid[i]) continue;
      const double v = fhr.values[i];
      if (count == 0) { lo = hi = v; } else { lo = std::min(lo, v); hi = std::max(hi, v); }
      mean += v;
      ++count;
    }
    MinuteVariability mv;
    if (count > 0) {
      mean /= static_cast<double>(count);
      mv.amplitude_bpm = hi - lo;
      bool have_prev = false;
      double prev = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        if (!fhr.valid[i]) { have_prev = false; continue; }
        const double d = fhr.values[i] - mean;
        if (have_prev && prev < 0.0 && d >= 0.0) ++mv.oscillations_per_min;
        prev = d;
        have_prev = true;
      }
    }
    prof.minutes.push_back(mv);
  }

  std::size_t low_run = 0, high_run = 0, low_best = 0, high_best = 0, normal = 0;
  std::vector<int> oscs;
  for (const auto& mv : prof.minutes) {
    low_run = mv.amplitude_bpm < 5.0 ? low_run + 1 : 0;
    high_run = mv.amplitude_bpm > 25.0 ? high_run + 1 : 0;
    low_best = std::max(low_best, low_run);
    high_best = std::max(high_best, high_run);
    if (mv.amplitude_bpm >= 5.0 && mv.amplitude_bpm <= 25.0) ++normal;
    oscs.push_back(mv.oscillations_per_min);
  }
  prof.low_var_longest_run_s = 60.0 * static_cast<double>(low_best);
  prof.high_var_longest_run_s = 60.0 * static_cast<double>(high_best);
  prof.normal_fraction =
      prof.minutes.empty() ? 0.0 : static_cast<double>(normal) / static_cast<double>(prof.minutes.size());
  if (!oscs.empty()) {
    std::sort(oscs.begin(), oscs.end());
    const std::size_t h = oscs.size() / 2;
    prof.median_oscillations_per_min =
        oscs.size() % 2 == 1 ? oscs[h] : 0.5 * (oscs[h - 1] + oscs[h]);
  }
  return prof;
}

}  // namespace ctg
