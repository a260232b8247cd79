#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ctg/baseline.hpp"
#include "ctg/episodes.hpp"
#include "ctg/errors.hpp"
#include "ctg/signal.hpp"

namespace ctg {

enum class SinusoidalStatus { None, Pseudosinusoidal, TrueSinusoidal };

inline const char* to_string(SinusoidalStatus s) {
  switch (s) {
    case SinusoidalStatus::None: return "none";
    case SinusoidalStatus::Pseudosinusoidal: return "pseudosinusoidal";
    case SinusoidalStatus::TrueSinusoidal: return "true_sinusoidal";
  }
  return "?";
}

struct SinusoidalFinding {
  SinusoidalStatus status = SinusoidalStatus::None;
  std::optional<std::pair<double, double>> span;  // start_s, end_s; absent when None
  double amplitude_bpm = 0.0;   // mean half peak-to-trough over cycles
  double frequency_cpm = 0.0;   // upward-crossing cycle rate
  double smoothness = 0.0;      // power in the 3-5 cpm band / total power <= 0.5 Hz
};

struct SinusoidalConfig {
  double amp_lo_bpm = 5.0;
  double amp_hi_bpm = 15.0;
  double freq_lo_cpm = 3.0;
  double freq_hi_cpm = 5.0;
  double min_true_span_s = 600.0;
  double smooth_true = 0.6;
  double smooth_pseudo = 0.35;
  // Minute gate locating candidate spans: a minute belongs to a pattern when
  // its half amplitude, upward-crossing count, and band-power share all pass.
  double gate_amp_lo_bpm = 4.0;
  double gate_amp_hi_bpm = 16.5;
  int gate_crossings_lo = 3;
  int gate_crossings_hi = 5;
  double gate_share = 0.75;
  int min_span_minutes = 3;
  double band_total_hz = 0.5;
};

namespace detail {

/// Fraction of DFT power in [f_lo, f_hi] relative to total power up to
/// f_total, over mean-removed samples [b, e) (valid only).
inline double band_power_share(const CleanSignal& s, std::size_t b, std::size_t e, double f_lo,
                               double f_hi, double f_total) {
  std::vector<double> x;
  x.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    if (s.valid[i]) x.push_back(s.values[i]);
  const std::size_t n = x.size();
  if (n < 8) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const double dur = static_cast<double>(n) / s.sample_rate_hz;
  double inband = 0.0, total = 0.0;
  const int kmax = static_cast<int>(std::floor(f_total * dur));
  for (int k = 1; k <= kmax; ++k) {
    const double f = k / dur;
    double re = 0.0, im = 0.0;
    const double w = 2.0 * M_PI * f / s.sample_rate_hz;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = w * static_cast<double>(i);
      re += (x[i] - mean) * std::cos(a);
      im -= (x[i] - mean) * std::sin(a);
    }
    const double p = re * re + im * im;
    total += p;
    if (f >= f_lo - 1e-12 && f <= f_hi + 1e-12) inband += p;
  }
  return total > 0.0 ? inband / total : 0.0;
}

struct CycleStats {
  double frequency_cpm = 0.0;
  double amplitude_bpm = 0.0;  // mean half peak-to-trough per cycle
};

/// Upward-crossing cycle rate and mean cycle half amplitude over [b, e),
/// crossings referenced to the given level.
inline CycleStats cycle_stats(const CleanSignal& s, std::size_t b, std::size_t e, double level) {
  CycleStats st;
  std::vector<std::size_t> ups;
  bool have_prev = false;
  double prev = 0.0;
  std::size_t count = 0;
  for (std::size_t i = b; i < e; ++i) {
    if (!s.valid[i]) { have_prev = false; continue; }
    ++count;
    const double d = s.values[i] - level;
    if (have_prev && prev < 0.0 && d >= 0.0) ups.push_back(i);
    prev = d;
    have_prev = true;
  }
  if (count == 0) return st;
  const double dur_min = static_cast<double>(e - b) / s.sample_rate_hz / 60.0;
  st.frequency_cpm = dur_min > 0 ? static_cast<double>(ups.size()) / dur_min : 0.0;
  double amp_sum = 0.0;
  std::size_t cycles = 0;
  for (std::size_t c = 0; c + 1 < ups.size(); ++c) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = ups[c]; i < ups[c + 1]; ++i) {
      if (!s.valid[i]) continue;
      lo = std::min(lo, s.values[i]);
      hi = std::max(hi, s.values[i]);
    }
    if (hi > lo) { amp_sum += (hi - lo) / 2.0; ++cycles; }
  }
  if (cycles > 0) st.amplitude_bpm = amp_sum / static_cast<double>(cycles);
  return st;
}

inline double mean_of(const CleanSignal& s, std::size_t b, std::size_t e) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = b; i < e; ++i)
    if (s.valid[i]) { sum += s.values[i]; ++count; }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace detail

/// Locates the longest run of pattern-like minutes (oscillation in the
/// sinusoidal amplitude/frequency band with the power concentrated in
/// 3-5 cpm), then measures amplitude, frequency, and smoothness precisely
/// over that span. TrueSinusoidal needs the span to reach 10 minutes, the
/// smoothness threshold, and no accepted acceleration overlapping the span;
/// in-band spans that are shorter or rougher read as Pseudosinusoidal.
inline SinusoidalFinding detect_sinusoidal(const CleanSignal& fhr, const BaselineEstimate& baseline,
                                           const std::vector<Episode>& accelerations,
                                           const SinusoidalConfig& cfg = {}) {
  if (fhr.duration_s() < kMinAnalysisDurationS) throw TooShortError(fhr.duration_s());
  const std::size_t per_min = static_cast<std::size_t>(std::lround(60.0 * fhr.sample_rate_hz));
  const std::size_t n_minutes = fhr.size() / per_min;

  const auto half_amp_in = [&](std::size_t b, std::size_t e) {
    double lo = 1e300, hi = -1e300;
    std::size_t count = 0;
    for (std::size_t i = b; i < e; ++i) {
      if (!fhr.valid[i]) continue;
      lo = std::min(lo, fhr.values[i]);
      hi = std::max(hi, fhr.values[i]);
      ++count;
    }
    return count >= (e - b) / 2 ? (hi - lo) / 2.0 : -1.0;
  };

  std::vector<bool> pattern(n_minutes, false);
  for (std::size_t m = 0; m < n_minutes; ++m) {
    const std::size_t b = m * per_min, e = b + per_min;
    const double half_amp = half_amp_in(b, e);
    if (half_amp < cfg.gate_amp_lo_bpm || half_amp > cfg.gate_amp_hi_bpm) continue;
    // Every quarter-minute must carry the oscillation; this rejects minutes
    // the pattern only partially covers, so the detected span tracks the
    // pattern's true extent to within a few seconds per edge.
    bool quarters_ok = true;
    for (int q = 0; q < 4; ++q)
      if (half_amp_in(b + q * per_min / 4, b + (q + 1) * per_min / 4) < cfg.gate_amp_lo_bpm)
        quarters_ok = false;
    if (!quarters_ok) continue;
    const auto st = detail::cycle_stats(fhr, b, e, detail::mean_of(fhr, b, e));
    const int crossings = static_cast<int>(std::lround(st.frequency_cpm));
    if (crossings < cfg.gate_crossings_lo || crossings > cfg.gate_crossings_hi) continue;
    const double share = detail::band_power_share(fhr, b, e, cfg.freq_lo_cpm / 60.0,
                                                  cfg.freq_hi_cpm / 60.0, cfg.band_total_hz);
    if (share < cfg.gate_share) continue;
    pattern[m] = true;
  }

  // Longest run of pattern minutes (earliest on ties).
  std::size_t best_b = 0, best_len = 0, run_b = 0, run_len = 0;
  for (std::size_t m = 0; m <= n_minutes; ++m) {
    if (m < n_minutes && pattern[m]) {
      if (run_len == 0) run_b = m;
      ++run_len;
      if (run_len > best_len) { best_len = run_len; best_b = run_b; }
    } else {
      run_len = 0;
    }
  }

  SinusoidalFinding finding;
  if (best_len < static_cast<std::size_t>(cfg.min_span_minutes)) {
    // No candidate span; report whole-signal measures with status None.
    const double ref = baseline.determinable ? *baseline.value_bpm : detail::mean_of(fhr, 0, fhr.size());
    const auto st = detail::cycle_stats(fhr, 0, fhr.size(), ref);
    finding.frequency_cpm = st.frequency_cpm;
    finding.amplitude_bpm = st.amplitude_bpm;
    finding.smoothness = detail::band_power_share(fhr, 0, fhr.size(), cfg.freq_lo_cpm / 60.0,
                                                  cfg.freq_hi_cpm / 60.0, cfg.band_total_hz);
    return finding;
  }

  const std::size_t b = best_b * per_min;
  const std::size_t e = (best_b + best_len) * per_min;
  const double span_start = static_cast<double>(b) / fhr.sample_rate_hz;
  const double span_end = static_cast<double>(e) / fhr.sample_rate_hz;
  const double span_s = span_end - span_start;

  const auto st = detail::cycle_stats(fhr, b, e, detail::mean_of(fhr, b, e));
  finding.frequency_cpm = st.frequency_cpm;
  finding.amplitude_bpm = st.amplitude_bpm;
  finding.smoothness = detail::band_power_share(fhr, b, e, cfg.freq_lo_cpm / 60.0,
                                                cfg.freq_hi_cpm / 60.0, cfg.band_total_hz);

  const bool band_ok = finding.amplitude_bpm >= cfg.amp_lo_bpm &&
                       finding.amplitude_bpm <= cfg.amp_hi_bpm &&
                       finding.frequency_cpm >= cfg.freq_lo_cpm &&
                       finding.frequency_cpm <= cfg.freq_hi_cpm;
  bool accel_overlap = false;
  for (const auto& a : accelerations)
    if (a.kind == EpisodeKind::Acceleration && a.onset_s < span_end && span_start < a.offset_s)
      accel_overlap = true;

  if (band_ok && span_s >= cfg.min_true_span_s && finding.smoothness >= cfg.smooth_true &&
      !accel_overlap) {
    finding.status = SinusoidalStatus::TrueSinusoidal;
    finding.span = {span_start, span_end};
  } else if (band_ok && finding.smoothness >= cfg.smooth_pseudo &&
             (finding.smoothness < cfg.smooth_true || span_s < cfg.min_true_span_s)) {
    finding.status = SinusoidalStatus::Pseudosinusoidal;
    finding.span = {span_start, span_end};
  }
  return finding;
}

}  // namespace ctg
