#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctg/errors.hpp"

namespace ctg {

inline constexpr double kFhrMinBpm = 30.0;
inline constexpr double kFhrMaxBpm = 250.0;
inline constexpr double kUcMin = 0.0;
inline constexpr double kUcMax = 100.0;
inline constexpr double kMinAnalysisDurationS = 600.0;

enum class BinaryLabel { Normal, Abnormal };

inline const char* to_string(BinaryLabel b) { return b == BinaryLabel::Normal ? "normal" : "abnormal"; }

/// One CTG trace: paired FHR/UC sample series at a fixed rate.
/// gap_mask[i] == true marks sample i as missing or invalid in either channel.
/// Non-gap FHR samples lie in [30, 250] bpm; non-gap UC samples in [0, 100].
struct CtgRecord {
  std::string record_id;
  std::vector<double> fhr;
  std::vector<double> uc;
  std::vector<bool> gap_mask;
  double sample_rate_hz = 4.0;
  std::optional<BinaryLabel> reference_label;

  std::size_t size() const { return fhr.size(); }
  double duration_s() const { return sample_rate_hz > 0 ? fhr.size() / sample_rate_hz : 0.0; }

  void validate() const {
    if (fhr.size() != uc.size() || fhr.size() != gap_mask.size())
      throw LengthMismatchError("fhr/uc/gap_mask lengths differ");
    if (sample_rate_hz <= 0) throw OutOfRangeError("sample_rate_hz must be positive");
    for (std::size_t i = 0; i < fhr.size(); ++i) {
      if (gap_mask[i]) continue;
      if (fhr[i] < kFhrMinBpm || fhr[i] > kFhrMaxBpm)
        throw OutOfRangeError("fhr[" + std::to_string(i) + "] = " + std::to_string(fhr[i]));
      if (uc[i] < kUcMin || uc[i] > kUcMax)
        throw OutOfRangeError("uc[" + std::to_string(i) + "] = " + std::to_string(uc[i]));
    }
  }
};

/// A preprocessed channel. values[i] is meaningful wherever valid[i] is true;
/// invalid stretches (gaps longer than the interpolation limit) keep their
/// input values but must not be consumed by analyzers.
struct CleanSignal {
  std::vector<double> values;
  std::vector<bool> valid;
  double sample_rate_hz = 4.0;

  std::size_t size() const { return values.size(); }
  double duration_s() const { return sample_rate_hz > 0 ? values.size() / sample_rate_hz : 0.0; }
};

struct PreprocessConfig {
  double max_gap_s = 15.0;          // gaps up to this long are linearly interpolated
  double fhr_median_window_s = 2.5; // running-median window for FHR
  double uc_median_window_s = 10.0; // running-median window for UC
  double min_duration_s = kMinAnalysisDurationS;
  int median_max_passes = 16;       // filter is iterated to a fixed point
};

namespace detail {

// Running median over one contiguous valid run [begin, end), window 2*half+1,
// edges padded by replication. Iterated until the output is a fixed point so
// that preprocessing is idempotent.
inline void median_filter_run(std::vector<double>& v, std::size_t begin, std::size_t end, int half,
                              int max_passes) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(end - begin);
  if (n <= 1 || half <= 0) return;
  std::vector<double> cur(v.begin() + begin, v.begin() + end);
  std::vector<double> next(n);
  std::vector<double> win(2 * half + 1);
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (int k = -half; k <= half; ++k) {
        const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(i + k, 0, n - 1);
        win[k + half] = cur[j];
      }
      std::nth_element(win.begin(), win.begin() + half, win.end());
      next[i] = win[half];
      if (next[i] != cur[i]) changed = true;
    }
    cur.swap(next);
    if (!changed) break;
  }
  std::copy(cur.begin(), cur.end(), v.begin() + begin);
}

inline int odd_window_half(double window_s, double rate_hz) {
  int w = static_cast<int>(std::lround(window_s * rate_hz));
  if (w % 2 == 0) ++w;  // centered window
  return std::max(0, w / 2);
}

inline CleanSignal preprocess_channel(const std::vector<double>& raw, const std::vector<bool>& gaps,
                                      double rate_hz, double max_gap_s, double window_s,
                                      int max_passes) {
  const std::size_t n = raw.size();
  CleanSignal out;
  out.values = raw;
  out.valid.assign(n, false);
  out.sample_rate_hz = rate_hz;
  for (std::size_t i = 0; i < n; ++i) out.valid[i] = !gaps[i];

  // Linear interpolation of interior gap runs no longer than max_gap_s.
  const std::size_t max_gap_samples = static_cast<std::size_t>(std::floor(max_gap_s * rate_hz));
  std::size_t i = 0;
  while (i < n) {
    if (out.valid[i]) { ++i; continue; }
    std::size_t j = i;
    while (j < n && !out.valid[j]) ++j;
    const bool has_left = i > 0, has_right = j < n;
    if (has_left && has_right && (j - i) <= max_gap_samples) {
      const double a = out.values[i - 1], b = out.values[j];
      const double span = static_cast<double>(j - (i - 1));
      for (std::size_t k = i; k < j; ++k) {
        out.values[k] = a + (b - a) * (static_cast<double>(k - (i - 1)) / span);
        out.valid[k] = true;
      }
    }
    i = j;
  }

  // Median-smooth each maximal valid run independently.
  const int half = odd_window_half(window_s, rate_hz);
  i = 0;
  while (i < n) {
    if (!out.valid[i]) { ++i; continue; }
    std::size_t j = i;
    while (j < n && out.valid[j]) ++j;
    median_filter_run(out.values, i, j, half, max_passes);
    i = j;
  }
  return out;
}

}  // namespace detail

/// Interpolates short gaps, leaves long gaps invalid, and median-smooths both
/// channels. Pure; applying it to its own output changes nothing.
inline std::pair<CleanSignal, CleanSignal> preprocess(const CtgRecord& rec,
                                                      const PreprocessConfig& cfg = {}) {
  rec.validate();
  if (rec.duration_s() < cfg.min_duration_s) throw TooShortError(rec.duration_s());
  CleanSignal fhr = detail::preprocess_channel(rec.fhr, rec.gap_mask, rec.sample_rate_hz,
                                               cfg.max_gap_s, cfg.fhr_median_window_s,
                                               cfg.median_max_passes);
  CleanSignal uc = detail::preprocess_channel(rec.uc, rec.gap_mask, rec.sample_rate_hz,
                                              cfg.max_gap_s, cfg.uc_median_window_s,
                                              cfg.median_max_passes);
  return {std::move(fhr), std::move(uc)};
}

}  // namespace ctg
