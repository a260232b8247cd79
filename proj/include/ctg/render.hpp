#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "ctg/episodes.hpp"
#include "ctg/errors.hpp"
#include "ctg/signal.hpp"

namespace ctg {

/// Paper-style layout: FHR panel above the UC panel on a shared time axis at
/// paper_speed_cm_per_min. Image width in px is exactly
/// duration_min * paper_speed * px_per_cm.
struct RenderConfig {
  double paper_speed_cm_per_min = 1.0;
  int px_per_cm = 40;
  double fhr_min_bpm = 50.0;
  double fhr_max_bpm = 210.0;
  double fhr_bpm_per_cm = 20.0;
  double uc_min = 0.0;
  double uc_max = 100.0;
  double uc_units_per_cm = 25.0;
  double grid_major_bpm = 10.0;
  double grid_major_min = 1.0;
  double uc_grid_major = 25.0;
  double panel_gap_px = 20.0;
  bool episode_markers = false;
  double min_duration_s = kMinAnalysisDurationS;
};

namespace detail {

/// Coordinate formatting: rounded to 0.01 px, shortest decimal form.
inline std::string fmt_px(double v) {
  const double r = std::round(v * 100.0) / 100.0;
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r);
  return std::string(buf, p);
}

}  // namespace detail

/// Deterministic SVG 1.1 document: identical record and config produce
/// byte-identical output. Gap-masked samples split the trace into separate
/// polylines; out-of-range values are clipped to the panel bounds.
inline std::string render_svg(const CtgRecord& rec, const RenderConfig& cfg = {},
                              const std::vector<Episode>& episodes = {}) {
  rec.validate();
  if (rec.duration_s() < cfg.min_duration_s) throw TooShortError(rec.duration_s());

  const double duration_min = rec.duration_s() / 60.0;
  const double width = duration_min * cfg.paper_speed_cm_per_min * cfg.px_per_cm;
  const double fhr_h = (cfg.fhr_max_bpm - cfg.fhr_min_bpm) / cfg.fhr_bpm_per_cm * cfg.px_per_cm;
  const double uc_h = (cfg.uc_max - cfg.uc_min) / cfg.uc_units_per_cm * cfg.px_per_cm;
  const double uc_top = fhr_h + cfg.panel_gap_px;
  const double height = uc_top + uc_h;

  const auto x_of = [&](double t_s) {
    return t_s / 60.0 * cfg.paper_speed_cm_per_min * cfg.px_per_cm;
  };
  const auto y_fhr = [&](double v) {
    const double c = std::clamp(v, cfg.fhr_min_bpm, cfg.fhr_max_bpm);
    return (cfg.fhr_max_bpm - c) / (cfg.fhr_max_bpm - cfg.fhr_min_bpm) * fhr_h;
  };
  const auto y_uc = [&](double v) {
    const double c = std::clamp(v, cfg.uc_min, cfg.uc_max);
    return uc_top + (cfg.uc_max - c) / (cfg.uc_max - cfg.uc_min) * uc_h;
  };

  using detail::fmt_px;
  std::string svg;
  svg.reserve(1 << 17);
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt_px(width) +
         "\" height=\"" + fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " +
         fmt_px(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt_px(width) + "\" height=\"" + fmt_px(height) +
         "\" fill=\"#ffffff\"/>\n";

  // Episode markers behind grid and traces.
  if (cfg.episode_markers) {
    for (const auto& ep : episodes) {
      const double x0 = x_of(ep.onset_s);
      const double w = x_of(ep.offset_s) - x0;
      const char* fill = ep.kind == EpisodeKind::Acceleration  ? "#dcefdc"
                         : ep.kind == EpisodeKind::Deceleration ? "#f6dada"
                                                                : "#dae4f6";
      const double top = ep.kind == EpisodeKind::Contraction ? uc_top : 0.0;
      const double h = ep.kind == EpisodeKind::Contraction ? uc_h : fhr_h;
      svg += "<rect x=\"" + fmt_px(x0) + "\" y=\"" + fmt_px(top) + "\" width=\"" + fmt_px(w) +
             "\" height=\"" + fmt_px(h) + "\" fill=\"" + fill + "\"/>\n";
    }
  }

  // Grid: horizontal value lines per panel, vertical minute lines on both.
  svg += "<g stroke=\"#e4c9c9\" stroke-width=\"0.5\">\n";
  for (double v = cfg.fhr_min_bpm; v <= cfg.fhr_max_bpm + 1e-9; v += cfg.grid_major_bpm) {
    const std::string y = fmt_px(y_fhr(v));
    svg += "<line x1=\"0\" y1=\"" + y + "\" x2=\"" + fmt_px(width) + "\" y2=\"" + y + "\"/>\n";
  }
  for (double v = cfg.uc_min; v <= cfg.uc_max + 1e-9; v += cfg.uc_grid_major) {
    const std::string y = fmt_px(y_uc(v));
    svg += "<line x1=\"0\" y1=\"" + y + "\" x2=\"" + fmt_px(width) + "\" y2=\"" + y + "\"/>\n";
  }
  for (double m = 0.0; m <= duration_min + 1e-9; m += cfg.grid_major_min) {
    const std::string x = fmt_px(x_of(m * 60.0));
    svg += "<line x1=\"" + x + "\" y1=\"0\" x2=\"" + x + "\" y2=\"" + fmt_px(fhr_h) + "\"/>\n";
    svg += "<line x1=\"" + x + "\" y1=\"" + fmt_px(uc_top) + "\" x2=\"" + x + "\" y2=\"" +
           fmt_px(height) + "\"/>\n";
  }
  svg += "</g>\n";

  // Axis labels inside the plot area (no outer margins: the paper-speed
  // width contract is on the whole image).
  svg += "<g font-family=\"monospace\" font-size=\"9\" fill=\"#888888\">\n";
  for (double v = cfg.fhr_min_bpm; v <= cfg.fhr_max_bpm + 1e-9; v += 2.0 * cfg.grid_major_bpm) {
    svg += "<text x=\"2\" y=\"" + fmt_px(y_fhr(v) - 1.5) + "\">" + fmt_px(v) + "</text>\n";
  }
  for (double v = cfg.uc_min; v <= cfg.uc_max + 1e-9; v += 2.0 * cfg.uc_grid_major) {
    svg += "<text x=\"2\" y=\"" + fmt_px(y_uc(v) - 1.5) + "\">" + fmt_px(v) + "</text>\n";
  }
  svg += "</g>\n";

  const auto emit_channel = [&](const std::vector<double>& values, auto&& y_of,
                                const char* stroke) {
    std::vector<std::pair<double, double>> seg;
    const auto flush = [&]() {
      if (seg.size() >= 2) {
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += stroke;
        svg += "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < seg.size(); ++i) {
          if (i) svg += ' ';
          svg += fmt_px(seg[i].first) + "," + fmt_px(seg[i].second);
        }
        svg += "\"/>\n";
      } else if (seg.size() == 1) {
        svg += "<circle cx=\"" + fmt_px(seg[0].first) + "\" cy=\"" + fmt_px(seg[0].second) +
               "\" r=\"0.8\" fill=\"";
        svg += stroke;
        svg += "\"/>\n";
      }
      seg.clear();
    };
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (rec.gap_mask[i]) { flush(); continue; }
      const double t = static_cast<double>(i) / rec.sample_rate_hz;
      seg.emplace_back(x_of(t), y_of(values[i]));
    }
    flush();
  };
  emit_channel(rec.fhr, y_fhr, "#1a468c");
  emit_channel(rec.uc, y_uc, "#2e6b34");

  svg += "</svg>\n";
  return svg;
}

}  // namespace ctg
