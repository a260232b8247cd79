#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctg/baseline.hpp"
#include "ctg/episodes.hpp"
#include "ctg/errors.hpp"
#include "ctg/sinusoidal.hpp"

namespace ctg {

using json = nlohmann::json;

/// Severity-ordered: Normal < Suspicious < Pathological.
enum class FeatureClass { Normal = 0, Suspicious = 1, Pathological = 2 };

inline const char* to_string(FeatureClass c) {
  switch (c) {
    case FeatureClass::Normal: return "normal";
    case FeatureClass::Suspicious: return "suspicious";
    case FeatureClass::Pathological: return "pathological";
  }
  return "?";
}

inline std::optional<FeatureClass> feature_class_from_string(const std::string& s) {
  if (s == "normal") return FeatureClass::Normal;
  if (s == "suspicious") return FeatureClass::Suspicious;
  if (s == "pathological") return FeatureClass::Pathological;
  return std::nullopt;
}

enum class Feature { Baseline, Variability, Accelerations, Decelerations, Sinusoidal };
inline constexpr Feature kFeatureOrder[5] = {Feature::Baseline, Feature::Variability,
                                             Feature::Accelerations, Feature::Decelerations,
                                             Feature::Sinusoidal};

inline const char* to_string(Feature f) {
  switch (f) {
    case Feature::Baseline: return "baseline";
    case Feature::Variability: return "variability";
    case Feature::Accelerations: return "accelerations";
    case Feature::Decelerations: return "decelerations";
    case Feature::Sinusoidal: return "sinusoidal";
  }
  return "?";
}

inline const char* display_name(Feature f) {
  switch (f) {
    case Feature::Baseline: return "Baseline";
    case Feature::Variability: return "Variability";
    case Feature::Accelerations: return "Accelerations";
    case Feature::Decelerations: return "Decelerations";
    case Feature::Sinusoidal: return "Sinusoidal pattern";
  }
  return "?";
}

/// One feature's verdict with machine-readable evidence and a short
/// human-readable explanation.
struct FeatureAssessment {
  Feature feature{};
  FeatureClass cls = FeatureClass::Normal;
  json evidence = json::object();
  std::string explanation;
};

struct OverallAssessment {
  FeatureClass cls = FeatureClass::Normal;
  BinaryLabel binary = BinaryLabel::Normal;
  std::vector<FeatureAssessment> features;
  std::string explanation;
};

struct ClassifyConfig {
  // accelerations
  double locked_fraction = 0.8;      // share of accelerations at contraction peaks
  double locked_window_s = 30.0;     // |acceleration peak - contraction peak|
  // variability durations (seconds)
  double low_pathological_s = 900.0;   // < 5 bpm lasting >= 15 min
  double low_suspicious_s = 600.0;
  double high_pathological_s = 600.0;  // > 25 bpm lasting >= 10 min
  double high_suspicious_s = 300.0;
  double normal_fraction_min = 0.5;
  double osc_lo = 3.0;
  double osc_hi = 5.0;
  // decelerations
  double prolonged_pathological_s = 180.0;
  int prolonged_contractions = 2;    // pathological when overlapping more than this many
};

namespace detail {

inline json episode_to_json(const Episode& e) {
  return json{{"kind", to_string(e.kind)},
              {"onset_s", e.onset_s},
              {"extremum_s", e.extremum_s},
              {"offset_s", e.offset_s},
              {"duration_s", e.duration_s()},
              {"amplitude", e.amplitude}};
}

inline std::string fmt1(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << v;
  return os.str();
}

}  // namespace detail

/// Baseline rule: normal 110-160 bpm, suspicious 100-109 or 161-180,
/// pathological below 100 or above 180. Indeterminable reads as suspicious.
/// Values round half away from zero to whole bpm before bucketing.
inline FeatureAssessment classify_baseline(const BaselineEstimate& est,
                                           const ClassifyConfig& = {}) {
  FeatureAssessment a;
  a.feature = Feature::Baseline;
  a.evidence = json{{"value_bpm", est.value_bpm ? json(*est.value_bpm) : json()},
                    {"determinable", est.determinable},
                    {"coverage_s", est.coverage_s},
                    {"iterations", est.iterations}};
  if (!est.determinable) {
    a.cls = FeatureClass::Suspicious;
    a.explanation =
        "The baseline could not be determined (no 10 minutes of signal free of sustained "
        "excursions), which is considered suspicious.";
    return a;
  }
  const long bpm = std::llround(*est.value_bpm);
  if (bpm >= 110 && bpm <= 160) {
    a.cls = FeatureClass::Normal;
    a.explanation = "Baseline " + std::to_string(bpm) + " bpm is within the normal 110-160 bpm range.";
  } else if ((bpm >= 100 && bpm <= 109) || (bpm >= 161 && bpm <= 180)) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Baseline " + std::to_string(bpm) + " bpm falls in the suspicious 100-109/161-180 bpm range.";
  } else {
    a.cls = FeatureClass::Pathological;
    a.explanation = "Baseline " + std::to_string(bpm) + " bpm is outside 100-180 bpm, which is pathological.";
  }
  return a;
}

/// Variability rule. Pathological: amplitude < 5 bpm for >= 15 min or
/// > 25 bpm for >= 10 min. Suspicious: the same deviations at shorter
/// (sub-threshold) durations, amplitude normal in under half the minutes, or
/// an oscillation frequency outside 3-5 per minute with normal amplitude.
inline FeatureAssessment classify_variability(const VariabilityProfile& p,
                                              const ClassifyConfig& cfg = {}) {
  FeatureAssessment a;
  a.feature = Feature::Variability;
  json minutes = json::array();
  for (const auto& mv : p.minutes)
    minutes.push_back(json{{"amplitude_bpm", mv.amplitude_bpm},
                           {"oscillations_per_min", mv.oscillations_per_min}});
  a.evidence = json{{"minutes", std::move(minutes)},
                    {"low_var_longest_run_s", p.low_var_longest_run_s},
                    {"high_var_longest_run_s", p.high_var_longest_run_s},
                    {"normal_fraction", p.normal_fraction},
                    {"median_oscillations_per_min", p.median_oscillations_per_min}};

  if (p.low_var_longest_run_s >= cfg.low_pathological_s) {
    a.cls = FeatureClass::Pathological;
    a.explanation = "Variability below 5 bpm persisted for " +
                    detail::fmt1(p.low_var_longest_run_s / 60.0) + " minutes (15 or more is pathological).";
  } else if (p.high_var_longest_run_s >= cfg.high_pathological_s) {
    a.cls = FeatureClass::Pathological;
    a.explanation = "Variability above 25 bpm persisted for " +
                    detail::fmt1(p.high_var_longest_run_s / 60.0) + " minutes (10 or more is pathological).";
  } else if (p.low_var_longest_run_s >= cfg.low_suspicious_s) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Variability below 5 bpm persisted for " +
                    detail::fmt1(p.low_var_longest_run_s / 60.0) + " minutes, which is suspicious.";
  } else if (p.high_var_longest_run_s >= cfg.high_suspicious_s) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Variability above 25 bpm persisted for " +
                    detail::fmt1(p.high_var_longest_run_s / 60.0) + " minutes, which is suspicious.";
  } else if (p.normal_fraction < cfg.normal_fraction_min) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Amplitude was within 5-25 bpm in only " +
                    detail::fmt1(100.0 * p.normal_fraction) + "% of minutes.";
  } else if (p.median_oscillations_per_min < cfg.osc_lo || p.median_oscillations_per_min > cfg.osc_hi) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Oscillation frequency (median " + detail::fmt1(p.median_oscillations_per_min) +
                    " per minute) is outside the normal 3-5 per minute despite normal amplitude.";
  } else {
    a.cls = FeatureClass::Normal;
    a.explanation = "Variability of 5-25 bpm at 3-5 oscillations per minute is present most of the time.";
  }
  return a;
}

/// Accelerations rule: none is pathological; two or more are normal unless
/// nearly all of them lock onto contraction peaks (suspicious); a single
/// acceleration sits between the printed rows and reads as suspicious.
inline FeatureAssessment classify_accelerations(const std::vector<Episode>& accels,
                                                const std::vector<Episode>& contractions,
                                                const ClassifyConfig& cfg = {}) {
  FeatureAssessment a;
  a.feature = Feature::Accelerations;
  std::size_t locked = 0;
  for (const auto& ep : accels) {
    for (const auto& c : contractions) {
      if (std::fabs(ep.extremum_s - c.extremum_s) <= cfg.locked_window_s) { ++locked; break; }
    }
  }
  const double locked_fraction =
      accels.empty() ? 0.0 : static_cast<double>(locked) / static_cast<double>(accels.size());
  json eps = json::array();
  for (const auto& ep : accels) eps.push_back(detail::episode_to_json(ep));
  a.evidence = json{{"count", accels.size()},
                    {"contraction_locked_fraction", locked_fraction},
                    {"episodes", std::move(eps)}};

  if (accels.empty()) {
    a.cls = FeatureClass::Pathological;
    a.explanation = "No accelerations were detected in the trace, which is pathological.";
  } else if (accels.size() == 1) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Only one acceleration was detected (two in 20 minutes are expected).";
  } else if (contractions.size() >= 2 && locked_fraction >= cfg.locked_fraction) {
    a.cls = FeatureClass::Suspicious;
    a.explanation = "Accelerations occur periodically with every contraction (" +
                    std::to_string(locked) + " of " + std::to_string(accels.size()) +
                    " at contraction peaks), which is suspicious.";
  } else {
    a.cls = FeatureClass::Normal;
    a.explanation = std::to_string(accels.size()) + " accelerations in 20 minutes is normal.";
  }
  return a;
}

/// Decelerations rule: none is normal; late, atypical variable, or prolonged
/// beyond 3 minutes (or spanning more than two contractions) is pathological;
/// anything else detected is suspicious.
inline FeatureAssessment classify_decelerations(const std::vector<TypedDeceleration>& typed,
                                                const ClassifyConfig& cfg = {}) {
  FeatureAssessment a;
  a.feature = Feature::Decelerations;
  json eps = json::array();
  for (const auto& td : typed) {
    json e = detail::episode_to_json(td.episode);
    e["type"] = to_string(td.decel_type);
    e["onset_to_nadir_s"] = td.onset_to_nadir_s;
    e["sub_three_min"] = td.sub_three_min;
    e["overlapped_contractions"] = td.overlapped_contractions;
    json feats = json::array();
    for (auto f : td.atypical) feats.push_back(to_string(f));
    e["atypical_features"] = std::move(feats);
    eps.push_back(std::move(e));
  }
  a.evidence = json{{"count", typed.size()}, {"episodes", std::move(eps)}};

  if (typed.empty()) {
    a.cls = FeatureClass::Normal;
    a.explanation = "No decelerations were detected.";
    return a;
  }
  std::vector<std::string> pathological_reasons;
  for (const auto& td : typed) {
    const bool prolonged_path =
        td.decel_type == DecelType::Prolonged &&
        (td.episode.duration_s() > cfg.prolonged_pathological_s ||
         td.overlapped_contractions > cfg.prolonged_contractions);
    if (td.decel_type == DecelType::Late) pathological_reasons.push_back("a late deceleration");
    else if (td.decel_type == DecelType::AtypicalVariable)
      pathological_reasons.push_back("an atypical variable deceleration");
    else if (prolonged_path)
      pathological_reasons.push_back("a prolonged deceleration exceeding 3 minutes");
  }
  if (!pathological_reasons.empty()) {
    a.cls = FeatureClass::Pathological;
    a.explanation = "Detected " + pathological_reasons.front() + ", which is pathological.";
  } else {
    a.cls = FeatureClass::Suspicious;
    std::size_t early = 0, variable = 0, sub3 = 0;
    for (const auto& td : typed) {
      if (td.decel_type == DecelType::Early) ++early;
      else if (td.decel_type == DecelType::Variable) ++variable;
      else ++sub3;
    }
    std::ostringstream os;
    os << "Detected " << typed.size() << " deceleration(s) (";
    bool first = true;
    const auto add = [&](std::size_t n, const char* name) {
      if (n == 0) return;
      if (!first) os << ", ";
      os << n << " " << name;
      first = false;
    };
    add(early, "early");
    add(variable, "variable");
    add(sub3, "prolonged under 3 minutes");
    os << "), which is suspicious.";
    a.explanation = os.str();
  }
  return a;
}

/// Sinusoidal rule: none is normal, pseudosinusoidal is suspicious, a true
/// sinusoidal pattern is pathological.
inline FeatureAssessment classify_sinusoidal(const SinusoidalFinding& f,
                                             const ClassifyConfig& = {}) {
  FeatureAssessment a;
  a.feature = Feature::Sinusoidal;
  a.evidence = json{{"status", to_string(f.status)},
                    {"span", f.span ? json{{"start_s", f.span->first}, {"end_s", f.span->second}}
                                    : json()},
                    {"amplitude_bpm", f.amplitude_bpm},
                    {"frequency_cpm", f.frequency_cpm},
                    {"smoothness", f.smoothness}};
  switch (f.status) {
    case SinusoidalStatus::None:
      a.cls = FeatureClass::Normal;
      a.explanation = "No sinusoidal pattern is present.";
      break;
    case SinusoidalStatus::Pseudosinusoidal:
      a.cls = FeatureClass::Suspicious;
      a.explanation = "A pseudosinusoidal pattern (" + detail::fmt1(f.amplitude_bpm) + " bpm at " +
                      detail::fmt1(f.frequency_cpm) + " cycles/min, smoothness " +
                      detail::fmt1(f.smoothness) + ") was detected, which is suspicious.";
      break;
    case SinusoidalStatus::TrueSinusoidal:
      a.cls = FeatureClass::Pathological;
      a.explanation = "A true sinusoidal pattern (" + detail::fmt1(f.amplitude_bpm) + " bpm at " +
                      detail::fmt1(f.frequency_cpm) +
                      " cycles/min for over 10 minutes, no accelerations) was detected, which is "
                      "pathological.";
      break;
  }
  return a;
}

/// Overall rule: all normal -> Normal; exactly one suspicious feature and no
/// pathological one -> Suspicious; at least one pathological or at least two
/// suspicious features -> Pathological. The binary label maps every
/// non-normal class to Abnormal.
inline OverallAssessment aggregate(const std::vector<FeatureAssessment>& features) {
  if (features.size() != 5) throw WrongFeatureSetError("expected 5 features, got " +
                                                       std::to_string(features.size()));
  std::vector<const FeatureAssessment*> ordered(5, nullptr);
  for (const auto& f : features) {
    const std::size_t i = static_cast<std::size_t>(f.feature);
    if (ordered[i] != nullptr)
      throw WrongFeatureSetError(std::string("duplicate feature ") + to_string(f.feature));
    ordered[i] = &f;
  }

  std::vector<std::string> suspicious, pathological;
  for (const auto* f : ordered) {
    if (f->cls == FeatureClass::Suspicious) suspicious.push_back(display_name(f->feature));
    if (f->cls == FeatureClass::Pathological) pathological.push_back(display_name(f->feature));
  }

  OverallAssessment overall;
  for (const auto* f : ordered) overall.features.push_back(*f);

  std::string clause;
  if (!pathological.empty() || suspicious.size() >= 2) {
    overall.cls = FeatureClass::Pathological;
    if (!pathological.empty()) {
      clause = "at least one feature is pathological (";
      for (std::size_t i = 0; i < pathological.size(); ++i)
        clause += (i ? ", " : "") + pathological[i];
      clause += ")";
    } else {
      clause = "at least two features are suspicious (";
      for (std::size_t i = 0; i < suspicious.size(); ++i) clause += (i ? ", " : "") + suspicious[i];
      clause += ")";
    }
  } else if (suspicious.size() == 1) {
    overall.cls = FeatureClass::Suspicious;
    clause = "one feature is suspicious (" + suspicious.front() + ") while all others are normal";
  } else {
    overall.cls = FeatureClass::Normal;
    clause = "all evaluated features are within normal ranges";
  }
  overall.binary = overall.cls == FeatureClass::Normal ? BinaryLabel::Normal : BinaryLabel::Abnormal;

  std::ostringstream os;
  for (const auto* f : ordered)
    os << display_name(f->feature) << ": " << to_string(f->cls) << ". " << f->explanation << "\n";
  os << "Overall: " << to_string(overall.cls) << " because " << clause << ".";
  overall.explanation = os.str();
  return overall;
}

/// Result document: {record_id, overall:{class, binary, explanation},
/// features:[{feature, class, explanation, evidence}]}.
inline json assessment_to_json(const OverallAssessment& overall, const std::string& record_id) {
  json features = json::array();
  for (const auto& f : overall.features)
    features.push_back(json{{"feature", to_string(f.feature)},
                            {"class", to_string(f.cls)},
                            {"explanation", f.explanation},
                            {"evidence", f.evidence}});
  return json{{"record_id", record_id},
              {"overall", json{{"class", to_string(overall.cls)},
                               {"binary", to_string(overall.binary)},
                               {"explanation", overall.explanation}}},
              {"features", std::move(features)}};
}

}  // namespace ctg
