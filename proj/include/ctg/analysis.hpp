#pragma once

#include <utility>
#include <vector>

#include "ctg/baseline.hpp"
#include "ctg/classify.hpp"
#include "ctg/episodes.hpp"
#include "ctg/signal.hpp"
#include "ctg/sinusoidal.hpp"

namespace ctg {

struct AnalysisConfig {
  PreprocessConfig preprocess;
  BaselineConfig baseline;
  ExcursionConfig excursions;
  ContractionConfig contractions;
  DecelTypingConfig typing;
  SinusoidalConfig sinusoidal;
  ClassifyConfig classify;
};

/// Everything the analyzers derive from one record.
struct Analysis {
  CleanSignal fhr;
  CleanSignal uc;
  BaselineEstimate baseline;
  VariabilityProfile variability;
  std::vector<Episode> accelerations;
  std::vector<Episode> decelerations;
  std::vector<Episode> contractions;
  std::vector<TypedDeceleration> typed_decelerations;
  SinusoidalFinding sinusoidal;
};

inline Analysis analyze_signals(const CtgRecord& rec, const AnalysisConfig& cfg = {}) {
  Analysis a;
  std::tie(a.fhr, a.uc) = preprocess(rec, cfg.preprocess);
  a.baseline = estimate_baseline(a.fhr, cfg.baseline);
  a.variability = variability_profile(a.fhr, a.baseline);
  a.contractions = detect_contractions(a.uc, cfg.contractions);
  if (a.baseline.determinable) {
    for (auto& ep : detect_excursions(a.fhr, a.baseline, cfg.excursions)) {
      (ep.kind == EpisodeKind::Acceleration ? a.accelerations : a.decelerations)
          .push_back(std::move(ep));
    }
    a.typed_decelerations =
        type_decelerations(a.decelerations, a.contractions, a.fhr, a.baseline, cfg.typing);
  }
  a.sinusoidal = detect_sinusoidal(a.fhr, a.baseline, a.accelerations, cfg.sinusoidal);
  return a;
}

/// The five feature assessments for an analysis, in fixed feature order.
/// With an indeterminable baseline, episode detection is skipped and the
/// episode-based features read as suspicious rather than asserting absence.
inline std::vector<FeatureAssessment> assess_features(const Analysis& a,
                                                      const AnalysisConfig& cfg = {}) {
  std::vector<FeatureAssessment> out;
  out.push_back(classify_baseline(a.baseline, cfg.classify));
  out.push_back(classify_variability(a.variability, cfg.classify));
  if (a.baseline.determinable) {
    out.push_back(classify_accelerations(a.accelerations, a.contractions, cfg.classify));
    out.push_back(classify_decelerations(a.typed_decelerations, cfg.classify));
  } else {
    FeatureAssessment acc;
    acc.feature = Feature::Accelerations;
    acc.cls = FeatureClass::Suspicious;
    acc.evidence = json{{"count", nullptr}, {"baseline_indeterminable", true}};
    acc.explanation =
        "The baseline is indeterminable, so accelerations could not be assessed; treated as "
        "suspicious.";
    out.push_back(std::move(acc));
    FeatureAssessment dec;
    dec.feature = Feature::Decelerations;
    dec.cls = FeatureClass::Suspicious;
    dec.evidence = json{{"count", nullptr}, {"baseline_indeterminable", true}};
    dec.explanation =
        "The baseline is indeterminable, so decelerations could not be assessed; treated as "
        "suspicious.";
    out.push_back(std::move(dec));
  }
  out.push_back(classify_sinusoidal(a.sinusoidal, cfg.classify));
  return out;
}

/// Full rule pipeline: preprocess, analyze, classify each feature, aggregate.
inline OverallAssessment classify_record(const CtgRecord& rec, const AnalysisConfig& cfg = {}) {
  return aggregate(assess_features(analyze_signals(rec, cfg), cfg));
}

}  // namespace ctg
