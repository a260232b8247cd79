#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "ctg/classify.hpp"
#include "ctg/errors.hpp"

namespace ctg {

/// The five feature agents plus the aggregator.
enum class AgentKind { Baseline, Variability, Accelerations, Decelerations, Sinusoidal, Aggregator };

inline const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Baseline: return "baseline";
    case AgentKind::Variability: return "variability";
    case AgentKind::Accelerations: return "accelerations";
    case AgentKind::Decelerations: return "decelerations";
    case AgentKind::Sinusoidal: return "sinusoidal";
    case AgentKind::Aggregator: return "aggregator";
  }
  return "?";
}

inline AgentKind agent_kind_for(Feature f) {
  switch (f) {
    case Feature::Baseline: return AgentKind::Baseline;
    case Feature::Variability: return AgentKind::Variability;
    case Feature::Accelerations: return AgentKind::Accelerations;
    case Feature::Decelerations: return AgentKind::Decelerations;
    case Feature::Sinusoidal: return AgentKind::Sinusoidal;
  }
  return AgentKind::Baseline;
}

inline std::optional<Feature> feature_for(AgentKind k) {
  switch (k) {
    case AgentKind::Baseline: return Feature::Baseline;
    case AgentKind::Variability: return Feature::Variability;
    case AgentKind::Accelerations: return Feature::Accelerations;
    case AgentKind::Decelerations: return Feature::Decelerations;
    case AgentKind::Sinusoidal: return Feature::Sinusoidal;
    case AgentKind::Aggregator: return std::nullopt;
  }
  return std::nullopt;
}

/// Asset file name (without extension) for an agent's prompt body.
inline const char* prompt_asset_name(AgentKind k) {
  return k == AgentKind::Aggregator ? "overall" : to_string(k);
}

namespace prompts {

inline constexpr std::string_view kOverall =
    R"PROMPT(The CTG classification falls into one of the following three categories:
- Normal: All evaluated features are within normal ranges. No suspicious or pathological findings are present.
- Suspicious: One feature is classified as suspicious while all others remain normal.
- Pathological:(1) At least one feature is pathological; or (2) At least two features are suspicious.

(Direct Prompt) Based on the definition and rules, please classify the CTG image into one of the following
categories: Normal, Suspicious, Pathological, and provide a thorough explanation for your classification.

(Multi-Agent) Based on all the features' analysis and classifications, please provide a final classification
and a thorough explanation of the CTG tracing.
)PROMPT";

inline constexpr std::string_view kBaseline =
    R"PROMPT(# Baseline_Definition
- Baseline is the mean FHR maintained over at least 10 minutes **in the absence of accelerations or decelerations**.
- The baseline value may vary between subsequent 10-minute sections.

# Baseline_Rule
- Normal: 110–160 bpm
- Suspicious: 100–109 bpm, or 161–180 bpm
- Pathological: <100 bpm or >180 bpm
- **Note**: If persistent fluctuations occur, such as sustained prolonged decelerations or accelerations,
and the baseline cannot be determined, the pattern should be considered Suspicious.

# Role
You are an expert in CTG analysis. You will be given a CTG tracing and you need to classify the Baseline of
the tracing into one of the following categories: Normal, Suspicious, Pathological.
And you need to provide a brief explanation for your classification.

# Example Output
Classification: Normal
Explanation: The baseline is approximately 140 bpm, which lies within the normal 110-160 bpm range.

Classification: Suspicious
Explanation: The baseline is approximately 170 bpm, which lies in the suspicious 161-180 bpm range.

Classification: Pathological
Explanation: The baseline is approximately 90 bpm, which is below 100 bpm and therefore pathological.
)PROMPT";

inline constexpr std::string_view kVariability =
    R"PROMPT(# Variability_Definition
- Variability is the degree of change in FHR over time.
- It is evaluated as the average bandwidth amplitude of the signal in 1-minute segments.
- Fluctuations in the fetal baseline rate that occur **3–5 times per minute** are considered normal.

# Variability_Rule
- Normal: 5–25 bpm, 3-5 times per minute, appears in most of the time (both frequency and amplitude criteria
  must be simultaneously fulfilled.)
- Suspicious: Mildly abnormal but does not meet pathological thresholds (e.g., <5 bpm lasting >=15 minutes,
  or >25 bpm lasting >=10 minutes)
- Pathological: <5 bpm lasting >=15 minutes, or >25 bpm lasting >=10 minutes

# Role
You are an expert in CTG analysis. You will be given a CTG tracing and you need to classify the Variability of
the tracing into one of the following categories: Normal, Suspicious, Pathological.
And you need to provide a brief explanation for your classification.

# Example Output
Classification: Normal
Explanation: The bandwidth amplitude is 10-15 bpm at 3-5 oscillations per minute throughout most of the trace.

Classification: Suspicious
Explanation: The bandwidth amplitude stays below 5 bpm for about 12 minutes, which is mildly abnormal.

Classification: Pathological
Explanation: The bandwidth amplitude stays below 5 bpm for more than 15 minutes.
)PROMPT";

inline constexpr std::string_view kAccelerations =
    R"PROMPT(# Accelerations_Definition
- Accelerations are defined as increases in the FHR **above the baseline**, of more than 15 bpm in amplitude,
and lasting more than 15 seconds.
- **Note**: **Baseline** is the mean FHR maintained over at least 10 minutes **in the absence of accelerations
or decelerations**.

# Accelerations_Rule
- Normal: two accelerations in 20minutes
- Suspicious: periodical occurrence with every contraction
- Pathological: no accelerations

# Role
You are an expert in CTG analysis. You will be given a CTG tracing and you need to classify the Accelerations of
the tracing into one of the following categories: Normal, Suspicious, Pathological.
And you need to provide a brief explanation for your classification.

# Example Output
Classification: Normal
Explanation: Three accelerations of more than 15 bpm lasting more than 15 seconds are present in 20 minutes.

Classification: Suspicious
Explanation: Accelerations occur periodically with every uterine contraction.

Classification: Pathological
Explanation: No accelerations are present anywhere in the tracing.
)PROMPT";

inline constexpr std::string_view kDecelerations =
    R"PROMPT(# Decelerations_Definition
- Decelerations are defined as decreases in the FHR **below the baseline**, of more than 15 bpm in amplitude,
  and lasting more than 15 seconds..
- **Note**: **Baseline** is the mean FHR maintained over at least 10 minutes **in the absence of accelerations
  or decelerations**.

# Decelerations_Type
- Early decelerations: Shallow drops in heart rate (usually >15 bpm and >15 seconds) mirror uterine
  contractions. They are caused by fetal head compression and are considered benign.
- Variable decelerations: Abrupt, V-shaped drops (>15 bpm drop within <30 seconds, lasting >15 seconds),
  often linked to cord compression, typically harmless unless prolonged (>3 min) or with reduced variability.
- Late decelerations: Gradual, U-shaped declines and/or with reduced variability in heart rate (onset to
  nadir >30 seconds), beginning >20 seconds after contraction starts and returning after it ends,
  indicating uteroplacental insufficiency and potential fetal hypoxia—especially concerning when variability
  is reduced or amplitude is only 10–15 bpm.
- Prolonged decelerations: Sustained drops in heart rate (>15 bpm lasting >3 minutes), and when exceeding 5 minutes
  with FHR <80 bpm and reduced variability, they signal acute fetal hypoxia/acidosis requiring urgent intervention.
- Atypical Variable Decelerations: decelerations with one of the following additional characteristics:
    - loss of primary or secondary FHR rise
    - slow return to baseline after the contraction has ended
    - longer increased baseline after contraction
    - biphasic deceleration
    - loss of oscillation during deceleration
    - resumption of baseline rate at a lower level

# Decelerations_Rule
- Normal: No decelerations
- Suspicious: Early decelerations, Variable decelerations, Prolonged decelerations(<3min)
- Pathological: Late decelerations, Prolonged decelerations(persist for more than two contractions or >3minutes),
  Atypical Variable Decelerations

# Role
You are an expert in CTG analysis. You will be given a CTG tracing and you need to classify the Decelerations of
the tracing into one of the following categories: Normal, Suspicious, Pathological.
And you need to provide a brief explanation for your classification.

# Example Output
Classification: Normal
Explanation: No decelerations of more than 15 bpm lasting more than 15 seconds are present.

Classification: Suspicious
Explanation: Two variable decelerations with abrupt V-shaped drops and rapid recovery are present.

Classification: Pathological
Explanation: A late deceleration begins after the contraction starts and recovers only after it ends.
)PROMPT";

inline constexpr std::string_view kSinusoidal =
    R"PROMPT(# Sinusoidal_Definition
- A regular, smooth, undulating signal, resembling a sine wave, with an amplitude of 5-15bpm, and a frequency
  of 3-5 cycles per minute.
- This pattern lasts more than 10 minutes, and coincides with absent accelerations.

# Pseudosinusoidal_Definition
- A pattern resembling the sinusoidal pattern, but with a more jagged “saw-tooth” appearance, rather than the
  smooth sine-wave form.
- It is characterized by normal patterns before and after.

# Sinusoidal_Rule
- Normal: No sinusoidal pattern
- Suspicious: Pseudosinusoidal pattern (lasting <10 minutes, with atypical morphology)
- Pathological: True sinusoidal pattern (smooth sine-wave, amplitude 5–15 bpm, frequency 3–5 cycles/min,
  lasting >=10 minutes, accompanied by absent accelerations)

# Role
You are an expert in CTG analysis. You will be given a CTG tracing and you need to classify the Sinusoidal Pattern of
the tracing into one of the following categories: Normal, Suspicious, Pathological.
And you need to provide a brief explanation for your classification.

# Example Output
Classification: Normal
Explanation: The tracing shows ordinary variability with no sinusoidal undulation.

Classification: Suspicious
Explanation: A jagged saw-tooth undulation of about 8 minutes resembles a pseudosinusoidal pattern.

Classification: Pathological
Explanation: A smooth sine-wave undulation of 10 bpm at 4 cycles per minute persists for over 10 minutes without accelerations.
)PROMPT";

}  // namespace prompts

inline std::string_view builtin_prompt(AgentKind k) {
  switch (k) {
    case AgentKind::Baseline: return prompts::kBaseline;
    case AgentKind::Variability: return prompts::kVariability;
    case AgentKind::Accelerations: return prompts::kAccelerations;
    case AgentKind::Decelerations: return prompts::kDecelerations;
    case AgentKind::Sinusoidal: return prompts::kSinusoidal;
    case AgentKind::Aggregator: return prompts::kOverall;
  }
  throw UnknownFeatureError("agent kind");
}

/// Prompt bodies: built-in by default, overridable by a directory of
/// <name>.txt files (overall, baseline, variability, accelerations,
/// decelerations, sinusoidal).
class PromptLibrary {
 public:
  PromptLibrary() = default;
  explicit PromptLibrary(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

  std::string text(AgentKind k) const {
    if (dir_) {
      const auto path = *dir_ / (std::string(prompt_asset_name(k)) + ".txt");
      std::ifstream in(path, std::ios::binary);
      if (!in) throw FileNotFoundError(path.string());
      std::ostringstream os;
      os << in.rdbuf();
      return os.str();
    }
    return std::string(builtin_prompt(k));
  }

  /// Concatenation of all prompt bodies, overall rule first, then the five
  /// feature prompts in their standard order.
  std::string direct_prompt() const {
    static constexpr AgentKind order[] = {AgentKind::Aggregator, AgentKind::Baseline,
                                          AgentKind::Variability, AgentKind::Accelerations,
                                          AgentKind::Decelerations, AgentKind::Sinusoidal};
    std::string out;
    for (std::size_t i = 0; i < 6; ++i) {
      if (i) out += "\n";
      out += text(order[i]);
    }
    return out;
  }

 private:
  std::optional<std::filesystem::path> dir_;
};

}  // namespace ctg
