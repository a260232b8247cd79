#pragma once

#include <chrono>
#include <cstdlib>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ctg/analysis.hpp"
#include "ctg/classify.hpp"
#include "ctg/errors.hpp"
#include "ctg/prompts.hpp"
#include "ctg/render.hpp"
#include "ctg/signal.hpp"

namespace ctg {

enum class PipelineMode { MultiAgent, DirectPrompt };
enum class BackendKind { RuleEngine, RemoteModel };

inline const char* to_string(BackendKind b) {
  return b == BackendKind::RuleEngine ? "rules" : "remote";
}

/// One agent's instructions: the prompt body plus, for decelerations, the
/// additional Type section (already part of the bundled body).
struct AgentSpec {
  AgentKind kind{};
  std::string prompt;
  BackendKind backend = BackendKind::RuleEngine;
};

struct AgentResult {
  AgentKind kind{};
  FeatureClass cls = FeatureClass::Normal;
  std::string explanation;
  double latency_ms = 0.0;
  BackendKind backend_used = BackendKind::RuleEngine;
  std::optional<FeatureAssessment> assessment;  // present for the rule engine
};

/// Extracts (class, explanation) from a backend reply. The classification is
/// the single class token on the first line that carries one; a line with
/// several distinct tokens, or a reply with none, is a parse error (raw text
/// preserved). "abnormal" never matches "normal" (word boundaries).
inline std::pair<FeatureClass, std::string> parse_reply(const std::string& text) {
  static constexpr std::pair<const char*, FeatureClass> kTokens[] = {
      {"pathological", FeatureClass::Pathological},
      {"suspicious", FeatureClass::Suspicious},
      {"normal", FeatureClass::Normal},
  };
  const auto is_word_char = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  };
  const auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };

  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      lines.push_back(text.substr(pos, nl == std::string::npos ? nl : nl - pos));
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
  }

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string line = lines[li];
    const std::string lline = lower(line);
    std::optional<FeatureClass> found;
    bool ambiguous = false;
    std::size_t token_end = 0;  // end of the earliest match; the explanation starts there
    std::size_t token_pos = std::string::npos;
    for (const auto& [token, cls] : kTokens) {
      const std::string t(token);
      std::size_t at = 0;
      while ((at = lline.find(t, at)) != std::string::npos) {
        const bool left_ok = at == 0 || !is_word_char(lline[at - 1]);
        const bool right_ok = at + t.size() >= lline.size() || !is_word_char(lline[at + t.size()]);
        if (left_ok && right_ok) {
          if (found && *found != cls) ambiguous = true;
          if (!found || at < token_pos) {
            found = cls;
            token_pos = at;
            token_end = at + t.size();
          }
        }
        at += t.size();
      }
    }
    if (!found) continue;
    if (ambiguous) throw ReplyParseError(text);

    std::string rest = line.substr(std::min(token_end, line.size()));
    // Trim separators between the token and the explanation.
    bool trimmed = true;
    while (trimmed && !rest.empty()) {
      trimmed = false;
      static constexpr const char* kDashes[] = {"\xE2\x80\x94", "\xE2\x80\x93"};  // em/en dash
      for (const char* d : kDashes) {
        if (rest.rfind(d, 0) == 0) { rest.erase(0, 3); trimmed = true; }
      }
      while (!rest.empty() &&
             (std::isspace(static_cast<unsigned char>(rest.front())) || rest.front() == ':' ||
              rest.front() == '-' || rest.front() == '.' || rest.front() == ',' ||
              rest.front() == ';')) {
        rest.erase(0, 1);
        trimmed = true;
      }
    }
    std::string explanation = rest;
    for (std::size_t i = li + 1; i < lines.size(); ++i) {
      if (!explanation.empty()) explanation += "\n";
      explanation += lines[i];
    }
    // Strip a leading "Explanation:" label.
    const std::string low = lower(explanation);
    if (low.rfind("explanation", 0) == 0) {
      std::size_t p = 11;
      while (p < explanation.size() &&
             (explanation[p] == ':' || std::isspace(static_cast<unsigned char>(explanation[p]))))
        ++p;
      explanation.erase(0, p);
    }
    while (!explanation.empty() && std::isspace(static_cast<unsigned char>(explanation.back())))
      explanation.pop_back();
    return {*found, explanation};
  }
  throw ReplyParseError(text);
}

/// What an agent sees: the record, the shared analysis configuration, the
/// rendered trace (for image-capable backends), and, for the aggregator, the
/// five feature results.
struct AgentContext {
  const CtgRecord* record = nullptr;
  const AnalysisConfig* analysis = nullptr;
  PipelineMode mode = PipelineMode::MultiAgent;
  std::string image_svg;
  std::vector<AgentResult> feature_results;
};

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual AgentResult run_agent(const AgentSpec& spec, const AgentContext& ctx) const = 0;
  virtual bool wants_image() const { return false; }
  virtual BackendKind kind() const = 0;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Local backend: each feature agent runs the deterministic rule analysis for
/// its feature independently; the aggregator applies the overall rule to the
/// five assessments. Output is identical to calling the classifiers directly.
class RuleEngineBackend final : public AgentBackend {
 public:
  BackendKind kind() const override { return BackendKind::RuleEngine; }

  AgentResult run_agent(const AgentSpec& spec, const AgentContext& ctx) const override {
    detail::Stopwatch timer;
    AgentResult result;
    result.kind = spec.kind;
    result.backend_used = BackendKind::RuleEngine;
    const AnalysisConfig cfg = ctx.analysis ? *ctx.analysis : AnalysisConfig{};

    if (spec.kind == AgentKind::Aggregator) {
      OverallAssessment overall;
      if (ctx.mode == PipelineMode::DirectPrompt) {
        overall = classify_record(*ctx.record, cfg);
      } else {
        std::vector<FeatureAssessment> features;
        for (const auto& r : ctx.feature_results) {
          if (!r.assessment)
            throw BackendUnavailableError("rule aggregator needs rule-engine feature results");
          features.push_back(*r.assessment);
        }
        overall = aggregate(features);
      }
      result.cls = overall.cls;
      result.explanation = overall.explanation;
    } else {
      const Feature feature = *feature_for(spec.kind);
      const Analysis analysis = analyze_signals(*ctx.record, cfg);
      for (auto& a : assess_features(analysis, cfg)) {
        if (a.feature != feature) continue;
        result.cls = a.cls;
        result.explanation = a.explanation;
        result.assessment = std::move(a);
        break;
      }
    }
    result.latency_ms = timer.ms();
    return result;
  }
};

/// JSON-over-HTTP chat-completion backend. The rendered trace is attached as
/// a base64 image part; the API key is read from an environment variable.
struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4.1";
  double timeout_s = 120.0;
  int max_retries = 1;  // transport errors only; parse errors are not retried
  std::string api_key_env = "CTG_API_KEY";
};

namespace detail {

inline std::string base64_encode(const std::string& in) {
  static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < in.size()) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                       (static_cast<unsigned char>(in[i + 1]) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
    i += 3;
  }
  if (i + 1 == in.size()) {
    const unsigned v = static_cast<unsigned char>(in[i]) << 16;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) |
                       (static_cast<unsigned char>(in[i + 1]) << 8);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

struct ParsedUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // e.g. /v1
  bool https = false;
};

inline ParsedUrl parse_base_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw BackendUnavailableError("bad base_url: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  const std::size_t path_at = url.find('/', scheme_end + 3);
  ParsedUrl p;
  p.https = scheme == "https";
  p.origin = path_at == std::string::npos ? url : url.substr(0, path_at);
  p.path_prefix = path_at == std::string::npos ? "" : url.substr(path_at);
  while (!p.path_prefix.empty() && p.path_prefix.back() == '/') p.path_prefix.pop_back();
  return p;
}

}  // namespace detail

class RemoteModelBackend final : public AgentBackend {
 public:
  explicit RemoteModelBackend(RemoteConfig cfg = {}) : cfg_(std::move(cfg)) {}

  BackendKind kind() const override { return BackendKind::RemoteModel; }
  bool wants_image() const override { return true; }

  AgentResult run_agent(const AgentSpec& spec, const AgentContext& ctx) const override {
    detail::Stopwatch timer;
    const std::string reply = complete(build_request(spec, ctx));
    auto [cls, explanation] = parse_reply(reply);
    AgentResult result;
    result.kind = spec.kind;
    result.cls = cls;
    result.explanation = std::move(explanation);
    result.backend_used = BackendKind::RemoteModel;
    result.latency_ms = timer.ms();
    return result;
  }

  json build_request(const AgentSpec& spec, const AgentContext& ctx) const {
    std::string text = spec.prompt;
    if (spec.kind == AgentKind::Aggregator && ctx.mode == PipelineMode::MultiAgent) {
      text += "\n# Feature Results\n";
      for (const auto& r : ctx.feature_results) {
        const auto f = feature_for(r.kind);
        text += std::string("## ") + (f ? display_name(*f) : to_string(r.kind)) + "\n";
        text += std::string("Classification: ") + to_string(r.cls) + "\n";
        text += "Explanation: " + r.explanation + "\n";
      }
      return json{{"model", cfg_.model},
                  {"messages", json::array({json{{"role", "user"}, {"content", text}}})}};
    }
    if (ctx.record != nullptr) {
      text += "\nThe attached image is record '" + ctx.record->record_id + "': a " +
              detail_fmt_minutes(ctx.record->duration_s()) +
              "-minute CTG trace (FHR upper panel, UC lower panel) rendered at 1 cm/min.";
    }
    json content = json::array();
    content.push_back(json{{"type", "text"}, {"text", text}});
    if (!ctx.image_svg.empty()) {
      content.push_back(
          json{{"type", "image_url"},
               {"image_url",
                json{{"url", "data:image/svg+xml;base64," + detail::base64_encode(ctx.image_svg)}}}});
    }
    return json{{"model", cfg_.model},
                {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})}};
  }

  const RemoteConfig& config() const { return cfg_; }

 private:
  static std::string detail_fmt_minutes(double seconds) {
    const double minutes = seconds / 60.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", minutes);
    return buf;
  }

  std::string complete(const json& body) const {
    const auto url = detail::parse_base_url(cfg_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (url.https)
      throw BackendUnavailableError("https base_url requires a TLS-enabled build: " + cfg_.base_url);
#endif
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<long>(cfg_.timeout_s * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<long>(cfg_.timeout_s * 1000)));
    client.set_write_timeout(std::chrono::milliseconds(static_cast<long>(cfg_.timeout_s * 1000)));

    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0')
      headers.emplace("Authorization", std::string("Bearer ") + key);

    const std::string path = url.path_prefix + "/chat/completions";
    const std::string payload = body.dump();

    httplib::Result res{nullptr, httplib::Error::Unknown};
    bool timed_out = false;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      res = client.Post(path, headers, payload, "application/json");
      if (res && res->status < 500) break;  // only transport/server faults retry
      timed_out = !res && (res.error() == httplib::Error::ConnectionTimeout ||
                           res.error() == httplib::Error::Read ||
                           res.error() == httplib::Error::Write);
    }
    if (!res) {
      if (timed_out) throw TimeoutError("POST " + cfg_.base_url + path);
      throw BackendUnavailableError(cfg_.base_url + path + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
      throw BackendUnavailableError(cfg_.base_url + path + " returned HTTP " +
                                    std::to_string(res->status) + ": " + res->body.substr(0, 200));
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw BackendUnavailableError(std::string("malformed completion response: ") + e.what());
    }
    if (!reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message"))
      throw BackendUnavailableError("completion response has no choices[0].message");
    const auto& message = reply["choices"][0]["message"];
    if (!message.contains("content") || !message["content"].is_string())
      throw BackendUnavailableError("completion message has no string content");
    return message["content"].get<std::string>();
  }

  RemoteConfig cfg_;
};

struct PipelineConfig {
  AnalysisConfig analysis;
  RenderConfig render;
  std::optional<std::filesystem::path> prompt_dir;
};

/// Runs the agent topology on one record. MultiAgent fans the five feature
/// agents out concurrently, joins on all of them, then runs the aggregator;
/// results are combined in fixed feature order, so any completion order
/// yields the same assessment. One failed agent fails the pipeline with a
/// diagnostic naming the feature. DirectPrompt issues a single request with
/// all prompts concatenated and returns the final class with no feature list.
inline OverallAssessment run_pipeline(const CtgRecord& rec, PipelineMode mode,
                                      const AgentBackend& backend, const PipelineConfig& cfg = {}) {
  const PromptLibrary prompts(cfg.prompt_dir);
  AgentContext ctx;
  ctx.record = &rec;
  ctx.analysis = &cfg.analysis;
  ctx.mode = mode;
  if (backend.wants_image()) ctx.image_svg = render_svg(rec, cfg.render);

  if (mode == PipelineMode::DirectPrompt) {
    AgentSpec spec{AgentKind::Aggregator, prompts.direct_prompt(), backend.kind()};
    AgentResult result;
    try {
      result = backend.run_agent(spec, ctx);
    } catch (const Error& e) {
      throw AgentError("direct", e.what());
    }
    OverallAssessment overall;
    overall.cls = result.cls;
    overall.binary = overall.cls == FeatureClass::Normal ? BinaryLabel::Normal : BinaryLabel::Abnormal;
    overall.explanation = "Direct prompt mode (no per-feature analysis). " + result.explanation;
    return overall;
  }

  std::vector<std::future<AgentResult>> futures;
  futures.reserve(5);
  for (Feature f : kFeatureOrder) {
    AgentSpec spec{agent_kind_for(f), prompts.text(agent_kind_for(f)), backend.kind()};
    futures.push_back(std::async(std::launch::async, [spec = std::move(spec), &backend, &ctx]() {
      return backend.run_agent(spec, ctx);
    }));
  }
  std::vector<AgentResult> results;
  std::vector<std::pair<Feature, std::string>> failures;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      results.push_back(futures[i].get());
    } catch (const std::exception& e) {
      failures.emplace_back(kFeatureOrder[i], e.what());
    }
  }
  if (!failures.empty())
    throw AgentError(to_string(failures.front().first), failures.front().second);

  AgentContext agg_ctx = ctx;
  agg_ctx.feature_results = results;
  AgentSpec agg_spec{AgentKind::Aggregator, prompts.text(AgentKind::Aggregator), backend.kind()};
  AgentResult agg;
  try {
    agg = backend.run_agent(agg_spec, agg_ctx);
  } catch (const Error& e) {
    throw AgentError("aggregator", e.what());
  }

  OverallAssessment overall;
  overall.cls = agg.cls;
  overall.binary = overall.cls == FeatureClass::Normal ? BinaryLabel::Normal : BinaryLabel::Abnormal;
  overall.explanation = agg.explanation;
  for (const auto& r : results) {
    if (r.assessment) {
      overall.features.push_back(*r.assessment);
    } else {
      FeatureAssessment a;
      a.feature = *feature_for(r.kind);
      a.cls = r.cls;
      a.evidence = json::object();
      a.explanation = r.explanation;
      overall.features.push_back(std::move(a));
    }
  }
  return overall;
}

}  // namespace ctg
