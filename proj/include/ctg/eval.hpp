#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctg/analysis.hpp"
#include "ctg/classify.hpp"
#include "ctg/errors.hpp"
#include "ctg/rng.hpp"
#include "ctg/signal.hpp"

namespace ctg {

struct Confusion {
  int tp = 0, fp = 0, tn = 0, fn = 0;
  int total() const { return tp + fp + tn + fn; }
};

inline double accuracy(const Confusion& c) {
  return c.total() > 0 ? static_cast<double>(c.tp + c.tn) / c.total() : 0.0;
}

/// F1 with Abnormal as the positive class; 0 when there is nothing positive
/// anywhere (no true or predicted abnormal).
inline double f1_score(const Confusion& c) {
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  return denom > 0.0 ? 2.0 * c.tp / denom : 0.0;
}

struct RecordVerdict {
  std::string record_id;
  FeatureClass verdict{};
  BinaryLabel binary{};
  BinaryLabel label{};
  bool correct = false;
};

struct TrialResult {
  int trial = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  std::vector<RecordVerdict> records;
};

struct EvalReport {
  int n_records = 0;
  int trials = 0;
  std::vector<TrialResult> per_trial;
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
};

struct SamplerConfig {
  std::optional<int> sample_k;  // per-trial sample size; absent = all records
  bool balanced = false;        // half abnormal / half normal
  std::uint64_t seed = 0;
};

using RecordRunner = std::function<OverallAssessment(const CtgRecord&)>;

namespace detail {

inline std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool,
                                                         std::size_t k, SplitMix64& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(pool.size()));
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

}  // namespace detail

/// Batch evaluation: per trial, (re)samples the records, runs the pipeline,
/// maps the overall class to the binary label, and computes accuracy and F1
/// against the reference labels (positive class: Abnormal). With the rules
/// backend and no sampling, every trial is bit-identical.
inline EvalReport evaluate(const std::vector<CtgRecord>& records,
                           const std::map<std::string, BinaryLabel>& labels, int trials,
                           const SamplerConfig& sampler = {}, RecordRunner runner = {},
                           int jobs = 1) {
  if (!runner) runner = [](const CtgRecord& r) { return classify_record(r); };
  if (trials < 1) trials = 1;

  // Sorted record order keeps sampling and reports deterministic.
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].record_id < records[b].record_id;
  });

  const auto label_of = [&](const CtgRecord& r) {
    const auto it = labels.find(r.record_id);
    if (it == labels.end()) throw MissingLabelError(r.record_id);
    return it->second;
  };

  SplitMix64 rng(sampler.seed);
  EvalReport report;
  report.trials = trials;

  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> chosen;
    if (!sampler.sample_k) {
      chosen = order;
    } else if (sampler.balanced) {
      std::vector<std::size_t> normal, abnormal;
      for (std::size_t i : order)
        (label_of(records[i]) == BinaryLabel::Normal ? normal : abnormal).push_back(i);
      const std::size_t half = static_cast<std::size_t>(*sampler.sample_k) / 2;
      if (normal.size() < half || abnormal.size() < *sampler.sample_k - half)
        throw Error("not enough records per class for a balanced sample of " +
                    std::to_string(*sampler.sample_k));
      chosen = detail::draw_without_replacement(abnormal, *sampler.sample_k - half, rng);
      const auto normals = detail::draw_without_replacement(normal, half, rng);
      chosen.insert(chosen.end(), normals.begin(), normals.end());
    } else {
      if (order.size() < static_cast<std::size_t>(*sampler.sample_k))
        throw Error("sample size exceeds the record count");
      chosen = detail::draw_without_replacement(order, static_cast<std::size_t>(*sampler.sample_k),
                                                rng);
    }
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
      return records[a].record_id < records[b].record_id;
    });

    std::vector<OverallAssessment> outcomes(chosen.size());
    if (jobs <= 1 || chosen.size() <= 1) {
      for (std::size_t i = 0; i < chosen.size(); ++i) outcomes[i] = runner(records[chosen[i]]);
    } else {
      std::vector<std::future<void>> workers;
      std::atomic<std::size_t> cursor{0};
      const int n_workers = std::min<int>(jobs, static_cast<int>(chosen.size()));
      for (int w = 0; w < n_workers; ++w) {
        workers.push_back(std::async(std::launch::async, [&]() {
          for (std::size_t i = cursor.fetch_add(1); i < chosen.size(); i = cursor.fetch_add(1))
            outcomes[i] = runner(records[chosen[i]]);
        }));
      }
      for (auto& w : workers) w.get();
    }

    TrialResult trial;
    trial.trial = t + 1;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const CtgRecord& rec = records[chosen[i]];
      RecordVerdict v;
      v.record_id = rec.record_id;
      v.verdict = outcomes[i].cls;
      v.binary = outcomes[i].binary;
      v.label = label_of(rec);
      v.correct = v.binary == v.label;
      const bool pred_pos = v.binary == BinaryLabel::Abnormal;
      const bool is_pos = v.label == BinaryLabel::Abnormal;
      if (pred_pos && is_pos) ++trial.confusion.tp;
      else if (pred_pos && !is_pos) ++trial.confusion.fp;
      else if (!pred_pos && !is_pos) ++trial.confusion.tn;
      else ++trial.confusion.fn;
      trial.records.push_back(std::move(v));
    }
    trial.accuracy = accuracy(trial.confusion);
    trial.f1 = f1_score(trial.confusion);
    report.mean_accuracy += trial.accuracy;
    report.mean_f1 += trial.f1;
    report.n_records = static_cast<int>(chosen.size());
    report.per_trial.push_back(std::move(trial));
  }
  report.mean_accuracy /= trials;
  report.mean_f1 /= trials;
  return report;
}

inline json report_to_json(const EvalReport& report) {
  json per_trial = json::array();
  for (const auto& t : report.per_trial) {
    json records = json::array();
    for (const auto& r : t.records)
      records.push_back(json{{"record_id", r.record_id},
                             {"verdict", to_string(r.verdict)},
                             {"binary", to_string(r.binary)},
                             {"label", to_string(r.label)},
                             {"correct", r.correct}});
    per_trial.push_back(json{{"trial", t.trial},
                             {"accuracy", t.accuracy},
                             {"f1", t.f1},
                             {"confusion", json{{"tp", t.confusion.tp},
                                                {"fp", t.confusion.fp},
                                                {"tn", t.confusion.tn},
                                                {"fn", t.confusion.fn}}},
                             {"records", std::move(records)}});
  }
  return json{{"n_records", report.n_records},
              {"trials", report.trials},
              {"per_trial", std::move(per_trial)},
              {"mean_accuracy", report.mean_accuracy},
              {"mean_f1", report.mean_f1}};
}

}  // namespace ctg
