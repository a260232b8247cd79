#include <doctest.h>

#include <ctg/csv.hpp>
#include <ctg/eval.hpp>
#include <ctg/synth.hpp>

#include "helpers.hpp"

using namespace ctg;

namespace {

/// Brute-force metric oracle: recount the confusion from scratch.
std::pair<double, double> metrics_oracle(const std::vector<bool>& predicted_abnormal,
                                         const std::vector<bool>& label_abnormal) {
  int tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < predicted_abnormal.size(); ++i) {
    if (predicted_abnormal[i] && label_abnormal[i]) ++tp;
    else if (predicted_abnormal[i] && !label_abnormal[i]) ++fp;
    else if (!predicted_abnormal[i] && !label_abnormal[i]) ++tn;
    else ++fn;
  }
  const double acc = predicted_abnormal.empty()
                         ? 0.0
                         : double(tp + tn) / static_cast<double>(predicted_abnormal.size());
  const double f1 = (2 * tp + fp + fn) > 0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  return {acc, f1};
}

/// Labeled record set with a deterministic fake runner (no signal analysis).
struct Bench {
  std::vector<CtgRecord> records;
  std::map<std::string, BinaryLabel> labels;
  std::map<std::string, FeatureClass> verdicts;

  RecordRunner runner() const {
    return [this](const CtgRecord& r) {
      OverallAssessment o;
      o.cls = verdicts.at(r.record_id);
      o.binary = o.cls == FeatureClass::Normal ? BinaryLabel::Normal : BinaryLabel::Abnormal;
      o.explanation = "bench";
      return o;
    };
  }
};

Bench make_bench(int n, std::uint64_t seed) {
  Bench b;
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) {
    CtgRecord rec = test::constant_record();
    rec.record_id = "r" + std::to_string(100 + i);
    const bool abnormal_label = rng.bounded(2) == 1;
    const bool correct = rng.bounded(4) != 0;  // 75% of verdicts agree
    b.labels[rec.record_id] = abnormal_label ? BinaryLabel::Abnormal : BinaryLabel::Normal;
    const bool abnormal_verdict = correct == abnormal_label;
    b.verdicts[rec.record_id] =
        abnormal_verdict ? (rng.bounded(2) ? FeatureClass::Pathological : FeatureClass::Suspicious)
                         : FeatureClass::Normal;
    b.records.push_back(std::move(rec));
  }
  return b;
}

}  // namespace

TEST_CASE("metrics: hand-computed confusion matrices") {
  CHECK(accuracy({20, 5, 20, 5}) == doctest::Approx(0.80).epsilon(1e-12));
  CHECK(f1_score({20, 5, 20, 5}) == doctest::Approx(0.80).epsilon(1e-12));
  CHECK(accuracy({25, 0, 24, 1}) == doctest::Approx(0.98).epsilon(1e-12));
  CHECK(f1_score({25, 0, 24, 1}) == doctest::Approx(50.0 / 51.0).epsilon(1e-12));
}

TEST_CASE("metrics: all-correct verdicts on 10 records give 1.0/1.0") {
  const auto b = make_bench(10, 77);
  Bench perfect = b;
  for (auto& [id, v] : perfect.verdicts)
    v = perfect.labels[id] == BinaryLabel::Abnormal ? FeatureClass::Pathological
                                                    : FeatureClass::Normal;
  const auto report = evaluate(perfect.records, perfect.labels, 1, {}, perfect.runner());
  CHECK(report.per_trial[0].accuracy == doctest::Approx(1.0));
  CHECK(report.per_trial[0].f1 == doctest::Approx(1.0));
}

TEST_CASE("metrics: match the brute-force oracle on random verdict/label vectors") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = make_bench(40, seed);
    const auto report = evaluate(b.records, b.labels, 1, {}, b.runner());
    std::vector<bool> pred, label;
    for (const auto& rec : b.records) {
      pred.push_back(b.verdicts.at(rec.record_id) != FeatureClass::Normal);
      label.push_back(b.labels.at(rec.record_id) == BinaryLabel::Abnormal);
    }
    const auto [acc, f1] = metrics_oracle(pred, label);
    REQUIRE(report.per_trial[0].accuracy == doctest::Approx(acc).epsilon(1e-12));
    REQUIRE(report.per_trial[0].f1 == doctest::Approx(f1).epsilon(1e-12));
  }
}

TEST_CASE("evaluate: five trials are bit-identical with a deterministic runner") {
  const auto b = make_bench(30, 5);
  const auto report = evaluate(b.records, b.labels, 5, {}, b.runner());
  REQUIRE(report.trials == 5);
  REQUIRE(report.per_trial.size() == 5);
  for (const auto& t : report.per_trial) {
    CHECK(t.accuracy == report.per_trial[0].accuracy);
    CHECK(t.f1 == report.per_trial[0].f1);
    REQUIRE(t.records.size() == report.per_trial[0].records.size());
    for (std::size_t i = 0; i < t.records.size(); ++i)
      CHECK(t.records[i].record_id == report.per_trial[0].records[i].record_id);
  }
  CHECK(report.mean_accuracy == report.per_trial[0].accuracy);
  CHECK(report.mean_f1 == report.per_trial[0].f1);
}

TEST_CASE("evaluate: balanced sampling draws half abnormal, half normal") {
  const auto b = make_bench(60, 6);
  SamplerConfig sampler;
  sampler.sample_k = 20;
  sampler.balanced = true;
  sampler.seed = 9;
  const auto report = evaluate(b.records, b.labels, 3, sampler, b.runner());
  for (const auto& t : report.per_trial) {
    REQUIRE(t.records.size() == 20);
    int abnormal = 0;
    for (const auto& r : t.records) abnormal += r.label == BinaryLabel::Abnormal;
    CHECK(abnormal == 10);
  }
}

TEST_CASE("evaluate: sampling is seed-deterministic and varies across trials") {
  const auto b = make_bench(60, 7);
  SamplerConfig sampler;
  sampler.sample_k = 10;
  sampler.seed = 4;
  const auto r1 = evaluate(b.records, b.labels, 2, sampler, b.runner());
  const auto r2 = evaluate(b.records, b.labels, 2, sampler, b.runner());
  for (int t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 10; ++i)
      REQUIRE(r1.per_trial[t].records[i].record_id == r2.per_trial[t].records[i].record_id);
  bool trials_differ = false;
  for (std::size_t i = 0; i < 10; ++i)
    if (r1.per_trial[0].records[i].record_id != r1.per_trial[1].records[i].record_id)
      trials_differ = true;
  CHECK(trials_differ);
}

TEST_CASE("evaluate: missing label raises MissingLabel") {
  auto b = make_bench(5, 8);
  b.labels.erase("r102");
  CHECK_THROWS_AS(evaluate(b.records, b.labels, 1, {}, b.runner()), MissingLabelError);
}

TEST_CASE("evaluate: parallel jobs produce the same report") {
  const auto b = make_bench(25, 9);
  const auto serial = evaluate(b.records, b.labels, 2, {}, b.runner(), 1);
  const auto parallel = evaluate(b.records, b.labels, 2, {}, b.runner(), 4);
  CHECK(report_to_json(serial) == report_to_json(parallel));
}

TEST_CASE("evaluate: runs the real pipeline end to end on synthetic records") {
  std::vector<CtgRecord> records;
  std::map<std::string, BinaryLabel> labels;
  std::map<std::string, BinaryLabel> truth;
  for (std::uint64_t seed = 40; seed < 48; ++seed) {
    auto [rec, gt] = generate(test::sample_scenario(seed));
    labels[rec.record_id] = gt.binary;
    truth[rec.record_id] = gt.binary;
    records.push_back(std::move(rec));
  }
  const auto report = evaluate(records, labels, 2, {});
  REQUIRE(report.n_records == 8);
  CHECK(report.mean_accuracy == doctest::Approx(1.0));  // rules recover the ground truth
  CHECK(report.per_trial[0].accuracy == report.per_trial[1].accuracy);
}

TEST_CASE("report_to_json: field names") {
  const auto b = make_bench(6, 10);
  const auto report = evaluate(b.records, b.labels, 2, {}, b.runner());
  const json doc = report_to_json(report);
  CHECK(doc["n_records"] == 6);
  CHECK(doc["trials"] == 2);
  CHECK(doc.contains("mean_accuracy"));
  CHECK(doc.contains("mean_f1"));
  REQUIRE(doc["per_trial"].size() == 2);
  const auto& trial = doc["per_trial"][0];
  CHECK(trial.contains("accuracy"));
  CHECK(trial.contains("f1"));
  for (const char* k : {"tp", "fp", "tn", "fn"}) CHECK(trial["confusion"].contains(k));
  CHECK(trial["records"].size() == 6);
}
