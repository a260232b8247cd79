#include <doctest.h>

#include <ctg/csv.hpp>
#include <ctg/rng.hpp>
#include <ctg/signal.hpp>

#include "helpers.hpp"

using namespace ctg;
using test::kRate;

namespace {

std::string rows_csv(const std::vector<std::string>& rows,
                     const std::string& header = "t_s,fhr_bpm,uc") {
  std::string out = header + "\n";
  for (const auto& r : rows) out += r + "\n";
  return out;
}

CtgRecord noisy_record(std::uint64_t seed, double duration_s = 1200.0) {
  GaussianRng g(seed);
  CtgRecord rec = test::constant_record(140.0, 10.0, duration_s);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double t = i / kRate;
    rec.fhr[i] = 140.0 + 6.0 * std::sin(2 * M_PI * 4.0 / 60 * t) + g.next(2.0);
    rec.uc[i] = 10.0 + 5.0 * std::sin(2 * M_PI * t / 300.0) + g.next(1.0);
    rec.uc[i] = std::clamp(rec.uc[i], 0.0, 100.0);
  }
  return rec;
}

}  // namespace

TEST_CASE("load_csv: constant 4800-row file loads with zero gaps") {
  test::TempDir dir("load_const");
  std::string body = "t_s,fhr_bpm,uc\n";
  for (int i = 0; i < 4800; ++i)
    body += detail::format_double(i * 0.25) + ",140,10\n";
  test::write_file(dir.path / "r1.csv", body);

  const CtgRecord rec = load_csv(dir.path / "r1.csv");
  CHECK(rec.size() == 4800);
  CHECK(rec.sample_rate_hz == doctest::Approx(4.0));
  CHECK(rec.record_id == "r1");
  for (std::size_t i = 0; i < rec.size(); ++i) {
    REQUIRE(!rec.gap_mask[i]);
    REQUIRE(rec.fhr[i] == 140.0);
  }
}

TEST_CASE("load_csv: gap-mask rules on a hand-written fixture") {
  test::TempDir dir("load_gaps");
  // 10 rows: zero, non-numeric, empty, below-range, above-range FHR are gaps;
  // UC gaps too; UC out-of-range clamps without masking.
  test::write_file(dir.path / "g.csv", rows_csv({
                                           "0,140,10",
                                           "0.25,0,10",      // fhr zero -> gap
                                           "0.5,abc,10",     // fhr non-numeric -> gap
                                           "0.75,,10",       // fhr absent -> gap
                                           "1,20,10",        // fhr below 30 -> gap
                                           "1.25,260,10",    // fhr above 250 -> gap
                                           "1.5,141,",       // uc absent -> gap
                                           "1.75,142,xyz",   // uc non-numeric -> gap
                                           "2,143,150",      // uc clamps to 100
                                           "2.25,144,10",
                                       }));
  const CtgRecord rec = load_csv(dir.path / "g.csv");
  REQUIRE(rec.size() == 10);
  const std::vector<bool> expect_gap = {false, true, true, true, true, true, true, true, false, false};
  for (std::size_t i = 0; i < 10; ++i) CHECK(rec.gap_mask[i] == expect_gap[i]);
  CHECK(rec.uc[8] == 100.0);
  CHECK(rec.fhr[1] == 0.0);  // canonical sentinel at gaps
}

TEST_CASE("load_csv: error cases") {
  test::TempDir dir("load_err");
  CHECK_THROWS_AS(load_csv(dir.path / "missing.csv"), FileNotFoundError);

  test::write_file(dir.path / "short_row.csv", rows_csv({"0,140,10", "0.25,141"}));
  CHECK_THROWS_AS(load_csv(dir.path / "short_row.csv"), LengthMismatchError);

  test::write_file(dir.path / "empty.csv", "t_s,fhr_bpm,uc\n");
  CHECK_THROWS_AS(load_csv(dir.path / "empty.csv"), EmptyRecordError);

  test::write_file(dir.path / "no_fhr.csv", "t_s,heart,uc\n0,140,10\n");
  CHECK_THROWS_AS(load_csv(dir.path / "no_fhr.csv"), MalformedRowError);

  test::write_file(dir.path / "bad_time.csv", rows_csv({"0,140,10", "x,141,10"}));
  CHECK_THROWS_AS(load_csv(dir.path / "bad_time.csv"), MalformedRowError);
}

TEST_CASE("load_csv: header without time column uses the default rate") {
  test::TempDir dir("load_no_t");
  test::write_file(dir.path / "nt.csv", rows_csv({"140,10", "141,12"}, "fhr_bpm,uc"));
  const CtgRecord rec = load_csv(dir.path / "nt.csv");
  CHECK(rec.sample_rate_hz == doctest::Approx(4.0));
  CHECK(rec.size() == 2);
}

TEST_CASE("csv round trip: load-save-load is identity, second save is byte-stable") {
  test::TempDir dir("roundtrip");
  CtgRecord rec = noisy_record(11);
  rec.gap_mask[100] = true;
  for (std::size_t i = 2000; i < 2200; ++i) rec.gap_mask[i] = true;  // 50 s gap
  rec.fhr[100] = 0.0;
  for (std::size_t i = 2000; i < 2200; ++i) rec.fhr[i] = 0.0;
  rec.record_id = "a";

  save_csv(rec, dir.path / "a.csv");
  const CtgRecord once = load_csv(dir.path / "a.csv");
  save_csv(once, dir.path / "b.csv");
  const CtgRecord twice = load_csv(dir.path / "b.csv");

  REQUIRE(once.size() == twice.size());
  CHECK(once.sample_rate_hz == twice.sample_rate_hz);
  for (std::size_t i = 0; i < once.size(); ++i) {
    REQUIRE(once.gap_mask[i] == twice.gap_mask[i]);
    REQUIRE(once.fhr[i] == twice.fhr[i]);
    REQUIRE(once.uc[i] == twice.uc[i]);
  }
  CHECK(test::read_file(dir.path / "a.csv") == test::read_file(dir.path / "b.csv"));
}

TEST_CASE("preprocess: single missing sample interpolates to the midpoint") {
  CtgRecord rec = test::constant_record(140.0);
  rec.fhr[1000] = 0.0;
  rec.gap_mask[1000] = true;
  rec.fhr[999] = 140.0;
  rec.fhr[1001] = 142.0;
  // surround with a gentle step so the interpolated value is the midpoint
  for (std::size_t i = 1001; i < rec.size(); ++i) rec.fhr[i] = 142.0;

  const auto [fhr, uc] = preprocess(rec);
  CHECK(fhr.valid[1000]);
  CHECK(fhr.values[1000] == doctest::Approx(141.0));
}

TEST_CASE("preprocess: a 60 s gap stays invalid with max_gap_s 15") {
  CtgRecord rec = test::constant_record(140.0);
  for (std::size_t i = 1000; i < 1240; ++i) {
    rec.gap_mask[i] = true;
    rec.fhr[i] = 0.0;
  }
  const auto [fhr, uc] = preprocess(rec);
  for (std::size_t i = 1000; i < 1240; ++i) REQUIRE(!fhr.valid[i]);
  CHECK(fhr.valid[999]);
  CHECK(fhr.valid[1240]);
}

TEST_CASE("preprocess: single-sample 40 bpm spike is removed by the median filter") {
  // By hand on an 11-sample window: the spike is one outlier among 11, so the
  // median equals the surrounding level at every position.
  CtgRecord rec = test::constant_record(140.0);
  rec.fhr[2000] = 180.0;
  const auto [fhr, uc] = preprocess(rec);
  for (std::size_t i = 1990; i < 2010; ++i) CHECK(fhr.values[i] == doctest::Approx(140.0));
}

TEST_CASE("preprocess: rejects records shorter than 10 minutes") {
  const CtgRecord rec = test::constant_record(140.0, 10.0, 599.0);
  CHECK_THROWS_AS(preprocess(rec), TooShortError);
}

TEST_CASE("preprocess: idempotent on noisy gapped records") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    CtgRecord rec = noisy_record(seed);
    // a short (interpolatable) and a long (masked) gap
    for (std::size_t i = 300; i < 340; ++i) { rec.gap_mask[i] = true; rec.fhr[i] = 0.0; }
    for (std::size_t i = 3000; i < 3400; ++i) { rec.gap_mask[i] = true; rec.fhr[i] = 0.0; }

    const auto [fhr1, uc1] = preprocess(rec);
    CtgRecord rec2;
    rec2.record_id = rec.record_id;
    rec2.sample_rate_hz = rec.sample_rate_hz;
    rec2.fhr = fhr1.values;
    rec2.uc = uc1.values;
    rec2.gap_mask.resize(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) rec2.gap_mask[i] = !fhr1.valid[i];
    // invalid stretches keep raw values; restore the in-range sentinel so the
    // record revalidates
    for (std::size_t i = 0; i < rec.size(); ++i)
      if (rec2.gap_mask[i]) rec2.fhr[i] = 0.0;

    const auto [fhr2, uc2] = preprocess(rec2);
    REQUIRE(fhr1.size() == fhr2.size());
    for (std::size_t i = 0; i < fhr1.size(); ++i) {
      REQUIRE(fhr1.valid[i] == fhr2.valid[i]);
      if (fhr1.valid[i]) {
        REQUIRE(fhr1.values[i] == fhr2.values[i]);
        REQUIRE(uc1.values[i] == uc2.values[i]);
      }
    }
  }
}

TEST_CASE("one median pass stays inside the min/max of its input window") {
  GaussianRng g(77);
  std::vector<double> raw(2000);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = 140.0 + g.next(10.0);
  std::vector<double> filtered = raw;
  const int half = 5;  // 11-sample window
  detail::median_filter_run(filtered, 0, filtered.size(), half, /*max_passes=*/1);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double lo = 1e300, hi = -1e300;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
         j <= std::min<std::ptrdiff_t>(raw.size() - 1, i + half); ++j) {
      lo = std::min(lo, raw[static_cast<std::size_t>(j)]);
      hi = std::max(hi, raw[static_cast<std::size_t>(j)]);
    }
    REQUIRE(filtered[i] >= lo);
    REQUIRE(filtered[i] <= hi);
  }
}

TEST_CASE("full preprocess never leaves the global value range") {
  const CtgRecord rec = noisy_record(42);
  double lo = 1e300, hi = -1e300;
  for (double v : rec.fhr) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const auto [fhr, uc] = preprocess(rec);
  for (std::size_t i = 0; i < fhr.size(); ++i) {
    REQUIRE(fhr.values[i] >= lo);
    REQUIRE(fhr.values[i] <= hi);
  }
}

TEST_CASE("record validation rejects mismatched lengths") {
  CtgRecord rec = test::constant_record();
  rec.uc.pop_back();
  CHECK_THROWS_AS(rec.validate(), LengthMismatchError);
}
