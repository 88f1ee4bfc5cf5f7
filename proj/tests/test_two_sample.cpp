#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eqg/stats.hpp"
#include "eqg/two_sample.hpp"

using namespace eqg;

namespace {

TwoSampleConfig quick_cfg(int epochs = 60) {
  TwoSampleConfig cfg;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("generators produce the advertised pairings") {
  PairedSample s = gen_shift(500, 1, 0.1);
  REQUIRE(s.n() == 500);
  REQUIRE(s.dim() == 2);
  for (int i = 0; i < s.n(); ++i) {
    CHECK(s.x2.at(i, 0) - s.x1.at(i, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.x2.at(i, 1) == s.x1.at(i, 1));
  }

  PairedSample r = gen_rotation(500, 1, M_PI / 2.0);
  for (int i = 0; i < r.n(); ++i) {
    // quarter turn: (a, b) -> (-b, a), norms preserved
    CHECK(r.x2.at(i, 0) == doctest::Approx(-r.x1.at(i, 1)).epsilon(1e-12));
    CHECK(r.x2.at(i, 1) == doctest::Approx(r.x1.at(i, 0)).epsilon(1e-12));
  }

  PairedSample a = gen_shift(100, 5, 0.1);
  PairedSample b = gen_shift(100, 5, 0.1);
  CHECK(a.x1.v == b.x1.v);
}

TEST_CASE("p_value_from_accuracy frozen values") {
  CHECK(p_value_from_accuracy(0.5, 100) == doctest::Approx(0.5).epsilon(1e-12));
  // acc 0.55 with n=100: z = 0.05 * 2 * 10 = 1
  CHECK(p_value_from_accuracy(0.55, 100) ==
        doctest::Approx(0.15865525393145707).epsilon(1e-9));
  CHECK(p_value_from_accuracy(0.45, 100) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-9));
  // larger test sets sharpen the same accuracy into a smaller p
  CHECK(p_value_from_accuracy(0.55, 10000) < p_value_from_accuracy(0.55, 100));
}

TEST_CASE("paired t-test on a pure shift is degenerate and certain") {
  // the per-pair difference is the constant (-eps, 0): zero variance, p = 0
  PairedSample s = gen_shift(600, 2, 0.1);
  TwoSampleResult r = run_paired_ttest_adapted(s, quick_cfg(), 2);
  CHECK(r.zero_variance);
  CHECK(r.p_value == 0.0);
}

TEST_CASE("paired t-test on identical samples reports nothing to detect") {
  PairedSample s = gen_shift(600, 3, 0.0);
  TwoSampleResult r = run_paired_ttest_adapted(s, quick_cfg(), 3);
  CHECK(r.zero_variance);
  CHECK(r.p_value == 1.0);
  CHECK(r.t_statistic == 0.0);
}

TEST_CASE("paired t-test does not reject a quarter turn") {
  // differences are symmetric about the origin: projected mean stays near 0
  PairedSample s = gen_rotation(4000, 4);
  TwoSampleResult r = run_paired_ttest_adapted(s, quick_cfg(200), 4);
  CHECK(!r.zero_variance);
  CHECK(r.p_value > 0.01);
}

TEST_CASE("permutation test detects both the shift and the rotation") {
  TwoSampleConfig cfg = quick_cfg(200);
  TwoSampleResult shift = run_permutation_test(gen_shift(4000, 5), cfg, 5);
  CHECK(shift.p_value < 0.01);
  TwoSampleResult rot = run_permutation_test(gen_rotation(4000, 5), cfg, 5);
  CHECK(rot.p_value < 0.01);
  CHECK(rot.test_accuracy > 0.9);  // the swapped pair is perfectly recognizable
}

TEST_CASE("permutation test is near chance on identical samples") {
  TwoSampleResult r = run_permutation_test(gen_shift(2000, 6, 0.0), quick_cfg(100), 6);
  CHECK(r.test_accuracy > 0.4);
  CHECK(r.test_accuracy < 0.6);
  CHECK(r.p_value > 0.01);
}

TEST_CASE("c2st stays near chance on identical samples") {
  TwoSampleResult r = run_c2st(gen_shift(2000, 7, 0.0), quick_cfg(100), 7);
  CHECK(r.test_accuracy > 0.4);
  CHECK(r.test_accuracy < 0.6);
}

TEST_CASE("adapted t-test finds a large-separation shift") {
  // eps = 1 is far beyond the detection threshold of a projected t
  TwoSampleResult r = run_ttest_adapted(gen_shift(2000, 8, 1.0), quick_cfg(200), 8);
  CHECK(std::abs(r.t_statistic) > 5.0);
  CHECK(r.p_value < 1e-6);
}

TEST_CASE("two-sample results are seed-deterministic") {
  TwoSampleConfig cfg = quick_cfg(40);
  PairedSample s = gen_shift(1000, 9);
  TwoSampleResult a = run_permutation_test(s, cfg, 9);
  TwoSampleResult b = run_permutation_test(s, cfg, 9);
  CHECK(a.test_accuracy == b.test_accuracy);
  CHECK(a.p_value == b.p_value);
  TwoSampleResult c = run_ttest_adapted(s, cfg, 9);
  TwoSampleResult d = run_ttest_adapted(s, cfg, 9);
  CHECK(c.t_statistic == d.t_statistic);
}

TEST_CASE("null p-values are not anti-conservative across seeds") {
  // identical samples: reject-at-0.01 should be rare; with 12 seeds expect 0
  TwoSampleConfig cfg = quick_cfg(40);
  int rejections = 0;
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    PairedSample s = gen_shift(800, 100 + seed, 0.0);
    if (run_permutation_test(s, cfg, seed).p_value < 0.01) ++rejections;
    if (run_c2st(s, cfg, seed).p_value < 0.01) ++rejections;
  }
  CHECK(rejections == 0);
}

TEST_CASE("synthetic table layout") {
  SyntheticTable t;
  t.p[0][0] = 0.25;
  std::string csv = t.to_csv();
  CHECK(csv.find("test,shift,rotation") == 0);
  CHECK(csv.find("t-test,0.25,0") != std::string::npos);
  CHECK(std::string(SyntheticTable::row_name(3)) == "permutation");
}

TEST_CASE("split guard rejects degenerate sizes") {
  PairedSample s = gen_shift(1, 1);
  CHECK_THROWS_AS(run_c2st(s, quick_cfg(), 1), std::invalid_argument);
}
