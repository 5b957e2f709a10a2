#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "brute_force.hpp"
#include "qcs/distributions.hpp"
#include "qcs/seqtest.hpp"
#include "qcs/simulate.hpp"
#include "reference_values.hpp"

using namespace qcs;

namespace {

Sample sample_of(const std::vector<double>& v) {
  Sample s;
  for (double x : v) s.insert(x);
  return s;
}

std::vector<double> random_arm(Rng& rng, int n, bool ties) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(ties ? std::floor(rng.uniform() * 12.0) * 0.25 : rng.normal());
  return v;
}

}  // namespace

TEST(GEvaluator, SpotValuesOnOneToTwenty) {
  std::vector<double> v;
  for (int i = 1; i <= 20; ++i) v.push_back(i);
  const Sample s = sample_of(v);
  const GEvaluator g(s, 0.5, 0.758);
  EXPECT_NEAR(g.plus(11.0), ref::g_plus_1to20_at11, 1e-10);
  EXPECT_NEAR(g.minus(11.0), ref::g_minus_1to20_at11, 1e-10);
}

TEST(GEvaluator, MatchesBruteForce) {
  Rng rng(31);
  for (int inst = 0; inst < 100; ++inst) {
    const auto v = random_arm(rng, 1 + static_cast<int>(rng.uniform() * 40), inst % 2 == 0);
    const Sample s = sample_of(v);
    const double p = 0.1 + 0.8 * rng.uniform();
    const GEvaluator g(s, p, 0.6);
    for (double x : {-3.0, -0.5, 0.0, 0.25, 1.0, 1.3, 2.5, 4.0}) {
      ASSERT_NEAR(g.two_sided(x), brute::g_two(v, x, p, 0.6), 1e-9);
      ASSERT_NEAR(g.plus(x), brute::g_plus(v, x, p, 0.6), 1e-12);
      ASSERT_NEAR(g.minus(x), brute::g_minus(v, x, p, 0.6), 1e-12);
    }
  }
}

TEST(GEvaluator, OneSidedMonotoneInX) {
  Rng rng(5);
  const auto v = random_arm(rng, 60, true);
  const Sample s = sample_of(v);
  const GEvaluator g(s, 0.3, 0.5);
  double prev_plus = -kInf;
  double prev_minus = kInf;
  for (double x = -1.0; x <= 4.0; x += 0.125) {
    ASSERT_GE(g.plus(x), prev_plus);
    ASSERT_LE(g.minus(x), prev_minus);
    prev_plus = g.plus(x);
    prev_minus = g.minus(x);
  }
}

TEST(AbStatistics, MatchBruteForceOn200Instances) {
  Rng rng(2718);
  for (int inst = 0; inst < 200; ++inst) {
    const bool ties = inst % 2 == 0;
    const auto a = random_arm(rng, 1 + static_cast<int>(rng.uniform() * 50), ties);
    const auto b = random_arm(rng, 1 + static_cast<int>(rng.uniform() * 50), ties);
    const double p = 0.05 + 0.9 * rng.uniform();
    const double r = 0.2 + rng.uniform();
    const double shift = ties ? std::floor(rng.uniform() * 9.0 - 4.0) * 0.25 : rng.normal();
    const Sample sa = sample_of(a);
    const Sample sb = sample_of(b);
    const GEvaluator ga(sa, p, r);
    const GEvaluator gb(sb, p, r);
    ASSERT_NEAR(two_sided_stat(ga, gb, shift), brute::two_sided(a, b, p, r, shift), 1e-9) << "instance " << inst;
    ASSERT_NEAR(one_sided_stat(ga, gb, shift), brute::one_sided(a, b, p, r, shift), 1e-9) << "instance " << inst;
  }
}

TEST(AbStatistics, TwoSidedSymmetricUnderSwap) {
  Rng rng(12);
  for (int inst = 0; inst < 50; ++inst) {
    const Sample a = sample_of(random_arm(rng, 25, inst % 2 == 0));
    const Sample b = sample_of(random_arm(rng, 35, inst % 2 == 0));
    const double shift = 0.25 * (inst % 5 - 2);
    EXPECT_NEAR(two_sided_stat(GEvaluator(a, 0.5, 0.758), GEvaluator(b, 0.5, 0.758), shift),
                two_sided_stat(GEvaluator(b, 0.5, 0.758), GEvaluator(a, 0.5, 0.758), -shift), 1e-12);
  }
}

TEST(AbStatistics, ShiftEquivariance) {
  Rng rng(99);
  const auto a = random_arm(rng, 40, true);
  auto b = random_arm(rng, 40, true);
  const Sample sa = sample_of(a);
  const double base = two_sided_stat(GEvaluator(sa, 0.5, 0.758), GEvaluator(sample_of(b), 0.5, 0.758), 0.0);
  for (double& x : b) x += 2.0;
  EXPECT_NEAR(two_sided_stat(GEvaluator(sa, 0.5, 0.758), GEvaluator(sample_of(b), 0.5, 0.758), 2.0), base, 1e-12);
}

TEST(AbTestState, RejectsClearDifference) {
  AbTestState st(0.5, 0.758);
  Rng rng(3);
  EXPECT_THROW(st.two_sided(), StateError);
  TestResult res{};
  for (int n = 0; n < 400 && !res.reject; ++n) {
    st.insert(0, rng.uniform());
    st.insert(1, 0.5 + rng.uniform());
    res = st.two_sided();
  }
  EXPECT_TRUE(res.reject);
  EXPECT_LE(res.pvalue, 0.05);
  EXPECT_NEAR(res.pvalue, std::exp(-res.stat), 1e-15);
}

TEST(AbTestState, SharedTableMustMatch) {
  auto table = std::make_shared<ArgminTable>(0.5, 0.758);
  EXPECT_THROW(AbTestState(0.4, 0.758, 0.0, 0.05, table), ConfigError);
  EXPECT_THROW(AbTestState(0.5, 0.758).insert(2, 1.0), DomainError);
}

TEST(AbTestState, TableMatchesDirectArgmin) {
  ArgminTable table(0.3, 0.5);
  for (std::int64_t n : {1, 2, 17, 400}) EXPECT_EQ(table.at(n), GEvaluator::argmin_level(0.3, 0.5, n));
}

// Identical arms: the chance of ever rejecting must stay below alpha.
TEST(NullMonteCarlo, TypeOneErrorUniformArms) {
  NullSimConfig cfg;
  cfg.runs = 1000;
  cfg.horizon = 2000;
  cfg.seed = 404;
  const auto first = null_first_rejections(cfg);
  int rejected = 0;
  for (auto n : first) rejected += n > 0;
  const double rate = static_cast<double>(rejected) / cfg.runs;
  RecordProperty("reject_rate", std::to_string(rate));
  EXPECT_LE(rate, 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / cfg.runs));
}

TEST(GlobalNull, OneTreatmentEqualsOneSided) {
  Rng rng(6);
  const Sample c = sample_of(random_arm(rng, 30, false));
  const Sample t = sample_of(random_arm(rng, 45, false));
  const double direct = one_sided_stat(GEvaluator(c, 0.5, 0.758), GEvaluator(t, 0.5, 0.758), 0.0);
  const std::vector<Sample> one = {t};
  EXPECT_DOUBLE_EQ(global_null_stat(c, one, 0.5, 0.758), direct);
  EXPECT_DOUBLE_EQ(global_null_pvalue(c, one, 0.5, 0.758), std::min(1.0, std::exp(-direct)));
  EXPECT_THROW(global_null_stat(c, {}, 0.5, 0.758), DomainError);
}

TEST(GlobalNull, PvalueScalesWithArms) {
  Rng rng(7);
  const Sample c = sample_of(random_arm(rng, 200, false));
  std::vector<Sample> ts;
  for (int k = 0; k < 3; ++k) {
    auto v = random_arm(rng, 200, false);
    for (double& x : v) x += 1.5;
    ts.push_back(sample_of(v));
  }
  const double stat = global_null_stat(c, ts, 0.5, 0.758);
  EXPECT_NEAR(global_null_pvalue(c, ts, 0.5, 0.758), std::min(1.0, 3.0 * std::exp(-stat)), 1e-15);
  EXPECT_GT(stat, std::log(3.0 / 0.05));
}

TEST(Ks, OneSampleExample) {
  const Sample s = sample_of({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(ks_one_sample_stat(s, [](double x) { return std::clamp(x / 4.0, 0.0, 1.0); }), 0.25);
}

TEST(Ks, IdenticalSamplesGiveZero) {
  const Sample s = sample_of({3, 1, 4, 1, 5, 9, 2, 6});
  EXPECT_EQ(ks_two_sample_stat(s, s), 0.0);
  EXPECT_EQ(ks_dominance_stat(s, s), 0.0);
}

TEST(Ks, TwoSampleAgainstSortedOracle) {
  Rng rng(21);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>(rng.uniform() * 30);
    const auto a = random_arm(rng, n, true);
    const auto b = random_arm(rng, n, true);
    double two = 0.0;
    double dom = 0.0;
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    for (double x : all) {
      const double d = (brute::count(a, x).upto - brute::count(b, x).upto) / n;
      two = std::max(two, std::fabs(d));
      dom = std::max(dom, d);
    }
    ASSERT_NEAR(ks_two_sample_stat(sample_of(a), sample_of(b)), two, 1e-15);
    ASSERT_NEAR(ks_dominance_stat(sample_of(a), sample_of(b)), dom, 1e-15);
  }
}

TEST(Ks, PairingAndModeErrors) {
  EXPECT_THROW(ks_two_sample_stat(sample_of({1, 2}), sample_of({1})), PairingError);
  EXPECT_THROW(KsTestState(KsMode::one_sample), ConfigError);
  KsTestState one(KsMode::one_sample, 0.85, 0.05, 1.0, [](double x) { return x; });
  EXPECT_THROW(one.insert_y(1.0), StateError);
}

TEST(Ks, ThresholdDecreasesAndDetectsShift) {
  KsTestState st(KsMode::two_sample);
  EXPECT_NEAR(st.c_add(), lil_C(0.85, 0.025), 1e-12);
  double prev = kInf;
  for (std::int64_t t = 10; t <= 100000; t *= 10) {
    const double b = ks_boundary(t, 0.85, st.c_add(), 1.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
  Rng rng(13);
  KsResult res{};
  for (int n = 0; n < 5000 && !res.reject; ++n) {
    st.insert_x(rng.uniform());
    st.insert_y(0.5 + rng.uniform());
    res = st.evaluate();
  }
  EXPECT_TRUE(res.reject);
}

TEST(Ks, DominanceDirection) {
  Rng rng(17);
  KsTestState wrong(KsMode::dominance);
  KsTestState right(KsMode::dominance);
  bool wrong_rejected = false;
  bool right_rejected = false;
  for (int n = 0; n < 3000; ++n) {
    const double lo = rng.uniform();
    const double hi = 0.5 + rng.uniform();
    wrong.insert_x(lo);
    wrong.insert_y(hi);
    right.insert_x(hi);
    right.insert_y(lo);
    wrong_rejected = wrong_rejected || wrong.evaluate().reject;
    right_rejected = right_rejected || right.evaluate().reject;
  }
  EXPECT_TRUE(wrong_rejected);
  EXPECT_FALSE(right_rejected);
}
