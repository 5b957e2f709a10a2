#pragma once

// Seeded two-arm simulations: the sequential A/B test against stopping when
// per-arm confidence sequences separate, and the null rejection check.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <thread>
#include <vector>

#include "qcs/boundaries.hpp"
#include "qcs/confseq.hpp"
#include "qcs/distributions.hpp"
#include "qcs/errors.hpp"
#include "qcs/seqtest.hpp"

namespace qcs {

struct AbSimConfig {
  Scenario scenario = Scenario::uniform_shift;
  double pi = 0.5;
  double eps = 0.025;
  double alpha = 0.05;
  double tune_m = 32.0;
  int runs = 32;
  std::uint64_t seed = 0;
  std::int64_t max_per_arm = 1'000'000;
  unsigned threads = 0;

  void validate() const {
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must lie in (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (max_per_arm < 1) throw ConfigError("max_per_arm must be positive");
  }

  // r for the test at level alpha, and for each arm's interval at alpha / 2
  double test_r() const { return tune_r(tune_m, pi, alpha); }
  double naive_r() const { return tune_r(tune_m, pi, alpha / 2.0); }
};

struct AbSimRun {
  std::int64_t test_T = 0;  // total samples over both arms
  std::int64_t naive_T = 0;
  bool test_capped = false;
  bool naive_capped = false;

  bool operator==(const AbSimRun&) const = default;
};

struct AbSimSummary {
  std::vector<AbSimRun> runs;
  double mean_test_T = 0.0;
  double mean_naive_T = 0.0;
  int test_capped = 0;
  int naive_capped = 0;
};

namespace detail {

template <class F>
void parallel_runs(int runs, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
  if (threads <= 1) {
    body(0u, 1u);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back([&, w] { body(w, threads); });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Arms 0 and 1 are the first standard arm and the exceptional arm of the
// scenario. Both are sampled once per round, arm 0 first.
inline AbSimRun ab_sim_run(const AbSimConfig& cfg, std::uint64_t run_seed, std::shared_ptr<ArgminTable> table,
                           const RadiusFn& naive_radius) {
  const std::vector<ArmSpec> arms = make_scenario(cfg.scenario, cfg.pi, cfg.eps, 2);
  Rng rng(run_seed);
  AbTestState test(cfg.pi, cfg.test_r(), 0.0, cfg.alpha, std::move(table));
  FixedQuantileCS<double> cs0(cfg.pi, naive_radius);
  FixedQuantileCS<double> cs1(cfg.pi, naive_radius);
  AbSimRun out;
  bool test_done = false;
  bool naive_done = false;
  for (std::int64_t n = 1; n <= cfg.max_per_arm && !(test_done && naive_done); ++n) {
    const double x0 = arms[0].sample(rng);
    const double x1 = arms[1].sample(rng);
    if (!test_done) {
      test.insert(0, x0);
      test.insert(1, x1);
      if (test.two_sided().reject) {
        test_done = true;
        out.test_T = 2 * n;
      }
    }
    if (!naive_done) {
      cs0.insert(x0);
      cs1.insert(x1);
      const Bounds<double> b0 = cs0.bounds();
      const Bounds<double> b1 = cs1.bounds();
      if (b0.upper < b1.lower || b1.upper < b0.lower) {
        naive_done = true;
        out.naive_T = 2 * n;
      }
    }
  }
  if (!test_done) {
    out.test_capped = true;
    out.test_T = 2 * cfg.max_per_arm;
  }
  if (!naive_done) {
    out.naive_capped = true;
    out.naive_T = 2 * cfg.max_per_arm;
  }
  return out;
}

inline AbSimSummary ab_simulation(const AbSimConfig& cfg) {
  cfg.validate();
  AbSimSummary s;
  s.runs.resize(static_cast<std::size_t>(cfg.runs));
  const double test_r = cfg.test_r();
  const BetaBinomial naive{cfg.naive_r(), cfg.alpha / 2.0};
  detail::parallel_runs(cfg.runs, cfg.threads, [&](unsigned w, unsigned stride) {
    auto table = std::make_shared<ArgminTable>(cfg.pi, test_r);
    const RadiusFn radius = lazy_radius(naive);
    for (int i = static_cast<int>(w); i < cfg.runs; i += static_cast<int>(stride)) {
      s.runs[static_cast<std::size_t>(i)] =
          ab_sim_run(cfg, mix_seed(cfg.seed, static_cast<std::uint64_t>(i)), table, radius);
    }
  });
  for (const AbSimRun& r : s.runs) {
    s.mean_test_T += static_cast<double>(r.test_T) / cfg.runs;
    s.mean_naive_T += static_cast<double>(r.naive_T) / cfg.runs;
    s.test_capped += r.test_capped;
    s.naive_capped += r.naive_capped;
  }
  return s;
}

// Under identical arms, the first per-arm count at which the two-sided test
// rejects, or 0 if it never does up to `horizon`. Rejections are checked
// after every observation.
struct NullSimConfig {
  ArmSpec arm = ArmSpec::uniform(0.0, 1.0);
  double p = 0.5;
  double r = 0.758;
  double alpha = 0.05;
  std::int64_t horizon = 2000;
  int runs = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

inline std::vector<std::int64_t> null_first_rejections(const NullSimConfig& cfg) {
  if (cfg.runs < 1 || cfg.horizon < 1) throw ConfigError("runs and horizon must be positive");
  std::vector<std::int64_t> first(static_cast<std::size_t>(cfg.runs), 0);
  detail::parallel_runs(cfg.runs, cfg.threads, [&](unsigned w, unsigned stride) {
    auto table = std::make_shared<ArgminTable>(cfg.p, cfg.r);
    for (int i = static_cast<int>(w); i < cfg.runs; i += static_cast<int>(stride)) {
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      AbTestState st(cfg.p, cfg.r, 0.0, cfg.alpha, table);
      for (std::int64_t n = 1; n <= cfg.horizon; ++n) {
        st.insert(0, cfg.arm.sample(rng));
        if (n > 1 && st.two_sided().reject) {
          first[static_cast<std::size_t>(i)] = n;
          break;
        }
        st.insert(1, cfg.arm.sample(rng));
        if (st.two_sided().reject) {
          first[static_cast<std::size_t>(i)] = n;
          break;
        }
      }
    }
  });
  return first;
}

}  // namespace qcs
