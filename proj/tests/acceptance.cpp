// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "cli.hpp"
#include "golden_cases.hpp"
#include "qcs/qcs.hpp"

using namespace qcs;
using X = Extended<double>;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

template <class F>
void criterion(int id, const char* name, double max_seconds, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (max_seconds > 0.0 && secs > max_seconds) {
    v.pass = false;
    v.detail += fmt("; slower than %.0f s", max_seconds);
  }
  if (!v.pass) ++failures;
  std::printf("%s %2d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
}

Verdict constants() {
  const double c = lil_C(0.85, 0.05);
  const double closed = lil_C_closed_form(0.05);
  return {c >= 8.02 && c <= 8.22 && closed >= 8.29 && closed <= 8.32,
          fmt("lil_C=%.5f in [8.02,8.22], closed form=%.5f in [8.29,8.32]", c, closed)};
}

Verdict tuning() {
  const double half = tune_r(32, 0.5, 0.05);
  const double tail = tune_r(32, 0.05, 0.05);
  return {std::fabs(half - 0.758) <= 0.001 && std::fabs(tail - 0.145) <= 0.001,
          fmt("r(0.5)=%.6f vs 0.758, r(0.05)=%.6f vs 0.145, tol 0.001", half, tail)};
}

Verdict baselines() {
  const double dkw = std::sqrt(1000.0) * baseline_radius(BaselineKind::dkw_fixed, 1000, 0.5, 0.05);
  const double k = DoubleStitchConfig::standard(0.05).additive_constant();
  return {std::fabs(dkw - 1.358) <= 0.001 && std::fabs(k - 72.0) <= 0.3,
          fmt("sqrt(t)*dkw=%.5f vs 1.358 +- 0.001, double-stitch constant=%.3f vs 72 +- 0.3", dkw, k)};
}

// Ever-miscoverage over uniform streams, one radius function per level.
Verdict coverage() {
  const double alpha = 0.05;
  const int streams = 2000;
  const std::int64_t horizon = 10000;
  const double tol = alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / streams);
  const std::vector<double> ps = {0.1, 0.5, 0.9};
  bool pass = true;
  std::string detail;
  for (const char* method : {"stitched", "beta_binomial"}) {
    std::vector<RadiusFn> radius;
    for (double p : ps) {
      const FixedMethod m = std::string(method) == "stitched"
                                ? FixedMethod(SimpleStitch{alpha})
                                : FixedMethod(BetaBinomial{tune_r(32, p, alpha), alpha});
      radius.push_back(tabulated_radius(m, {p, 1.0 - p}, horizon));
    }
    std::vector<int> misses(ps.size(), 0);
    for (int s = 0; s < streams; ++s) {
      Rng rng(mix_seed(4004, static_cast<std::uint64_t>(s)));
      std::vector<FixedQuantileCS<double>> cs;
      for (std::size_t j = 0; j < ps.size(); ++j) cs.emplace_back(ps[j], radius[j]);
      std::vector<bool> missed(ps.size(), false);
      for (std::int64_t t = 1; t <= horizon; ++t) {
        const double x = rng.uniform();
        for (std::size_t j = 0; j < ps.size(); ++j) {
          cs[j].insert(x);
          if (missed[j]) continue;
          const Bounds<double> b = cs[j].bounds();
          missed[j] = b.lower > X(ps[j]) || b.upper < X(ps[j]);
        }
      }
      for (std::size_t j = 0; j < ps.size(); ++j) misses[j] += missed[j];
    }
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const double rate = static_cast<double>(misses[j]) / streams;
      pass = pass && rate <= tol;
      detail += fmt("%s p=%.1f: %.4f; ", method, ps[j], rate);
    }
  }
  return {pass, detail + fmt("limit %.4f", tol)};
}

Verdict oracles() {
  std::mt19937_64 gen(55);
  Rng rng(2718);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const bool ties = inst % 2 == 0;
    const auto draw = [&](int n) {
      std::vector<double> v;
      for (int i = 0; i < n; ++i) v.push_back(ties ? std::floor(rng.uniform() * 12.0) * 0.25 : rng.normal());
      return v;
    };
    const auto a = draw(1 + static_cast<int>(rng.uniform() * 50));
    const auto b = draw(1 + static_cast<int>(rng.uniform() * 50));
    const double p = 0.05 + 0.9 * rng.uniform();
    const double r = 0.2 + rng.uniform();
    const double shift = ties ? std::floor(rng.uniform() * 9.0 - 4.0) * 0.25 : rng.normal();
    Sample sa;
    Sample sb;
    for (double x : a) sa.insert(x);
    for (double x : b) sb.insert(x);
    const GEvaluator ga(sa, p, r);
    const GEvaluator gb(sb, p, r);
    worst = std::max(worst, std::fabs(two_sided_stat(ga, gb, shift) - brute::two_sided(a, b, p, r, shift)));
    worst = std::max(worst, std::fabs(one_sided_stat(ga, gb, shift) - brute::one_sided(a, b, p, r, shift)));
  }
  int empdist_bad = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const int t = 1 + static_cast<int>(gen() % 1000);
    const int levels = 1 + static_cast<int>(gen() % 50);
    Sample m;
    std::vector<double> v;
    for (int i = 0; i < t; ++i) {
      const double x = static_cast<double>(gen() % levels) / 4.0;
      m.insert(x);
      v.push_back(x);
    }
    std::sort(v.begin(), v.end());
    const auto stat = [&](std::int64_t k) { return k < 1 ? X::neg_inf() : k > t ? X::pos_inf() : X(v[k - 1]); };
    bool ok = m.sorted_values() == v;
    for (int k = 0; k <= t; ++k) {
      const double p = static_cast<double>(k) / t;
      ok = ok && m.order_stat(k) == stat(k) && m.upper_quantile(p) == stat(k + 1) && m.lower_quantile(p) == stat(k);
    }
    for (int j = -1; j <= levels; ++j) {
      const double x = j / 4.0 + (j % 2 ? 0.125 : 0.0);
      const double f = static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) / t;
      const double fm = static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin()) / t;
      ok = ok && m.cdf_at(x).f == f && m.cdf_at(x).fminus == fm;
    }
    empdist_bad += !ok;
  }
  return {worst <= 1e-9 && empdist_bad == 0,
          fmt("A/B max |fast - brute| = %.2e over 200 instances (tol 1e-9); empdist mismatches %d/500", worst,
              empdist_bad)};
}

Verdict root_property() {
  int points = 0;
  double worst = 0.0;
  for (std::int64_t t : {10, 100, 1000, 10000, 100000}) {
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      for (double r : {0.1, 0.758, 3.0}) {
        for (double alpha : {0.01, 0.05}) {
          const double f = beta_binomial_radius(t, p, r, alpha);
          const double log_m = beta_binomial_log_mixture(t * f, p * (1.0 - p) * t, p, r);
          worst = std::max(worst, std::fabs(std::expm1(log_m + std::log(alpha))));
          ++points;
        }
      }
    }
  }
  return {worst <= 1e-6 && points >= 100, fmt("max relative error %.2e over %d points (tol 1e-6)", worst, points)};
}

std::vector<RunResult> qlucb_runs(CsKind kind, int runs) {
  QlucbConfig cfg;
  cfg.cs_kind = kind;
  return qlucb_replicate(make_scenario(Scenario::uniform_shift, 0.5, 0.025), cfg, runs, 7007);
}

Verdict qlucb_correctness() {
  const int runs = 64;
  const auto res = qlucb_runs(CsKind::beta_binomial_one_sided, runs);
  int correct = 0;
  int capped = 0;
  int exceptional = 0;
  for (const auto& r : res) {
    correct += r.eps_optimal.value_or(false);
    capped += r.stopped_by_cap;
    exceptional += r.chosen_arm == std::optional<std::size_t>(9);
  }
  const double rate = static_cast<double>(correct) / runs;
  const double limit = 0.95 - 3.0 * std::sqrt(0.95 * 0.05 / runs);
  return {rate >= limit && capped == 0,
          fmt("eps-optimal rate %.4f (limit %.4f), capped %d, exceptional arm chosen %d/%d", rate, limit, capped,
              exceptional, runs)};
}

double mean_total(const std::vector<RunResult>& res) {
  double sum = 0.0;
  for (const auto& r : res) sum += static_cast<double>(r.total_samples);
  return sum / static_cast<double>(res.size());
}

Verdict ablation() {
  const double bb = mean_total(qlucb_runs(CsKind::beta_binomial_one_sided, 16));
  const double dkw = mean_total(qlucb_runs(CsKind::dkw_union_baseline, 16));
  return {bb <= 0.5 * dkw, fmt("mean T beta_binomial %.0f, dkw_union %.0f, ratio %.3f (limit 0.5)", bb, dkw, bb / dkw)};
}

Verdict ab_efficiency() {
  AbSimConfig cfg;
  cfg.runs = 32;
  cfg.seed = 9009;
  const AbSimSummary s = ab_simulation(cfg);
  const double ratio = s.mean_test_T / s.mean_naive_T;
  return {ratio <= 0.9, fmt("mean T test %.0f, naive %.0f, ratio %.3f (limit 0.9), capped %d/%d", s.mean_test_T,
                            s.mean_naive_T, ratio, s.test_capped, s.naive_capped)};
}

Verdict ordering() {
  const double alpha = 0.05;
  const double ds = double_stitch_radius(100000, 0.95, DoubleStitchConfig::standard(alpha, 32.0));
  const double lil = lil_half_width(100000, lil_config_for(0.85, alpha, 32.0));
  const double sz = baseline_radius(BaselineKind::szorenyi, 100000, 0.95, alpha);
  const double bb = beta_binomial_radius(1000000, 0.5, tune_r(32, 0.5, alpha), alpha);
  const double st = simple_stitched_radius(1000000, 0.5, alpha);
  return {ds < lil && lil < sz && bb < st,
          fmt("p=0.95 t=1e5: %.6f < %.6f < %.6f; p=0.5 t=1e6: %.6f < %.6f", ds, lil, sz, bb, st)};
}

Verdict invariants() {
  int spacing_bad = 0;
  for (int i = 1; i <= 300; ++i) {
    const double a = 3.0 * i / 300.0;
    for (int j = 0; j < 200; ++j) {
      const double p = 0.5 + 0.4999 * j / 199.0;
      const double odds = std::exp(a) * p / (1.0 - p);
      const double q = odds / (1.0 + odds);
      spacing_bad += q - p > 0.5 * a * std::sqrt(p * (1.0 - p)) + 1e-15;
    }
  }
  int mono_bad = 0;
  for (double p : {0.05, 0.3, 0.5, 0.8}) {
    for (double r : {0.2, 1.0, 5.0}) {
      for (double v : {1.0, 25.0, 400.0}) {
        double prev = -kInf;
        const double lo = -0.999 * (r + v) / (1.0 - p);
        const double hi = 0.999 * (r + v) / p;
        for (double s = lo; s <= hi; s += (hi - lo) / 200.0) {
          const double val = one_sided_log_mixture(s, v, p, r);
          mono_bad += val < prev - 1e-12;
          prev = val;
        }
      }
    }
  }
  std::mt19937_64 gen(9);
  int table_bad = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const int t = 1 + static_cast<int>(gen() % 64);
    Sample m;
    for (int i = 0; i < t; ++i) m.insert(static_cast<double>(gen() % 20));
    std::vector<double> xs;
    for (double v : m.sorted_values()) xs.insert(xs.end(), {v - 0.5, v, v + 0.5});
    for (int k = 0; k <= t; ++k) {
      const double p = static_cast<double>(k) / t;
      const X q = m.upper_quantile(p);
      const X qm = m.lower_quantile(p);
      for (double x : xs) {
        const CdfValue c = m.cdf_at(x);
        table_bad += (c.f >= p) != (X(x) >= qm);
        table_bad += (c.f < p) != (X(x) < qm);
        table_bad += (c.fminus <= p) != (X(x) <= q);
        table_bad += (c.fminus > p) != (X(x) > q);
      }
    }
  }
  int golden_bad = 0;
  for (const golden::Case& c : golden::cases()) {
    std::istringstream in;
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(golden::resolve(c, QCS_GOLDEN_DIR), in, out, err);
    std::ifstream f(std::string(QCS_GOLDEN_DIR) + "/" + c.file);
    std::stringstream expected;
    expected << f.rdbuf();
    golden_bad += code != 0 || !f || out.str() != expected.str();
  }
  const bool pass = spacing_bad + mono_bad + table_bad + golden_bad == 0;
  return {pass, fmt("violations: spacing %d, one-sided monotonicity %d, implication table %d, golden files %d/%zu",
                    spacing_bad, mono_bad, table_bad, golden_bad, golden::cases().size())};
}

}  // namespace

int main() {
  criterion(1, "constants", 1.0, constants);
  criterion(2, "tuning", 1.0, tuning);
  criterion(3, "baselines", 1.0, baselines);
  criterion(4, "coverage", 0.0, coverage);
  criterion(5, "oracle equivalence", 60.0, oracles);
  criterion(6, "root property", 60.0, root_property);
  criterion(7, "qlucb correctness", 0.0, qlucb_correctness);
  criterion(8, "cs ablation", 0.0, ablation);
  criterion(9, "a/b efficiency", 0.0, ab_efficiency);
  criterion(10, "boundary ordering", 1.0, ordering);
  criterion(11, "invariant suites", 0.0, invariants);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
