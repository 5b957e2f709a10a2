#pragma once

// QLUCB for quantile epsilon-best-arm identification, the analytic gap and
// tau diagnostics, and the replicated benchmark.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qcs/boundaries.hpp"
#include "qcs/distributions.hpp"
#include "qcs/errors.hpp"
#include "qcs/extended.hpp"
#include "qcs/ordered_multiset.hpp"

namespace qcs {

enum class CsKind { stitched_qlucb, beta_binomial_one_sided, dkw_union_baseline };

inline std::string_view to_string(CsKind k) {
  switch (k) {
    case CsKind::stitched_qlucb: return "stitched_qlucb";
    case CsKind::beta_binomial_one_sided: return "beta_binomial_one_sided";
    case CsKind::dkw_union_baseline: return "dkw_union_baseline";
  }
  return "unknown";
}

inline CsKind parse_cs_kind(std::string_view name) {
  for (CsKind k : {CsKind::stitched_qlucb, CsKind::beta_binomial_one_sided, CsKind::dkw_union_baseline}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown confidence sequence kind '" + std::string(name) +
                    "' (expected stitched_qlucb, beta_binomial_one_sided or dkw_union_baseline)");
}

struct QlucbConfig {
  double pi_target = 0.5;
  double eps = 0.025;
  double delta_err = 0.05;
  CsKind cs_kind = CsKind::stitched_qlucb;
  int K = 10;
  std::int64_t max_rounds = 1'000'000;
  std::uint64_t seed = 0;
  // Target time for tuning r of the beta-binomial kind.
  double tune_m = 32.0;

  void validate() const {
    if (!(pi_target > 0.0 && pi_target < 1.0)) throw ConfigError("pi must lie in (0,1)");
    if (!(eps >= 0.0 && eps < std::min(pi_target, 1.0 - pi_target))) {
      throw ConfigError("eps must lie in [0, min(pi, 1 - pi))");
    }
    if (!(delta_err > 0.0 && delta_err < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (K < 2) throw ConfigError("QLUCB needs at least two arms");
    if (max_rounds < 1) throw ConfigError("max_rounds must be positive");
  }

  // Two-sided error level whose halves give one-sided coverage delta / K.
  double side_alpha() const { return 2.0 * delta_err / K; }
};

// l_n(pi + eps) and u_n(pi - eps) as functions of the per-arm count n,
// memoized because they do not depend on the data.
class QlucbRadii {
 public:
  explicit QlucbRadii(const QlucbConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    if (cfg.cs_kind == CsKind::beta_binomial_one_sided) {
      r_low_ = tune_r(cfg.tune_m, cfg.pi_target + cfg.eps, cfg.side_alpha());
      r_up_ = tune_r(cfg.tune_m, cfg.pi_target - cfg.eps, cfg.side_alpha());
    }
  }

  const QlucbConfig& config() const { return cfg_; }

  double lower(std::int64_t n) { return lookup(lower_, n, true); }
  double upper(std::int64_t n) { return lookup(upper_, n, false); }

 private:
  double lookup(std::vector<double>& table, std::int64_t n, bool lower_side) {
    if (n < 1) throw DomainError("radius needs n >= 1");
    const auto idx = static_cast<std::size_t>(n - 1);
    if (idx >= table.size()) table.resize(std::max(idx + 1, table.size() * 2), -1.0);
    if (table[idx] < 0.0) table[idx] = compute(n, lower_side);
    return table[idx];
  }

  double compute(std::int64_t n, bool lower_side) const {
    const double level = lower_side ? cfg_.pi_target + cfg_.eps : cfg_.pi_target - cfg_.eps;
    switch (cfg_.cs_kind) {
      case CsKind::stitched_qlucb:
        return simple_stitched_radius(n, lower_side ? 1.0 - level : level, cfg_.side_alpha());
      case CsKind::beta_binomial_one_sided: {
        const double per_side = cfg_.delta_err / cfg_.K;
        return lower_side ? one_sided_beta_binomial_radius(n, 1.0 - level, r_low_, per_side)
                          : one_sided_beta_binomial_radius(n, level, r_up_, per_side);
      }
      case CsKind::dkw_union_baseline:
        if (n < 32) return kInf;
        return baseline_radius(BaselineKind::szorenyi, n, level, cfg_.side_alpha());
    }
    throw ConfigError("unknown confidence sequence kind");
  }

  QlucbConfig cfg_;
  double r_low_ = 0.0;
  double r_up_ = 0.0;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct ArmBounds {
  Extended<double> lower;  // L for Q(pi + eps)
  Extended<double> upper;  // U for Q(pi - eps)
};

inline ArmBounds qlucb_confidence_bounds(const OrderedMultiset<double>& arm, QlucbRadii& radii) {
  const std::int64_t n = arm.size();
  if (n < 1) throw StateError("arm has no observations");
  const QlucbConfig& cfg = radii.config();
  return {arm.upper_quantile(cfg.pi_target + cfg.eps - radii.lower(n)),
          arm.lower_quantile(cfg.pi_target - cfg.eps + radii.upper(n))};
}

inline ArmBounds qlucb_confidence_bounds(const OrderedMultiset<double>& arm, const QlucbConfig& cfg) {
  QlucbRadii radii(cfg);
  return qlucb_confidence_bounds(arm, radii);
}

struct RunResult {
  std::optional<std::size_t> chosen_arm;
  std::int64_t total_samples = 0;
  std::vector<std::int64_t> per_arm_counts;
  std::int64_t rounds = 0;
  std::optional<bool> eps_optimal;
  bool stopped_by_cap = false;

  bool operator==(const RunResult&) const = default;
};

// Membership in the epsilon-optimal set. Ties within 1e-12 (relative) count
// as satisfying the inequality so that exact ties survive rounding.
inline std::vector<bool> eps_optimal_set(const std::vector<ArmSpec>& arms, double pi, double eps) {
  double best = -kInf;
  for (const ArmSpec& a : arms) best = std::max(best, a.lower_quantile(pi - eps));
  std::vector<bool> out;
  const double tol = std::isfinite(best) ? 1e-12 * std::max(1.0, std::fabs(best)) : 0.0;
  for (const ArmSpec& a : arms) out.push_back(a.lower_quantile(pi + eps) >= best - tol);
  return out;
}

inline RunResult qlucb_run(const std::vector<ArmSpec>& arms, const QlucbConfig& cfg,
                           QlucbRadii* shared_radii = nullptr) {
  cfg.validate();
  const auto k_arms = static_cast<std::size_t>(cfg.K);
  if (arms.size() != k_arms) throw ConfigError("number of arms does not match K");
  std::optional<QlucbRadii> own;
  if (!shared_radii) own.emplace(cfg);
  QlucbRadii& radii = shared_radii ? *shared_radii : *own;

  Rng rng(cfg.seed);
  std::vector<OrderedMultiset<double>> data(k_arms);
  for (std::size_t k = 0; k < k_arms; ++k) data[k].insert(arms[k].sample(rng));

  RunResult res;
  res.rounds = 1;
  std::vector<ArmBounds> b(k_arms, ArmBounds{Extended<double>::neg_inf(), Extended<double>::pos_inf()});
  std::vector<bool> pick(k_arms);
  while (true) {
    for (std::size_t k = 0; k < k_arms; ++k) b[k] = qlucb_confidence_bounds(data[k], radii);

    // top two upper bounds give max over j != k in O(1)
    std::size_t top = 0;
    for (std::size_t k = 1; k < k_arms; ++k) {
      if (b[top].upper < b[k].upper) top = k;
    }
    Extended<double> second = Extended<double>::neg_inf();
    for (std::size_t k = 0; k < k_arms; ++k) {
      if (k != top) second = max(second, b[k].upper);
    }
    for (std::size_t k = 0; k < k_arms && !res.chosen_arm; ++k) {
      const Extended<double>& other = k == top ? second : b[top].upper;
      if (b[k].lower >= other) res.chosen_arm = k;
    }
    if (res.chosen_arm) break;
    if (res.rounds >= cfg.max_rounds) {
      res.stopped_by_cap = true;
      break;
    }

    std::size_t h = 0;
    for (std::size_t k = 1; k < k_arms; ++k) {
      if (b[h].lower < b[k].lower) h = k;
    }
    Extended<double> best_u = Extended<double>::neg_inf();
    for (std::size_t k = 0; k < k_arms; ++k) {
      if (k != h) best_u = max(best_u, b[k].upper);
    }
    for (std::size_t k = 0; k < k_arms; ++k) pick[k] = k == h || b[k].upper == best_u;
    for (std::size_t k = 0; k < k_arms; ++k) {
      if (pick[k]) data[k].insert(arms[k].sample(rng));
    }
    ++res.rounds;
  }

  for (const auto& d : data) {
    res.per_arm_counts.push_back(d.size());
    res.total_samples += d.size();
  }
  const bool analytic = std::all_of(arms.begin(), arms.end(), [](const ArmSpec& a) { return a.analytic(); });
  if (analytic && res.chosen_arm) {
    res.eps_optimal = eps_optimal_set(arms, cfg.pi_target, cfg.eps)[*res.chosen_arm];
  }
  return res;
}

// Runs `runs` replications with seeds mix_seed(base_seed, i), spread over
// `threads` workers (0 = hardware concurrency). Output is in run order.
inline std::vector<RunResult> qlucb_replicate(const std::vector<ArmSpec>& arms, QlucbConfig cfg, int runs,
                                              std::uint64_t base_seed, unsigned threads = 0) {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  cfg.validate();
  std::vector<RunResult> out(static_cast<std::size_t>(runs));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
  auto work = [&](unsigned w) {
    QlucbRadii radii(cfg);
    for (int i = static_cast<int>(w); i < runs; i += static_cast<int>(threads)) {
      QlucbConfig c = cfg;
      c.seed = mix_seed(base_seed, static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = qlucb_run(arms, c, &radii);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analytic diagnostics

inline std::vector<double> gap_deltas(const std::vector<ArmSpec>& arms, double pi, double eps) {
  for (const ArmSpec& a : arms) {
    if (!a.analytic()) throw UnsupportedError("gap_deltas needs analytic arms");
  }
  const std::vector<bool> opt = eps_optimal_set(arms, pi, eps);
  const auto n_opt = std::count(opt.begin(), opt.end(), true);
  const auto max_lower_at = [&](double u) {
    double m = -kInf;
    for (const ArmSpec& a : arms) m = std::max(m, a.lower_quantile(u));
    return m;
  };
  std::vector<double> delta(arms.size(), 0.0);
  std::optional<std::size_t> unique;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    if (n_opt == 1 && opt[k]) {
      unique = k;
      continue;
    }
    const double hi = std::min(pi, 1.0 - pi);
    const auto cond = [&](double d) { return arms[k].lower_quantile(pi + d) <= max_lower_at(pi - d); };
    delta[k] = cond(hi) ? hi : last_true(cond, 0.0, hi, 1e-9, 200);
  }
  if (unique) {
    const std::size_t k = *unique;
    double rival = -kInf;
    for (std::size_t j = 0; j < arms.size(); ++j) {
      if (j != k) rival = std::max(rival, arms[j].lower_quantile(pi + delta[j]));
    }
    const auto cond = [&](double d) { return arms[k].lower_quantile(pi - d) > rival; };
    if (!cond(0.0)) {
      delta[k] = 0.0;
    } else {
      delta[k] = cond(pi) ? pi : last_true(cond, 0.0, pi, 1e-9, 200);
    }
  }
  return delta;
}

// Smallest n with g_n + max(u_n(pi), l_n(pi + eps)) < max(gap, eps).
inline std::int64_t tau_bound(double gap, double eps, double pi, int k_arms, double delta_err) {
  const double target = std::max(gap, eps);
  if (!(target > 0.0)) throw DomainError("tau_bound: gap and eps are both zero, tau is unbounded");
  if (k_arms < 1 || !(delta_err > 0.0 && delta_err < 1.0)) throw ConfigError("tau_bound: bad K or delta");
  const double alpha = 2.0 * delta_err / k_arms;
  const double c = 0.8 * std::log(1612.0 * k_arms / delta_err);
  const auto width = [&](std::int64_t n) {
    const double nd = static_cast<double>(n);
    const double g = 0.85 * std::sqrt((std::log(std::log(std::numbers::e * nd)) + c) / nd);
    return g + std::max(simple_stitched_radius(n, pi, alpha), simple_stitched_radius(n, 1.0 - pi - eps, alpha));
  };
  std::int64_t hi = 1;
  while (!(width(hi) < target)) {
    if (hi > (std::int64_t{1} << 60)) throw NumericalError("tau_bound: no n found below 2^60");
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // width(lo) >= target unless hi == 1
  if (hi == 1) return 1;
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (width(mid) < target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Benchmark

inline std::vector<double> default_pi_list() {
  return {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
}

struct BenchmarkConfig {
  Scenario scenario = Scenario::uniform_shift;
  std::vector<double> pi_list = default_pi_list();
  double eps = 0.025;
  double delta_err = 0.05;
  std::vector<CsKind> kinds = {CsKind::stitched_qlucb, CsKind::beta_binomial_one_sided};
  int runs = 64;
  std::uint64_t seed = 0;
  int K = 10;
  std::int64_t max_rounds = 1'000'000;
  unsigned threads = 0;
  double tune_m = 32.0;
};

struct BenchmarkRow {
  Scenario scenario;
  double pi;
  CsKind kind;
  int runs;
  double mean_T;
  double median_T;
  double correct_rate;
  int capped;
};

inline BenchmarkRow summarize(Scenario s, double pi, CsKind kind, const std::vector<RunResult>& results) {
  std::vector<double> t;
  int correct = 0;
  int capped = 0;
  double sum = 0.0;
  for (const RunResult& r : results) {
    t.push_back(static_cast<double>(r.total_samples));
    sum += static_cast<double>(r.total_samples);
    if (r.eps_optimal.value_or(false)) ++correct;
    if (r.stopped_by_cap) ++capped;
  }
  std::sort(t.begin(), t.end());
  const std::size_t n = t.size();
  const double median = n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
  return {s, pi, kind, static_cast<int>(n), sum / n, median, static_cast<double>(correct) / n, capped};
}

inline std::vector<BenchmarkRow> bai_benchmark(const BenchmarkConfig& bc) {
  std::vector<BenchmarkRow> rows;
  for (double pi : bc.pi_list) {
    const std::vector<ArmSpec> arms = make_scenario(bc.scenario, pi, bc.eps, bc.K);
    for (CsKind kind : bc.kinds) {
      QlucbConfig cfg;
      cfg.pi_target = pi;
      cfg.eps = bc.eps;
      cfg.delta_err = bc.delta_err;
      cfg.cs_kind = kind;
      cfg.K = bc.K;
      cfg.max_rounds = bc.max_rounds;
      cfg.tune_m = bc.tune_m;
      rows.push_back(summarize(bc.scenario, pi, kind, qlucb_replicate(arms, cfg, bc.runs, bc.seed, bc.threads)));
    }
  }
  return rows;
}

}  // namespace qcs
