#pragma once

// Sequential two-sample quantile tests built on beta-binomial mixtures, the
// multi-arm global null, and sequential Kolmogorov-Smirnov tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qcs/boundaries.hpp"
#include "qcs/errors.hpp"
#include "qcs/extended.hpp"
#include "qcs/ordered_multiset.hpp"
#include "qcs/special.hpp"

namespace qcs {

using Sample = OrderedMultiset<double>;
using XValue = Extended<double>;

// Evaluates G, G+ and G- for one arm. Holds a reference to the arm: rebuild
// (or pass a fresh a*) after the arm changes.
class GEvaluator {
 public:
  GEvaluator(const Sample& arm, double p, double r)
      : arm_(&arm), mix_(p, r), flip_(1.0 - p, r), n_(static_cast<double>(arm.size())) {
    a_star_ = argmin_level(p, r, arm.size());
  }

  GEvaluator(const Sample& arm, double p, double r, double a_star)
      : arm_(&arm), mix_(p, r), flip_(1.0 - p, r), n_(static_cast<double>(arm.size())),
        a_star_(a_star) {}

  const Sample& arm() const { return *arm_; }
  double a_star() const { return a_star_; }

  // a* depends on the data only through N.
  static double argmin_level(double p, double r, std::int64_t n) {
    if (n == 0) return p;
    const BetaBinomialMixture mix(p, r);
    const double nd = static_cast<double>(n);
    const auto f = [&](double a) { return mix.log_mixture((a - p) * nd, p * (1.0 - p) * nd); };
    double best = golden_section_min(f, 0.0, 1.0, 1e-10);
    double best_val = f(best);
    for (double edge : {0.0, 1.0}) {
      const double v = f(edge);
      if (v < best_val) {
        best_val = v;
        best = edge;
      }
    }
    return best;
  }

  // log M_{p,r}((a - p) N, p (1-p) N)
  double level_value(double a) const {
    if (n_ == 0.0) return 0.0;
    const double p = mix_.p();
    return mix_.log_mixture((a - p) * n_, p * (1.0 - p) * n_);
  }

  // Minimum of level_value over a in [F^-(x), F(x)]; the function is convex in
  // a, so the minimum sits at a* clamped into that interval.
  double two_sided(const XValue& x) const {
    if (n_ == 0.0) return 0.0;
    const CdfValue c = arm_->cdf_at(x);
    return level_value(std::clamp(a_star_, c.fminus, c.f));
  }

  double plus(const XValue& x) const {
    if (n_ == 0.0) return 0.0;
    const double p = mix_.p();
    return mix_.log_one_sided((arm_->cdf_at(x).fminus - p) * n_, p * (1.0 - p) * n_);
  }

  double minus(const XValue& x) const {
    if (n_ == 0.0) return 0.0;
    const double p = mix_.p();
    return flip_.log_one_sided(-(arm_->cdf_at(x).f - p) * n_, p * (1.0 - p) * n_);
  }

 private:
  const Sample* arm_;
  BetaBinomialMixture mix_;
  BetaBinomialMixture flip_;
  double n_;
  double a_star_;
};

struct TestResult {
  double stat;
  double pvalue;
  bool reject;
};

inline TestResult make_result(double stat, double alpha) {
  return {stat, std::min(1.0, std::exp(-stat)), stat >= std::log(1.0 / alpha)};
}

namespace detail {

// min over x of first.G(x) + second.G(x + shift), assuming
// first's Q(a*) <= second's Q(a*) - shift.
inline double scan_two_sided(const GEvaluator& first, const GEvaluator& second, double shift) {
  // Each candidate is evaluated at an exact data value on one side so that
  // x and x + shift land on the intended side of every jump.
  const auto at_first = [&](const XValue& x) { return first.two_sided(x) + second.two_sided(x + shift); };
  const auto at_second = [&](const XValue& y) { return first.two_sided(y - shift) + second.two_sided(y); };
  const XValue x_minus = first.arm().upper_quantile(first.a_star());
  const XValue y_plus = second.arm().lower_quantile(second.a_star());
  const XValue x_plus = y_plus - shift;
  if (x_plus <= x_minus) return at_first(x_minus);
  double best = std::min(at_first(x_minus), at_second(y_plus));
  second.arm().for_each_in(x_minus + shift, y_plus, [&](double y, std::int64_t) {
    best = std::min(best, at_second(y));
  });
  return best;
}

inline void require_nonempty(const Sample& a, const Sample& b) {
  if (a.empty() || b.empty()) throw StateError("both arms need at least one observation");
}

}  // namespace detail

// min_x [G_1(x) + G_2(x + delta_star)]
inline double two_sided_stat(const GEvaluator& g1, const GEvaluator& g2, double delta_star) {
  detail::require_nonempty(g1.arm(), g2.arm());
  const XValue q1 = g1.arm().upper_quantile(g1.a_star());
  const XValue q2 = g2.arm().upper_quantile(g2.a_star());
  if (q1 <= q2 - delta_star) return detail::scan_two_sided(g1, g2, delta_star);
  return detail::scan_two_sided(g2, g1, -delta_star);
}

// min_x [G+_1(x) + G-_2(x + delta_star)]
inline double one_sided_stat(const GEvaluator& g1, const GEvaluator& g2, double delta_star) {
  detail::require_nonempty(g1.arm(), g2.arm());
  const auto l = [&](const XValue& y) { return g1.plus(y - delta_star) + g2.minus(y); };
  double best = std::min(l(XValue::neg_inf()), l(XValue::pos_inf()));
  g2.arm().for_each([&](double y, std::int64_t) { best = std::min(best, l(y)); });
  return best;
}

// Lazily filled a*(N) for one (p, r). Not thread-safe; share per worker.
class ArgminTable {
 public:
  ArgminTable(double p, double r) : p_(p), r_(r) {}

  double at(std::int64_t n) {
    const auto idx = static_cast<std::size_t>(n);
    if (idx >= table_.size()) table_.resize(std::max(idx + 1, 2 * table_.size()), -1.0);
    if (table_[idx] < 0.0) table_[idx] = GEvaluator::argmin_level(p_, r_, n);
    return table_[idx];
  }

  double p() const { return p_; }
  double r() const { return r_; }

 private:
  double p_;
  double r_;
  std::vector<double> table_;
};

// Two arms, a fixed mixture (p, r) and a hypothesized difference
// delta_star = Q_2(p) - Q_1(p).
class AbTestState {
 public:
  AbTestState(double p, double r, double delta_star = 0.0, double alpha = 0.05,
              std::shared_ptr<ArgminTable> table = nullptr)
      : p_(p), r_(r), delta_star_(delta_star), alpha_(alpha), table_(std::move(table)) {
    BetaBinomialMixture check(p, r);
    if (!table_) table_ = std::make_shared<ArgminTable>(p, r);
    if (table_->p() != p || table_->r() != r) throw ConfigError("a* table built for a different (p, r)");
    detail::check_alpha(alpha);
    if (!std::isfinite(delta_star)) throw ConfigError("delta_star must be finite");
  }

  void insert(int arm, double x) {
    if (arm != 0 && arm != 1) throw DomainError("arm index must be 0 or 1");
    arms_[arm].insert(x);
  }

  const Sample& arm(int k) const { return arms_.at(k); }
  double p() const { return p_; }
  double r() const { return r_; }
  double delta_star() const { return delta_star_; }
  double alpha() const { return alpha_; }

  GEvaluator evaluator(int k) const {
    return GEvaluator(arms_.at(k), p_, r_, table_->at(arms_.at(k).size()));
  }

  TestResult two_sided() const {
    detail::require_nonempty(arms_[0], arms_[1]);
    return make_result(two_sided_stat(evaluator(0), evaluator(1), delta_star_), alpha_);
  }

  TestResult one_sided() const {
    detail::require_nonempty(arms_[0], arms_[1]);
    return make_result(one_sided_stat(evaluator(0), evaluator(1), delta_star_), alpha_);
  }

 private:
  double p_;
  double r_;
  double delta_star_;
  double alpha_;
  std::shared_ptr<ArgminTable> table_;
  std::array<Sample, 2> arms_;
};

// max_k min_x [G+_control(x) + G-_k(x)]
inline double global_null_stat(const Sample& control, std::span<const Sample> treatments, double p, double r) {
  if (treatments.empty()) throw DomainError("global null needs at least one treatment arm");
  const GEvaluator g1(control, p, r);
  double best = -kInf;
  for (const Sample& arm : treatments) best = std::max(best, one_sided_stat(g1, GEvaluator(arm, p, r), 0.0));
  return best;
}

// (K - 1) exp(-stat), clamped to 1.
inline double global_null_pvalue(const Sample& control, std::span<const Sample> treatments, double p,
                                 double r) {
  const double stat = global_null_stat(control, treatments, p, r);
  return std::min(1.0, static_cast<double>(treatments.size()) * std::exp(-stat));
}

// ---------------------------------------------------------------------------
// Sequential Kolmogorov-Smirnov tests

enum class KsMode { one_sample, two_sample, dominance };

struct KsResult {
  double stat;
  double threshold;
  bool reject;
};

// A sqrt((log log(e t / m) + C) / t), infinite for t < m
inline double ks_boundary(std::int64_t t, double a_mult, double c_add, double m_start) {
  return lil_half_width(t, LilConfig{a_mult, c_add, m_start});
}

// sup_x |F_t(x) - F0(x)|, using F0's left limit at each jump of F_t.
inline double ks_one_sample_stat(const Sample& x, const std::function<double(double)>& cdf,
                                 const std::function<double(double)>& left_cdf = {}) {
  if (x.empty()) throw QueryError("KS statistic on an empty sample");
  const double t = static_cast<double>(x.size());
  double stat = 0.0;
  std::int64_t cum = 0;
  x.for_each([&](double v, std::int64_t m) {
    const double before = cum / t;
    cum += m;
    const double after = cum / t;
    const double left = left_cdf ? left_cdf(v) : cdf(v);
    stat = std::max({stat, std::fabs(before - left), std::fabs(after - cdf(v))});
  });
  return stat;
}

namespace detail {

// Visits F_t(v) - G_t(v) at every distinct value v of either sample.
template <class F>
void walk_difference(const Sample& x, const Sample& y, F&& f) {
  const std::vector<double> xs = x.sorted_values();
  const std::vector<double> ys = y.sorted_values();
  const double tx = static_cast<double>(xs.size());
  const double ty = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xs.size() || j < ys.size()) {
    double v;
    if (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) {
      v = xs[i];
    } else {
      v = ys[j];
    }
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    f(i / tx - j / ty);
  }
}

inline void require_paired(const Sample& x, const Sample& y) {
  if (x.size() != y.size()) throw PairingError("paired samples have unequal counts");
  if (x.empty()) throw QueryError("KS statistic on an empty sample");
}

}  // namespace detail

inline double ks_two_sample_stat(const Sample& x, const Sample& y) {
  detail::require_paired(x, y);
  double stat = 0.0;
  detail::walk_difference(x, y, [&](double d) { stat = std::max(stat, std::fabs(d)); });
  return stat;
}

// sup_x [F_t(x) - G_t(x)]: evidence against F <= G.
inline double ks_dominance_stat(const Sample& x, const Sample& y) {
  detail::require_paired(x, y);
  double stat = 0.0;
  detail::walk_difference(x, y, [&](double d) { stat = std::max(stat, d); });
  return stat;
}

// Sequential KS test state. C is solved once at construction.
class KsTestState {
 public:
  KsTestState(KsMode mode, double a_mult = 0.85, double alpha = 0.05, double m_start = 1.0,
              std::function<double(double)> reference_cdf = {})
      : mode_(mode), a_mult_(a_mult), alpha_(alpha), m_start_(m_start), cdf_(std::move(reference_cdf)) {
    detail::check_alpha(alpha);
    if (mode == KsMode::one_sample && !cdf_) throw ConfigError("one-sample KS needs a reference CDF");
    c_add_ = lil_C(a_mult, mode == KsMode::two_sample ? alpha / 2.0 : alpha);
    LilConfig{a_mult, c_add_, m_start}.validate();
  }

  void insert_x(double v) { x_.insert(v); }
  void insert_y(double v) {
    if (mode_ == KsMode::one_sample) throw StateError("one-sample KS has no second sample");
    y_.insert(v);
  }

  KsMode mode() const { return mode_; }
  double c_add() const { return c_add_; }
  const Sample& x() const { return x_; }
  const Sample& y() const { return y_; }

  KsResult evaluate() const {
    if (mode_ == KsMode::one_sample) {
      const double stat = ks_one_sample_stat(x_, cdf_);
      const double thr = ks_boundary(x_.size(), a_mult_, c_add_, m_start_);
      return {stat, thr, stat > thr};
    }
    const double stat = mode_ == KsMode::two_sample ? ks_two_sample_stat(x_, y_) : ks_dominance_stat(x_, y_);
    const double thr = 2.0 * ks_boundary(x_.size(), a_mult_, c_add_, m_start_);
    return {stat, thr, stat > thr};
  }

 private:
  KsMode mode_;
  double a_mult_;
  double alpha_;
  double m_start_;
  std::function<double(double)> cdf_;
  double c_add_ = 0.0;
  Sample x_;
  Sample y_;
};

}  // namespace qcs
