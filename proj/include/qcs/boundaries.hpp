#pragma once

// Confidence-sequence radii for a fixed quantile, for all quantiles at once,
// and the fixed-sample baselines they are compared against. All functions are
// pure. Radii are in probability units (divide-by-t already applied) and are
// never clipped to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "qcs/errors.hpp"
#include "qcs/special.hpp"

namespace qcs {

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
}

inline void check_t(std::int64_t t) {
  if (t < 1) throw DomainError("t must be at least 1");
}

inline void check_open_unit(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(name) + " must lie in (0,1)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stitched boundary

struct StitchConfig {
  double eta = 2.04;
  double s_exp = 1.4;
  double m_start = 1.0;
  double alpha = 0.05;

  void validate() const {
    if (!(eta > 1.0)) throw ConfigError("stitching: eta must exceed 1");
    if (!(s_exp > 1.0)) throw ConfigError("stitching: s must exceed 1");
    if (!(m_start >= 1.0)) throw ConfigError("stitching: m must be at least 1");
    detail::check_alpha(alpha);
  }

  double k1() const { return (std::pow(eta, 0.25) + std::pow(eta, -0.25)) / std::numbers::sqrt2; }
  double k2() const { return (std::sqrt(eta) + 1.0) / 2.0; }

  // l(t) = s log log(eta t / m) + log(2 zeta(s) / (alpha log^s eta))
  double ell(double t) const {
    return s_exp * std::log(std::log(eta * t / m_start)) +
           std::log(2.0 * zeta(s_exp) / (alpha * std::pow(std::log(eta), s_exp)));
  }
};

inline double stitched_radius(std::int64_t t, double p, const StitchConfig& cfg) {
  cfg.validate();
  detail::check_t(t);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("stitched_radius: p must lie in [0,1]");
  const double tt = std::max(static_cast<double>(t), cfg.m_start);
  const double ell = cfg.ell(tt);
  const double c = (1.0 - 2.0 * p) / 3.0;
  const double k1 = cfg.k1();
  const double k2 = cfg.k2();
  const double s = std::sqrt(k1 * k1 * p * (1.0 - p) * tt * ell + k2 * k2 * c * c * ell * ell) +
                   c * k2 * ell;
  return s / static_cast<double>(t);
}

// The rounded closed form with constants 1.5, 0.8, 1.4, 2.1 and 10.
inline double simple_stitched_ell(std::int64_t t, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  const double td = static_cast<double>(t);
  return (1.4 * std::log(std::log(2.1 * td)) + std::log(10.0 / alpha)) / td;
}

inline double simple_stitched_radius(std::int64_t t, double p, double alpha) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("stitched_radius: p must lie in [0,1]");
  const double ell = simple_stitched_ell(t, alpha);
  return 1.5 * std::sqrt(p * (1.0 - p) * ell) + 0.8 * ell;
}

// ---------------------------------------------------------------------------
// Beta-binomial mixture

class BetaBinomialMixture {
 public:
  BetaBinomialMixture(double p, double r) : p_(p), r_(r) {
    detail::check_open_unit(p, "mixture p");
    if (!(r > 0.0)) throw ConfigError("mixture r must be positive");
    log_p_ = std::log(p);
    log_q_ = std::log1p(-p);
    log_b0_ = log_beta(r / p, r / (1.0 - p));
  }

  double p() const { return p_; }
  double r() const { return r_; }

  // log M_{p,r}(s, v)
  double log_mixture(double s, double v) const {
    const auto [a, b] = beta_args(s, v);
    return prefactor(s, v) + log_beta(a, b) - log_b0_;
  }

  // log of the one-sided mixture, where B is replaced by B_{1-p}.
  double log_one_sided(double s, double v) const {
    const auto [a, b] = beta_args(s, v);
    if (!one_sided_ready_) {
      log_b0_one_ = log_inc_beta(1.0 - p_, r_ / p_, r_ / (1.0 - p_));
      one_sided_ready_ = true;
    }
    return prefactor(s, v) + log_inc_beta(1.0 - p_, a, b) - log_b0_one_;
  }

  // Largest s at which the first Beta argument stays positive.
  double s_sup(double v) const { return (r_ + v) / p_; }

 private:
  struct Args {
    double a;
    double b;
  };

  Args beta_args(double s, double v) const {
    if (!(v >= 0.0)) throw DomainError("mixture: v must be nonnegative");
    const double a = (r_ + v) / p_ - s;
    const double b = (r_ + v) / (1.0 - p_) + s;
    if (!(a > 0.0)) throw DomainError("mixture: Beta argument (r+v)/p - s is not positive");
    if (!(b > 0.0)) throw DomainError("mixture: Beta argument (r+v)/(1-p) + s is not positive");
    return {a, b};
  }

  double prefactor(double s, double v) const {
    return -(v / (1.0 - p_) + s) * log_p_ - (v / p_ - s) * log_q_;
  }

  double p_;
  double r_;
  double log_p_;
  double log_q_;
  double log_b0_;
  mutable double log_b0_one_ = 0.0;
  mutable bool one_sided_ready_ = false;
};

inline double beta_binomial_log_mixture(double s, double v, double p, double r) {
  return BetaBinomialMixture(p, r).log_mixture(s, v);
}

inline double one_sided_log_mixture(double s, double v, double p, double r) {
  return BetaBinomialMixture(p, r).log_one_sided(s, v);
}

namespace detail {

// sup{s in [0, s_sup) : log_m(s) < target} / t by bisection; log_m must be
// increasing past its minimum and below target at s = 0.
template <class LogM>
double mixture_root(LogM log_m, double s_sup, double target, std::int64_t t) {
  const double s = last_true([&](double x) { return log_m(x) < target; }, 0.0, s_sup, 1e-9, 60);
  return s / static_cast<double>(t);
}

}  // namespace detail

inline double beta_binomial_radius(std::int64_t t, double p, double r, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  const BetaBinomialMixture mix(p, r);
  const double v = p * (1.0 - p) * static_cast<double>(t);
  return detail::mixture_root([&](double s) { return mix.log_mixture(s, v); }, mix.s_sup(v),
                              std::log(1.0 / alpha), t);
}

// Radius from the one-sided mixture; valid for a single side at level alpha.
inline double one_sided_beta_binomial_radius(std::int64_t t, double p, double r, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  const BetaBinomialMixture mix(p, r);
  const double v = p * (1.0 - p) * static_cast<double>(t);
  return detail::mixture_root([&](double s) { return mix.log_one_sided(s, v); }, mix.s_sup(v),
                              std::log(1.0 / alpha), t);
}

// C_{p,r} = sqrt(2 pi) p (1-p) f_beta(p; r/(1-p), r/p)
inline double ftilde_constant(double p, double r) {
  detail::check_open_unit(p, "p");
  if (!(r > 0.0)) throw ConfigError("r must be positive");
  const double a = r / (1.0 - p);
  const double b = r / p;
  const double log_density = (a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p) - log_beta(a, b);
  return std::sqrt(2.0 * std::numbers::pi) * p * (1.0 - p) * std::exp(log_density);
}

// The p -> 0 limit of ftilde_constant.
inline double ftilde_constant_limit(double r) {
  return std::sqrt(2.0 * std::numbers::pi) *
         std::exp(r * std::log(r) - r - log_gamma(r));
}

struct Asymptote {
  double value;
  bool pre_asymptotic;
};

inline Asymptote ftilde_asymptote(std::int64_t t, double p, double r, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  const double c = ftilde_constant(p, r);
  const double v = p * (1.0 - p) * static_cast<double>(t);
  const double arg = v / (c * c * alpha * alpha);
  if (arg <= 1.0) return {0.0, true};
  return {std::sqrt(p * (1.0 - p) / static_cast<double>(t) * std::log(arg)), false};
}

// ---------------------------------------------------------------------------
// Tuning r for a target time

// -W_{-1}(-alpha^2/e) - 1, via the Lambert W bisection.
inline double tuning_denominator_exact(double alpha) {
  detail::check_alpha(alpha);
  return -lambert_wm1(-alpha * alpha / std::numbers::e) - 1.0;
}

// Two-term expansion of the same quantity: 2 log(1/alpha) + log log(e/alpha^2).
inline double tuning_denominator_approx(double alpha) {
  detail::check_alpha(alpha);
  return 2.0 * std::log(1.0 / alpha) + std::log(std::log(std::numbers::e / (alpha * alpha)));
}

enum class TuneForm { approximate, exact };

inline double tune_r(double m_target, double p, double alpha,
                     TuneForm form = TuneForm::approximate) {
  if (!(m_target >= 1.0)) throw ConfigError("tune_r: m must be at least 1");
  detail::check_open_unit(p, "tune_r p");
  const double denom = form == TuneForm::exact ? tuning_denominator_exact(alpha)
                                               : tuning_denominator_approx(alpha);
  const double r = p * (1.0 - p) * (m_target / denom - 1.0);
  if (!(r > 0.0)) {
    throw TuningError("tune_r: m = " + std::to_string(m_target) +
                      " is too small for this alpha; use a larger m");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Normal mixture

inline double normal_mixture_radius(std::int64_t t, double r, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  if (!(r > 0.0)) throw ConfigError("normal mixture r must be positive");
  const double td = static_cast<double>(t);
  return std::sqrt((td + r) / (td * td) * std::log((td + r) / (alpha * alpha * r)));
}

// ---------------------------------------------------------------------------
// Iterated-logarithm bound on the whole empirical CDF

struct LilConfig {
  double a_mult = 0.85;
  double c_add = 8.3;
  double m_start = 1.0;

  void validate() const {
    if (!(a_mult > 1.0 / std::numbers::sqrt2)) throw ConfigError("lil: A must exceed 1/sqrt(2)");
    if (!(c_add > 0.0)) throw ConfigError("lil: C must be positive");
    if (!(m_start >= 1.0)) throw ConfigError("lil: m must be at least 1");
  }
};

inline double lil_gamma(double a, double c, double eta) {
  return std::sqrt(2.0 / eta) * (a - std::sqrt(2.0 * (eta - 1.0) / c));
}

// Error probability achieved by (A, C); +inf when no eta is feasible.
inline double lil_alpha(double a, double c) {
  if (!(a > 1.0 / std::numbers::sqrt2)) throw ConfigError("lil_alpha: A must exceed 1/sqrt(2)");
  if (!(c > 0.0)) throw ConfigError("lil_alpha: C must be positive");
  auto objective = [&](double eta) {
    const double g = lil_gamma(a, c, eta);
    if (!(g > 1.0)) return kInf;
    const double g2 = g * g;
    return 4.0 * std::exp(-g2 * c) * (1.0 + 1.0 / ((g2 - 1.0) * std::log(eta)));
  };
  // grid is geometric in eta - 1
  constexpr int n = 512;
  const double lo = std::log(1e-6);
  const double hi = std::log(2.0 * a * a - 1.0 - 1e-6);
  auto eta_at = [&](int k) { return 1.0 + std::exp(lo + (hi - lo) * k / (n - 1)); };
  int best = -1;
  double best_val = kInf;
  for (int k = 0; k < n; ++k) {
    const double v = objective(eta_at(k));
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best < 0) return kInf;
  const double left = eta_at(std::max(best - 1, 0));
  const double right = eta_at(std::min(best + 1, n - 1));
  const double eta = golden_section_min(objective, left, right, 1e-8);
  return std::min(best_val, objective(eta));
}

// Smallest C with lil_alpha(A, C) <= alpha.
inline double lil_C(double a, double alpha) {
  detail::check_alpha(alpha);
  double hi = 1.0;
  while (lil_alpha(a, hi) > alpha) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("lil_C: no C found below 1e6");
  }
  double lo = 0.0;
  for (int i = 0; i < 100 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid > 0.0 && lil_alpha(a, mid) <= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// C = 0.8 log(1612 / alpha); valid for A = 0.85 when the result is at least 7.
inline double lil_C_closed_form(double alpha) {
  detail::check_alpha(alpha);
  return 0.8 * std::log(1612.0 / alpha);
}

// A sqrt((log log(e t / m) + C) / t); infinite before t reaches m.
inline double lil_half_width(std::int64_t t, const LilConfig& cfg) {
  cfg.validate();
  detail::check_t(t);
  const double td = static_cast<double>(t);
  if (td < cfg.m_start) return kInf;
  return cfg.a_mult * std::sqrt((std::log(std::log(std::numbers::e * td / cfg.m_start)) + cfg.c_add) / td);
}

// ---------------------------------------------------------------------------
// Double stitching (all quantiles at once, p-dependent radius)

struct DoubleStitchConfig {
  double grid_delta = 0.5;
  double eta = 2.041;
  double s_exp = 1.4;
  double m_start = 1.0;
  double alpha = 0.05;

  static DoubleStitchConfig standard(double alpha, double m_start = 1.0) {
    return {0.5, 2.041, 1.4, m_start, alpha};
  }

  void validate() const {
    if (!(grid_delta > 0.0)) throw ConfigError("double stitching: delta must be positive");
    StitchConfig{eta, s_exp, m_start, alpha}.validate();
  }

  // 2 zeta(s) (2 zeta(s) + 1) / log^s(eta), the constant inside the log term
  double additive_constant() const {
    const double z = zeta(s_exp);
    return 2.0 * z * (2.0 * z + 1.0) / std::pow(std::log(eta), s_exp);
  }
};

inline double double_stitch_r(std::int64_t t, double p, const DoubleStitchConfig& cfg) {
  if (p >= 0.5) return p;
  const double tt = std::max(static_cast<double>(t), cfg.m_start);
  const double shifted =
      std::log(p / (1.0 - p)) + 2.0 * cfg.grid_delta * std::sqrt(cfg.m_start * cfg.eta / tt);
  return std::min(0.5, 1.0 / (1.0 + std::exp(-shifted)));
}

inline double double_stitch_radius(std::int64_t t, double p, const DoubleStitchConfig& cfg) {
  cfg.validate();
  detail::check_t(t);
  detail::check_open_unit(p, "double_stitch_radius p");
  const double tt = std::max(static_cast<double>(t), cfg.m_start);
  const double r = double_stitch_r(t, p, cfg);
  const double sigma2 = r * (1.0 - r);
  const double j =
      std::sqrt(tt / cfg.m_start) * std::fabs(std::log(p / (1.0 - p))) / (2.0 * cfg.grid_delta) + 1.0;
  const double ell = cfg.s_exp * std::log(std::log(cfg.eta * tt / cfg.m_start)) +
                     cfg.s_exp * std::log(j) +
                     std::log(cfg.additive_constant() / cfg.alpha);
  const double k1 = (std::pow(cfg.eta, 0.25) + std::pow(cfg.eta, -0.25)) / std::numbers::sqrt2;
  const double k2 = (std::sqrt(cfg.eta) + 1.0) / 2.0;
  const double c = (1.0 - 2.0 * p) / 3.0;
  const double g = cfg.grid_delta * std::sqrt(cfg.eta * tt * sigma2 / cfg.m_start) +
                   std::sqrt(k1 * k1 * sigma2 * tt * ell + k2 * k2 * c * c * ell * ell) +
                   c * k2 * ell;
  return g / static_cast<double>(t);
}

// ---------------------------------------------------------------------------
// Baselines

enum class BaselineKind { dkw_fixed, dr1968, szorenyi, dr1967, clt_pointwise, hoeffding_kl, linear_warmup };

inline double kl_bernoulli(double q, double p) {
  auto term = [](double a, double b) { return a > 0.0 ? a * std::log(a / b) : 0.0; };
  return term(q, p) + term(1.0 - q, 1.0 - p);
}

// Additive constant of the szorenyi radius: (1/2) log(pi^2 / (3 alpha)), 2.093 at alpha = 0.05.
inline double szorenyi_constant(double alpha) {
  return 0.5 * std::log(std::numbers::pi * std::numbers::pi / (3.0 * alpha));
}

inline double linear_radius(std::int64_t t, double lambda, double alpha) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  if (!(lambda > 0.0)) throw ConfigError("linear boundary: lambda must be positive");
  return std::log(1.0 / alpha) / (lambda * static_cast<double>(t)) + lambda / 8.0;
}

// m_tune only affects linear_warmup, whose lambda is chosen optimal at t = m_tune.
inline double baseline_radius(BaselineKind kind, std::int64_t t, double p, double alpha,
                              double m_tune = 32.0) {
  detail::check_t(t);
  detail::check_alpha(alpha);
  const double td = static_cast<double>(t);
  switch (kind) {
    case BaselineKind::dkw_fixed:
      return std::sqrt(std::log(2.0 / alpha) / (2.0 * td));
    case BaselineKind::dr1968:
      return std::sqrt((td + 1.0) * (2.0 * std::log(td) + 0.601) / (td * td));
    case BaselineKind::szorenyi:
      if (t < 32) throw DomainError("szorenyi radius needs t >= 32");
      return std::sqrt((std::log(td - 31.0) + szorenyi_constant(alpha)) / td);
    case BaselineKind::dr1967:
      if (t < 2) throw DomainError("dr1967 radius needs t >= 2");
      return 3.0 / (2.0 * std::numbers::sqrt2) * std::sqrt((std::log(std::log(td)) + 1.457) / td);
    case BaselineKind::clt_pointwise:
      detail::check_open_unit(p, "clt p");
      return normal_quantile(1.0 - alpha / 2.0) * std::sqrt(p * (1.0 - p) / td);
    case BaselineKind::hoeffding_kl: {
      detail::check_open_unit(p, "hoeffding_kl p");
      const double target = std::log(2.0 / alpha);
      if (td * kl_bernoulli(1.0, p) < target) return kInf;
      return last_true([&](double x) { return td * kl_bernoulli(p + x, p) < target; }, 0.0,
                       1.0 - p, 1e-15, 200);
    }
    case BaselineKind::linear_warmup:
      return linear_radius(t, std::sqrt(8.0 * std::log(1.0 / alpha) / m_tune), alpha);
  }
  throw DomainError("unknown baseline kind");
}

inline std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::dkw_fixed: return "dkw_fixed";
    case BaselineKind::dr1968: return "dr1968";
    case BaselineKind::szorenyi: return "szorenyi";
    case BaselineKind::dr1967: return "dr1967";
    case BaselineKind::clt_pointwise: return "clt_pointwise";
    case BaselineKind::hoeffding_kl: return "hoeffding_kl";
    case BaselineKind::linear_warmup: return "linear_warmup";
  }
  return "unknown";
}

}  // namespace qcs
