#pragma once

// Confidence-sequence trackers built from an OrderedMultiset and a radius.
// Bounds are always realized order statistics or the two sentinels.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "qcs/boundaries.hpp"
#include "qcs/errors.hpp"
#include "qcs/extended.hpp"
#include "qcs/ordered_multiset.hpp"

namespace qcs {

// Radius families usable for a single quantile.
struct SimpleStitch {
  double alpha = 0.05;
};
struct BetaBinomial {
  double r = 1.0;
  double alpha = 0.05;
};
struct NormalMixture {
  double r = 0.504;
  double alpha = 0.05;
};
using FixedMethod = std::variant<SimpleStitch, StitchConfig, BetaBinomial, NormalMixture>;

// (t, p) -> radius in probability units
using RadiusFn = std::function<double(std::int64_t, double)>;

inline double fixed_radius(const FixedMethod& method, std::int64_t t, double p) {
  struct Visitor {
    std::int64_t t;
    double p;
    double operator()(const SimpleStitch& m) const { return simple_stitched_radius(t, p, m.alpha); }
    double operator()(const StitchConfig& m) const { return stitched_radius(t, p, m); }
    double operator()(const BetaBinomial& m) const { return beta_binomial_radius(t, p, m.r, m.alpha); }
    double operator()(const NormalMixture& m) const { return normal_mixture_radius(t, m.r, m.alpha); }
  };
  return std::visit(Visitor{t, p}, method);
}

inline RadiusFn radius_function(FixedMethod method) {
  return [method = std::move(method)](std::int64_t t, double p) { return fixed_radius(method, t, p); };
}

// Precomputes radii for t = 1..horizon at each listed level; other queries
// fall through to direct evaluation. Copies share the table.
inline RadiusFn tabulated_radius(FixedMethod method, std::vector<double> levels, std::int64_t horizon) {
  auto table = std::make_shared<std::vector<std::vector<double>>>();
  for (double p : levels) {
    std::vector<double> row(static_cast<std::size_t>(horizon));
    for (std::int64_t t = 1; t <= horizon; ++t) row[t - 1] = fixed_radius(method, t, p);
    table->push_back(std::move(row));
  }
  return [method = std::move(method), levels = std::move(levels), table, horizon](std::int64_t t,
                                                                                double p) {
    if (t >= 1 && t <= horizon) {
      for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == p) return (*table)[i][t - 1];
      }
    }
    return fixed_radius(method, t, p);
  };
}

// Memoizes radii as they are requested. Copies share the cache, so keep one
// per thread.
inline RadiusFn lazy_radius(FixedMethod method) {
  auto cache = std::make_shared<std::vector<std::pair<double, std::vector<double>>>>();
  return [method = std::move(method), cache](std::int64_t t, double p) {
    if (t < 1) return fixed_radius(method, t, p);
    auto it = std::find_if(cache->begin(), cache->end(), [p](const auto& e) { return e.first == p; });
    if (it == cache->end()) {
      cache->emplace_back(p, std::vector<double>{});
      it = std::prev(cache->end());
    }
    auto& row = it->second;
    const auto idx = static_cast<std::size_t>(t - 1);
    if (idx >= row.size()) row.resize(std::max(idx + 1, 2 * row.size()), -1.0);
    if (row[idx] < 0.0) row[idx] = fixed_radius(method, t, p);
    return row[idx];
  };
}

template <class T>
struct Bounds {
  Extended<T> lower;
  Extended<T> upper;
};

template <class T>
struct IntersectedBounds {
  Extended<T> lower;
  Extended<T> upper;
  bool empty;
};

// Confidence sequence for one quantile level p.
template <class T = double>
class FixedQuantileCS {
 public:
  FixedQuantileCS(double p, const FixedMethod& method, bool intersect = false)
      : FixedQuantileCS(p, radius_function(method), intersect) {}

  FixedQuantileCS(double p, RadiusFn radius, bool intersect = false)
      : p_(p), radius_(std::move(radius)), intersect_(intersect) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0,1)");
  }

  void insert(const T& x) {
    data_.insert(x);
    if (intersect_) {
      const Bounds<T> b = bounds();
      if (!running_) {
        running_ = b;
      } else {
        running_->lower = max(running_->lower, b.lower);
        running_->upper = min(running_->upper, b.upper);
      }
    }
  }

  double p() const { return p_; }
  std::int64_t size() const { return data_.size(); }
  const OrderedMultiset<T>& data() const { return data_; }

  // f_t(1-p) and f_t(p) at the current t
  double lower_radius() const { return radius_(checked_t(), 1.0 - p_); }
  double upper_radius() const { return radius_(checked_t(), p_); }

  Bounds<T> bounds() const {
    return {data_.upper_quantile(p_ - lower_radius()), data_.lower_quantile(p_ + upper_radius())};
  }

  IntersectedBounds<T> intersected() const {
    if (!intersect_) throw StateError("running intersection was not enabled");
    if (!running_) throw StateError("no observations yet");
    return {running_->lower, running_->upper, running_->upper < running_->lower};
  }

  Extended<T> point_estimate() const { return data_.upper_quantile(p_); }

 private:
  std::int64_t checked_t() const {
    if (data_.empty()) throw StateError("no observations yet");
    return data_.size();
  }

  double p_;
  RadiusFn radius_;
  bool intersect_;
  OrderedMultiset<T> data_;
  std::optional<Bounds<T>> running_;
};

// Builds a LilConfig whose C gives error probability alpha.
inline LilConfig lil_config_for(double a_mult, double alpha, double m_start = 1.0) {
  return LilConfig{a_mult, lil_C(a_mult, alpha), m_start};
}

using UniformMethod = std::variant<LilConfig, DoubleStitchConfig>;

// Confidence sequence valid for all quantile levels simultaneously.
template <class T = double>
class QuantileUniformCS {
 public:
  explicit QuantileUniformCS(UniformMethod method) : method_(std::move(method)) {
    std::visit([](const auto& cfg) { cfg.validate(); }, method_);
  }

  void insert(const T& x) { data_.insert(x); }
  std::int64_t size() const { return data_.size(); }
  const OrderedMultiset<T>& data() const { return data_; }
  const UniformMethod& method() const { return method_; }

  Bounds<T> bounds(double p) const {
    if (data_.empty()) throw StateError("no observations yet");
    const std::int64_t t = data_.size();
    if (const auto* lil = std::get_if<LilConfig>(&method_)) {
      const double g = lil_half_width(t, *lil);
      return {data_.lower_quantile(p - g), data_.upper_quantile(p + g)};
    }
    const auto& ds = std::get<DoubleStitchConfig>(method_);
    return {data_.upper_quantile(p - double_stitch_radius(t, 1.0 - p, ds)),
            data_.lower_quantile(p + double_stitch_radius(t, p, ds))};
  }

 private:
  UniformMethod method_;
  OrderedMultiset<T> data_;
};

struct BandPoint {
  double ecdf;
  double lo;
  double hi;
};

// Confidence band for the whole CDF with constant half-width.
template <class T = double>
class CdfBand {
 public:
  explicit CdfBand(LilConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void insert(const T& x) { data_.insert(x); }
  std::int64_t size() const { return data_.size(); }
  const OrderedMultiset<T>& data() const { return data_; }
  const LilConfig& config() const { return cfg_; }

  double half_width() const {
    if (data_.empty()) throw QueryError("band on an empty sample");
    return lil_half_width(data_.size(), cfg_);
  }

  BandPoint at(const T& x) const {
    const double f = data_.cdf_at(x).f;
    return clamp_band(f, half_width());
  }

  // The band at every distinct observed value, in increasing order.
  std::vector<std::pair<T, BandPoint>> export_band() const {
    std::vector<std::pair<T, BandPoint>> out;
    if (data_.empty()) return out;
    const double w = half_width();
    const double t = static_cast<double>(data_.size());
    std::int64_t cum = 0;
    data_.for_each([&](const T& v, std::int64_t m) {
      cum += m;
      out.emplace_back(v, clamp_band(cum / t, w));
    });
    return out;
  }

 private:
  static BandPoint clamp_band(double f, double w) {
    return {f, std::max(0.0, f - w), std::min(1.0, f + w)};
  }

  LilConfig cfg_;
  OrderedMultiset<T> data_;
};

}  // namespace qcs
