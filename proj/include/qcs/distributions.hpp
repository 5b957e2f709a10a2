#pragma once

// Arm distributions, the seeded generator, and the three benchmark scenarios.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qcs/errors.hpp"
#include "qcs/special.hpp"

namespace qcs {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of run `index` under base seed `seed`.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index));
}

// mt19937_64 plus explicit conversions, so streams match across platforms
// (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Box-Muller, cosine branch only.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct UniformDist {
  double a = 0.0;
  double b = 1.0;
};
struct CauchyDist {
  double loc = 0.0;
  double scale = 1.0;
};
struct NormalDist {
  double mu = 0.0;
  double sigma = 1.0;
};
struct CustomDist {
  std::function<double(double)> quantile;
};

class ArmSpec {
 public:
  using Dist = std::variant<UniformDist, CauchyDist, NormalDist, CustomDist>;

  explicit ArmSpec(Dist d) : dist_(std::move(d)) { validate(); }

  static ArmSpec uniform(double a, double b) { return ArmSpec(UniformDist{a, b}); }
  static ArmSpec cauchy(double loc, double scale) { return ArmSpec(CauchyDist{loc, scale}); }
  static ArmSpec normal(double mu, double sigma) { return ArmSpec(NormalDist{mu, sigma}); }
  static ArmSpec custom(std::function<double(double)> q) { return ArmSpec(CustomDist{std::move(q)}); }
  static ArmSpec point_mass(double x) { return uniform(x, x); }

  const Dist& dist() const { return dist_; }
  bool analytic() const { return !std::holds_alternative<CustomDist>(dist_); }

  double sample(Rng& rng) const {
    if (const auto* n = std::get_if<NormalDist>(&dist_)) return n->mu + n->sigma * rng.normal();
    return quantile_at(rng.uniform());
  }

  // Quantile on (0,1) for every kind; used for sampling.
  double quantile_at(double u) const {
    struct V {
      double u;
      double operator()(const UniformDist& d) const { return d.a + (d.b - d.a) * u; }
      double operator()(const CauchyDist& d) const {
        return d.loc + d.scale * std::tan(std::numbers::pi * (u - 0.5));
      }
      double operator()(const NormalDist& d) const { return d.mu + d.sigma * normal_quantile(u); }
      double operator()(const CustomDist& d) const { return d.quantile(u); }
    };
    return std::visit(V{u}, dist_);
  }

  // Q^-(u) = sup{x : F(x) < u}, including the endpoints u = 0 and u = 1.
  double lower_quantile(double u) const {
    if (!analytic()) throw UnsupportedError("arm has no analytic quantile function");
    if (u <= 0.0) return -kInf;
    if (u >= 1.0) {
      if (const auto* d = std::get_if<UniformDist>(&dist_)) return d->b;
      return kInf;
    }
    return quantile_at(u);
  }

  std::string describe() const {
    std::ostringstream out;
    out.precision(17);
    if (const auto* d = std::get_if<UniformDist>(&dist_)) out << "uniform(" << d->a << "," << d->b << ")";
    if (const auto* d = std::get_if<CauchyDist>(&dist_)) out << "cauchy(" << d->loc << "," << d->scale << ")";
    if (const auto* d = std::get_if<NormalDist>(&dist_)) out << "normal(" << d->mu << "," << d->sigma << ")";
    if (std::holds_alternative<CustomDist>(dist_)) out << "custom";
    return out.str();
  }

 private:
  void validate() const {
    if (const auto* d = std::get_if<UniformDist>(&dist_); d && !(d->a <= d->b)) {
      throw ConfigError("uniform arm needs a <= b");
    }
    if (const auto* d = std::get_if<CauchyDist>(&dist_); d && !(d->scale > 0.0)) {
      throw ConfigError("cauchy arm needs a positive scale");
    }
    if (const auto* d = std::get_if<NormalDist>(&dist_); d && !(d->sigma > 0.0)) {
      throw ConfigError("normal arm needs a positive sigma");
    }
    if (const auto* d = std::get_if<CustomDist>(&dist_); d && !d->quantile) {
      throw ConfigError("custom arm needs a quantile function");
    }
  }

  Dist dist_;
};

enum class Scenario { uniform_shift, cauchy_shift, normal_scale };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::uniform_shift: return "uniform_shift";
    case Scenario::cauchy_shift: return "cauchy_shift";
    case Scenario::normal_scale: return "normal_scale";
  }
  return "unknown";
}

inline Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::uniform_shift, Scenario::cauchy_shift, Scenario::normal_scale}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) +
                    "' (expected uniform_shift, cauchy_shift or normal_scale)");
}

inline double cauchy_quantile(double u) { return std::tan(std::numbers::pi * (u - 0.5)); }

// k - 1 standard arms followed by one exceptional arm (index k - 1).
inline std::vector<ArmSpec> make_scenario(Scenario s, double pi, double eps, int k = 10) {
  if (k < 2) throw ConfigError("scenario needs at least two arms");
  std::vector<ArmSpec> arms;
  arms.reserve(static_cast<std::size_t>(k));
  switch (s) {
    case Scenario::uniform_shift:
      for (int i = 0; i + 1 < k; ++i) arms.push_back(ArmSpec::uniform(0.0, 1.0));
      arms.push_back(ArmSpec::uniform(2.0 * eps, 1.0 + 2.0 * eps));
      break;
    case Scenario::cauchy_shift:
      for (int i = 0; i + 1 < k; ++i) arms.push_back(ArmSpec::cauchy(0.0, 1.0));
      arms.push_back(ArmSpec::cauchy(2.0 * (cauchy_quantile(pi + eps) - cauchy_quantile(pi)), 1.0));
      break;
    case Scenario::normal_scale:
      for (int i = 0; i + 1 < k; ++i) arms.push_back(ArmSpec::normal(0.0, 1.0));
      arms.push_back(ArmSpec::normal(0.0, 2.0));
      break;
  }
  return arms;
}

}  // namespace qcs
