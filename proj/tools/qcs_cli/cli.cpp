#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qcs/qcs.hpp"

namespace qcs::cli {
namespace {

// Malformed input or an unknown label.
class IngestError : public Error {
 public:
  using Error::Error;
};

enum class Format { csv, json };

using Cell = std::variant<std::string, double, std::int64_t, bool>;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_cell(const Cell& c) {
  struct V {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
  };
  return std::visit(V{}, c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_double(*d);
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const bool* b = std::get_if<bool>(&c)) return *b;
  return std::get<std::string>(c);
}

Cell ext(const Extended<double>& e) { return e.to_scalar(); }

// Rows go straight to the stream for CSV; JSON is written on finish().
class Sink {
 public:
  Sink(std::ostream& os, Format fmt) : os_(os), fmt_(fmt) {}

  void meta(const std::string& key, const Cell& value) {
    if (fmt_ == Format::csv) {
      os_ << "# " << key << '=' << format_cell(value) << '\n';
    } else {
      doc_["meta"][key] = json_cell(value);
    }
  }

  void columns(std::vector<std::string> cols) {
    cols_ = std::move(cols);
    if (fmt_ == Format::csv) {
      for (std::size_t i = 0; i < cols_.size(); ++i) os_ << (i ? "," : "") << cols_[i];
      os_ << '\n';
    }
  }

  void row(const std::vector<Cell>& cells) {
    if (fmt_ == Format::csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << format_cell(cells[i]);
      os_ << '\n';
      return;
    }
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < cells.size(); ++i) r[cols_.at(i)] = json_cell(cells[i]);
    rows_.push_back(std::move(r));
  }

  void finish() {
    if (fmt_ == Format::json) {
      if (!doc_.contains("meta")) doc_["meta"] = nlohmann::ordered_json::object();
      doc_["columns"] = cols_;
      doc_["rows"] = rows_;
      os_ << doc_.dump(2) << '\n';
    }
    os_.flush();
  }

 private:
  std::ostream& os_;
  Format fmt_;
  std::vector<std::string> cols_;
  nlohmann::ordered_json doc_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json rows_ = nlohmann::ordered_json::array();
};

// ---------------------------------------------------------------------------
// Parsing helpers

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split(s)) {
    const auto v = to_double(item);
    if (!v) throw ConfigError("bad number '" + item + "' in " + what);
    out.push_back(*v);
  }
  return out;
}

std::vector<std::int64_t> parse_times(const std::string& s) {
  std::vector<std::int64_t> out;
  for (double v : parse_doubles(s, "time list")) {
    if (!(v >= 1.0) || v != std::floor(v) || v > 9e15) throw ConfigError("times must be positive integers");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

double parse_observation(std::string_view text, std::int64_t line_no) {
  const auto v = to_double(text);
  if (!v || std::isnan(*v)) {
    throw IngestError("line " + std::to_string(line_no) + ": not a number: '" + std::string(trim(text)) + "'");
  }
  return *v;
}

// Calls f(line_no, text) for every non-blank line.
template <class F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    f(line_no, std::string_view(line));
  }
}

std::pair<std::string, double> parse_labeled(std::string_view line, std::int64_t line_no) {
  const auto comma = line.find(',');
  if (comma == std::string_view::npos) {
    throw IngestError("line " + std::to_string(line_no) + ": expected 'label,value'");
  }
  return {std::string(trim(line.substr(0, comma))), parse_observation(line.substr(comma + 1), line_no)};
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label, std::int64_t line_no) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  throw IngestError("line " + std::to_string(line_no) + ": unknown label '" + label + "'");
}

// "uniform(a,b)", "normal(mu,sigma)" or "cauchy(loc,scale)"
std::function<double(double)> parse_reference(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close != text.size() - 1) {
    throw ConfigError("reference must look like name(a,b), got '" + text + "'");
  }
  const std::string name(trim(std::string_view(text).substr(0, open)));
  const std::vector<double> args = parse_doubles(text.substr(open + 1, close - open - 1), "reference");
  if (args.size() != 2) throw ConfigError("reference distribution takes two parameters");
  const double a = args[0];
  const double b = args[1];
  if (name == "uniform") {
    if (!(a < b)) throw ConfigError("uniform reference needs a < b");
    return [a, b](double x) { return std::clamp((x - a) / (b - a), 0.0, 1.0); };
  }
  if (name == "normal") {
    if (!(b > 0)) throw ConfigError("normal reference needs sigma > 0");
    return [a, b](double x) { return normal_cdf((x - a) / b); };
  }
  if (name == "cauchy") {
    if (!(b > 0)) throw ConfigError("cauchy reference needs scale > 0");
    return [a, b](double x) { return 0.5 + std::atan((x - a) / b) / std::numbers::pi; };
  }
  throw ConfigError("unknown reference distribution '" + name + "' (expected uniform, normal or cauchy)");
}

std::uint64_t default_seed() {
  const char* env = std::getenv("QCS_SEED");
  if (!env || !*env) return 0;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("QCS_SEED must be an unsigned 64-bit integer");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Options shared by all subcommands

struct Common {
  std::string format = "csv";
  std::string out_path;
  std::string input_path;
  double alpha = 0.05;
};

struct BoundsOpts {
  std::string methods = "stitched,beta_binomial,lil_uniform,double_stitch,dkw_fixed";
  std::string p = "0.5";
  std::string t = "32,100,1000,10000,100000,1000000";
  std::optional<double> tune_m;
  std::optional<double> r;
  double a_mult = 0.85;
  double normal_r = 0.504;
};

struct TrackOpts {
  double p = 0.5;
  std::string method = "stitched";
  std::optional<double> r;
  double tune_m = 32.0;
  double normal_r = 0.504;
  bool intersect = false;
};

struct BandOpts {
  double a_mult = 0.85;
  double m = 1.0;
  std::optional<double> c_add;
  std::string checkpoints;
};

struct AbOpts {
  std::string mode = "two_sided";
  double p = 0.5;
  std::optional<double> r;
  double tune_m = 32.0;
  double delta_star = 0.0;
  std::string arms = "A,B";
  bool running_min = false;
  bool simulate = false;
  std::string scenario = "uniform_shift";
  double eps = 0.025;
  int runs = 32;
  std::int64_t max_per_arm = 1'000'000;
  unsigned threads = 0;
};

struct KsOpts {
  std::string mode = "one_sample";
  double a_mult = 0.85;
  double m = 1.0;
  std::string reference = "uniform(0,1)";
  std::string arms = "X,Y";
  bool latch = false;
};

struct BaiOpts {
  std::string scenario = "uniform_shift";
  std::string pi;
  double eps = 0.025;
  double delta = 0.05;
  std::string kinds = "stitched_qlucb,beta_binomial_one_sided";
  int runs = 64;
  int k_arms = 10;
  std::int64_t max_rounds = 1'000'000;
  unsigned threads = 0;
  double tune_m = 32.0;
};

const std::set<std::string> kFlagKeys = {"intersect", "running-min", "simulate", "latch"};

// Splices `key = value` lines from a --config file in front of the other
// arguments so that explicit flags, which come later, win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<std::string> from_file;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (kFlagKeys.count(key)) {
      if (value == "true" || value == "1" || value == "yes") from_file.push_back("--" + key);
    } else {
      from_file.push_back("--" + key + "=" + value);
    }
  }
  if (rest.empty() || rest.front().rfind("-", 0) == 0) {
    from_file.insert(from_file.end(), rest.begin(), rest.end());
    return from_file;
  }
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_bounds(const Common& c, const BoundsOpts& o, Sink& sink) {
  static const std::vector<std::string> valid = {"stitched",     "beta_binomial", "normal_mixture", "lil_uniform",
                                                 "double_stitch", "dkw_fixed",    "dr1967",         "dr1968",
                                                 "szorenyi",      "clt_pointwise", "hoeffding_kl"};
  const std::vector<std::string> methods = split(o.methods);
  for (const std::string& m : methods) {
    if (std::find(valid.begin(), valid.end(), m) == valid.end()) {
      std::string list;
      for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
      throw CLI::ValidationError("--methods", "unknown method '" + m + "' (valid: " + list + ")");
    }
  }
  const std::vector<double> ps = parse_doubles(o.p, "--p");
  const std::vector<std::int64_t> ts = parse_times(o.t);
  const auto has = [&](const char* name) { return std::find(methods.begin(), methods.end(), name) != methods.end(); };
  const double m_start = o.tune_m.value_or(1.0);

  sink.meta("alpha", c.alpha);
  if (o.tune_m) sink.meta("tune_m", *o.tune_m);
  std::map<double, double> bb_r;
  if (has("beta_binomial")) {
    for (double p : ps) {
      bb_r[p] = o.r ? *o.r : tune_r(o.tune_m.value_or(32.0), p, c.alpha);
      sink.meta(ps.size() == 1 ? std::string("r") : "r_p" + format_double(p), bb_r[p]);
    }
  }
  std::optional<LilConfig> lil;
  if (has("lil_uniform")) {
    lil = lil_config_for(o.a_mult, c.alpha, m_start);
    sink.meta("lil_C", lil->c_add);
  }
  if (has("normal_mixture")) sink.meta("normal_r", o.normal_r);
  const DoubleStitchConfig ds = DoubleStitchConfig::standard(c.alpha, m_start);
  const StitchConfig stitch{2.04, 1.4, m_start, c.alpha};

  sink.columns({"t", "p", "method", "radius", "radius_times_sqrt_t"});
  for (double p : ps) {
    for (const std::string& m : methods) {
      for (std::int64_t t : ts) {
        double radius;
        try {
          if (m == "stitched") {
            radius = o.tune_m ? stitched_radius(t, p, stitch) : simple_stitched_radius(t, p, c.alpha);
          } else if (m == "beta_binomial") {
            radius = beta_binomial_radius(t, p, bb_r.at(p), c.alpha);
          } else if (m == "normal_mixture") {
            radius = normal_mixture_radius(t, o.normal_r, c.alpha);
          } else if (m == "lil_uniform") {
            radius = lil_half_width(t, *lil);
          } else if (m == "double_stitch") {
            radius = double_stitch_radius(t, p, ds);
          } else {
            static const std::map<std::string, BaselineKind> kinds = {
                {"dkw_fixed", BaselineKind::dkw_fixed},     {"dr1967", BaselineKind::dr1967},
                {"dr1968", BaselineKind::dr1968},           {"szorenyi", BaselineKind::szorenyi},
                {"clt_pointwise", BaselineKind::clt_pointwise}, {"hoeffding_kl", BaselineKind::hoeffding_kl}};
            radius = baseline_radius(kinds.at(m), t, p, c.alpha);
          }
        } catch (const DomainError&) {
          // szorenyi before t = 32 and dr1967 at t = 1 have no finite radius
          radius = kInf;
        }
        sink.row({static_cast<std::int64_t>(t), p, m, radius, radius * std::sqrt(static_cast<double>(t))});
      }
    }
  }
}

FixedMethod track_method(const Common& c, const TrackOpts& o, Sink& sink) {
  if (o.method == "stitched") return SimpleStitch{c.alpha};
  if (o.method == "normal_mixture") {
    sink.meta("normal_r", o.normal_r);
    return NormalMixture{o.normal_r, c.alpha};
  }
  if (o.method == "beta_binomial") {
    // one r serves both sides, tuned at the nearer-to-1/2 level
    const double r = o.r ? *o.r : tune_r(o.tune_m, o.p, c.alpha);
    sink.meta("r", r);
    return BetaBinomial{r, c.alpha};
  }
  throw CLI::ValidationError("--method", "unknown method '" + o.method +
                                             "' (valid: stitched, beta_binomial, normal_mixture)");
}

void cmd_track(const Common& c, const TrackOpts& o, std::istream& in, Sink& sink) {
  sink.meta("p", o.p);
  sink.meta("method", o.method);
  sink.meta("alpha", c.alpha);
  FixedQuantileCS<double> cs(o.p, track_method(c, o, sink), o.intersect);
  std::vector<std::string> cols = {"t", "x", "lower", "upper", "point_estimate"};
  if (o.intersect) cols.push_back("empty");
  sink.columns(cols);
  for_each_line(in, [&](std::int64_t line_no, std::string_view line) {
    const double x = parse_observation(line, line_no);
    cs.insert(x);
    const auto t = static_cast<std::int64_t>(cs.size());
    if (o.intersect) {
      const IntersectedBounds<double> b = cs.intersected();
      sink.row({t, x, ext(b.lower), ext(b.upper), ext(cs.point_estimate()), b.empty});
    } else {
      const Bounds<double> b = cs.bounds();
      sink.row({t, x, ext(b.lower), ext(b.upper), ext(cs.point_estimate())});
    }
  });
}

void cmd_band(const Common& c, const BandOpts& o, std::istream& in, Sink& sink) {
  double c_add;
  if (o.c_add) {
    c_add = *o.c_add;
  } else if (o.a_mult == 0.85 && lil_C_closed_form(c.alpha) >= 7.0) {
    c_add = lil_C_closed_form(c.alpha);
  } else {
    c_add = lil_C(o.a_mult, c.alpha);
  }
  sink.meta("alpha", c.alpha);
  sink.meta("A", o.a_mult);
  sink.meta("C", c_add);
  sink.meta("m", o.m);
  std::vector<std::int64_t> checkpoints = parse_times(o.checkpoints);
  std::sort(checkpoints.begin(), checkpoints.end());
  CdfBand<double> band(LilConfig{o.a_mult, c_add, o.m});
  sink.columns({"t", "x", "ecdf", "lo", "hi", "width"});
  const auto emit = [&] {
    const double w = band.half_width();
    for (const auto& [x, pt] : band.export_band()) {
      sink.row({static_cast<std::int64_t>(band.size()), x, pt.ecdf, pt.lo, pt.hi, w});
    }
  };
  std::size_t next = 0;
  for_each_line(in, [&](std::int64_t line_no, std::string_view line) {
    band.insert(parse_observation(line, line_no));
    while (next < checkpoints.size() && checkpoints[next] < band.size()) ++next;
    if (next < checkpoints.size() && checkpoints[next] == band.size()) emit();
  });
  if (checkpoints.empty() && !band.data().empty()) emit();
}

void cmd_ab_simulate(const Common& c, const AbOpts& o, std::uint64_t seed, Sink& sink) {
  AbSimConfig cfg;
  cfg.scenario = parse_scenario(o.scenario);
  cfg.pi = o.p;
  cfg.eps = o.eps;
  cfg.alpha = c.alpha;
  cfg.tune_m = o.tune_m;
  cfg.runs = o.runs;
  cfg.seed = seed;
  cfg.max_per_arm = o.max_per_arm;
  cfg.threads = o.threads;
  cfg.validate();
  const std::vector<ArmSpec> arms = make_scenario(cfg.scenario, cfg.pi, cfg.eps, 2);
  sink.meta("seed", static_cast<std::int64_t>(seed));
  sink.meta("scenario", std::string(to_string(cfg.scenario)));
  sink.meta("arm0", arms[0].describe());
  sink.meta("arm1", arms[1].describe());
  sink.meta("pi", cfg.pi);
  sink.meta("eps", cfg.eps);
  sink.meta("alpha", cfg.alpha);
  sink.meta("test_r", cfg.test_r());
  sink.meta("naive_r", cfg.naive_r());
  sink.meta("runs", static_cast<std::int64_t>(cfg.runs));
  const AbSimSummary s = ab_simulation(cfg);
  sink.columns({"run", "test_T", "naive_T", "test_capped", "naive_capped"});
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const AbSimRun& r = s.runs[i];
    sink.row({static_cast<std::int64_t>(i), r.test_T, r.naive_T, r.test_capped, r.naive_capped});
  }
  sink.meta("mean_test_T", s.mean_test_T);
  sink.meta("mean_naive_T", s.mean_naive_T);
  sink.meta("ratio", s.mean_test_T / s.mean_naive_T);
}

void cmd_abtest(const Common& c, const AbOpts& o, std::uint64_t seed, std::istream& in, Sink& sink) {
  if (o.simulate) {
    cmd_ab_simulate(c, o, seed, sink);
    return;
  }
  const std::vector<std::string> labels = split(o.arms);
  if (labels.size() < 2) throw CLI::ValidationError("--arms", "need at least two labels");
  if (o.mode != "global" && labels.size() != 2) {
    throw CLI::ValidationError("--arms", o.mode + " takes exactly two labels");
  }
  if (o.mode != "two_sided" && o.mode != "one_sided" && o.mode != "global") {
    throw CLI::ValidationError("--mode", "unknown mode '" + o.mode + "' (valid: two_sided, one_sided, global)");
  }
  const double r = o.r ? *o.r : tune_r(o.tune_m, o.p, c.alpha);
  sink.meta("mode", o.mode);
  sink.meta("p", o.p);
  sink.meta("r", r);
  if (o.mode != "global") sink.meta("delta_star", o.delta_star);
  sink.meta("alpha", c.alpha);
  sink.columns({"t", "label", "stat", "pvalue", "reject"});

  AbTestState state(o.p, r, o.delta_star, c.alpha);
  std::vector<Sample> arms(labels.size());
  double running = 1.0;
  std::int64_t t = 0;
  for_each_line(in, [&](std::int64_t line_no, std::string_view line) {
    const auto [label, x] = parse_labeled(line, line_no);
    const std::size_t k = label_index(labels, label, line_no);
    ++t;
    double stat = 0.0;
    double pvalue = 1.0;
    if (o.mode == "global") {
      arms[k].insert(x);
      const bool ready = std::none_of(arms.begin(), arms.end(), [](const Sample& a) { return a.empty(); });
      if (ready) {
        const std::span<const Sample> treatments(arms.data() + 1, arms.size() - 1);
        stat = global_null_stat(arms[0], treatments, o.p, r);
        pvalue = std::min(1.0, static_cast<double>(treatments.size()) * std::exp(-stat));
      }
    } else {
      state.insert(static_cast<int>(k), x);
      if (!state.arm(0).empty() && !state.arm(1).empty()) {
        const TestResult res = o.mode == "two_sided" ? state.two_sided() : state.one_sided();
        stat = res.stat;
        pvalue = res.pvalue;
      }
    }
    running = std::min(running, pvalue);
    const double shown = o.running_min ? running : pvalue;
    sink.row({t, label, stat, shown, shown <= c.alpha});
  });
}

void cmd_ks(const Common& c, const KsOpts& o, std::istream& in, Sink& sink) {
  KsMode mode;
  if (o.mode == "one_sample") {
    mode = KsMode::one_sample;
  } else if (o.mode == "two_sample") {
    mode = KsMode::two_sample;
  } else if (o.mode == "dominance") {
    mode = KsMode::dominance;
  } else {
    throw CLI::ValidationError("--mode", "unknown mode '" + o.mode + "' (valid: one_sample, two_sample, dominance)");
  }
  const std::vector<std::string> labels = split(o.arms);
  if (mode != KsMode::one_sample && labels.size() != 2) throw CLI::ValidationError("--arms", "need two labels");
  KsTestState state(mode, o.a_mult, c.alpha, o.m, mode == KsMode::one_sample ? parse_reference(o.reference) : std::function<double(double)>{});
  sink.meta("mode", o.mode);
  sink.meta("A", o.a_mult);
  sink.meta("alpha", c.alpha);
  sink.meta("m", o.m);
  sink.meta("C", state.c_add());
  if (mode == KsMode::one_sample) sink.meta("reference", o.reference);
  sink.columns({"t", "stat", "threshold", "reject"});
  bool latched = false;
  const auto emit = [&] {
    const KsResult r = state.evaluate();
    latched = latched || r.reject;
    sink.row({static_cast<std::int64_t>(state.x().size()), r.stat, r.threshold, o.latch ? latched : r.reject});
  };
  for_each_line(in, [&](std::int64_t line_no, std::string_view line) {
    if (mode == KsMode::one_sample) {
      state.insert_x(parse_observation(line, line_no));
      emit();
      return;
    }
    const auto [label, x] = parse_labeled(line, line_no);
    if (label_index(labels, label, line_no) == 0) {
      state.insert_x(x);
    } else {
      state.insert_y(x);
    }
    if (state.x().size() == state.y().size()) emit();
  });
  if (mode != KsMode::one_sample && state.x().size() != state.y().size()) {
    throw PairingError("input ended with " + std::to_string(state.x().size()) + " '" + labels[0] +
                       "' and " + std::to_string(state.y().size()) + " '" + labels[1] + "' observations");
  }
}

void cmd_bai(const BaiOpts& o, std::uint64_t seed, Sink& sink) {
  BenchmarkConfig bc;
  bc.scenario = parse_scenario(o.scenario);
  if (!o.pi.empty()) bc.pi_list = parse_doubles(o.pi, "--pi");
  bc.eps = o.eps;
  bc.delta_err = o.delta;
  bc.kinds.clear();
  for (const std::string& k : split(o.kinds)) bc.kinds.push_back(parse_cs_kind(k));
  bc.runs = o.runs;
  bc.seed = seed;
  bc.K = o.k_arms;
  bc.max_rounds = o.max_rounds;
  bc.threads = o.threads;
  bc.tune_m = o.tune_m;
  if (bc.runs < 1) throw ConfigError("runs must be at least 1");
  sink.meta("seed", static_cast<std::int64_t>(seed));
  sink.meta("scenario", std::string(to_string(bc.scenario)));
  sink.meta("eps", bc.eps);
  sink.meta("delta", bc.delta_err);
  sink.meta("K", static_cast<std::int64_t>(bc.K));
  sink.meta("max_rounds", bc.max_rounds);
  sink.columns({"scenario", "pi", "cs_kind", "runs", "mean_T", "median_T", "correct_rate", "capped"});
  for (const BenchmarkRow& r : bai_benchmark(bc)) {
    sink.row({std::string(to_string(r.scenario)), r.pi, std::string(to_string(r.kind)),
              static_cast<std::int64_t>(r.runs), r.mean_T, r.median_T, r.correct_rate,
              static_cast<std::int64_t>(r.capped)});
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anytime-valid confidence sequences for quantiles", "qcs"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;
  std::optional<std::uint64_t> seed;
  const auto add_common = [&](CLI::App* sub, bool stochastic, bool reads_input) {
    sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", common.out_path, "write here instead of stdout");
    sub->add_option("--alpha", common.alpha, "error level")->check(CLI::Range(0.0, 1.0));
    if (reads_input) sub->add_option("--input", common.input_path, "read observations from a file");
    if (stochastic) sub->add_option("--seed", seed, "RNG seed (default $QCS_SEED or 0)");
  };

  BoundsOpts bo;
  auto* bounds = app.add_subcommand("bounds", "radius tables for every boundary family");
  add_common(bounds, false, false);
  bounds->add_option("--methods", bo.methods, "comma-separated method names");
  bounds->add_option("--p", bo.p, "comma-separated quantile levels");
  bounds->add_option("--t", bo.t, "comma-separated sample sizes");
  bounds->add_option("--tune-m", bo.tune_m, "tune r for, or start boundaries at, this time");
  bounds->add_option("--r", bo.r, "beta-binomial r (overrides tuning)");
  bounds->add_option("--A", bo.a_mult, "lil_uniform leading constant");
  bounds->add_option("--normal-r", bo.normal_r, "normal mixture r");

  TrackOpts to;
  auto* track = app.add_subcommand("track", "confidence sequence for one quantile over a stream");
  add_common(track, false, true);
  track->add_option("--p", to.p, "quantile level");
  track->add_option("--method", to.method, "stitched, beta_binomial or normal_mixture");
  track->add_option("--r", to.r, "beta-binomial r (overrides tuning)");
  track->add_option("--tune-m", to.tune_m, "time the beta-binomial r is tuned for");
  track->add_option("--normal-r", to.normal_r, "normal mixture r");
  track->add_flag("--intersect", to.intersect, "report the running intersection");

  BandOpts bd;
  auto* band = app.add_subcommand("band", "confidence band for the CDF");
  add_common(band, false, true);
  band->add_option("--A", bd.a_mult, "leading constant");
  band->add_option("--m", bd.m, "start time");
  band->add_option("--C", bd.c_add, "additive constant (default: solved from alpha)");
  band->add_option("--checkpoints", bd.checkpoints, "comma-separated times to emit the band (default: end)");

  AbOpts ab;
  auto* abtest = app.add_subcommand("abtest", "sequential two-sample quantile tests");
  add_common(abtest, true, true);
  abtest->add_option("--mode", ab.mode, "two_sided, one_sided or global");
  abtest->add_option("--p", ab.p, "quantile level");
  abtest->add_option("--r", ab.r, "mixture r (default: tuned)");
  abtest->add_option("--tune-m", ab.tune_m, "time r is tuned for");
  abtest->add_option("--delta-star", ab.delta_star, "hypothesized Q2(p) - Q1(p)");
  abtest->add_option("--arms", ab.arms, "comma-separated labels; the first is arm 1 / control");
  abtest->add_flag("--running-min", ab.running_min, "report the running minimum p-value");
  abtest->add_flag("--simulate", ab.simulate, "compare against stopping on disjoint per-arm intervals");
  abtest->add_option("--scenario", ab.scenario, "simulation scenario");
  abtest->add_option("--eps", ab.eps, "scenario shift parameter");
  abtest->add_option("--runs", ab.runs, "simulation runs");
  abtest->add_option("--max-per-arm", ab.max_per_arm, "simulation cap per arm");
  abtest->add_option("--threads", ab.threads, "worker threads (0 = all cores)");

  KsOpts ko;
  auto* ks = app.add_subcommand("ks", "sequential Kolmogorov-Smirnov tests");
  add_common(ks, false, true);
  ks->add_option("--mode", ko.mode, "one_sample, two_sample or dominance");
  ks->add_option("--A", ko.a_mult, "leading constant");
  ks->add_option("--m", ko.m, "start time");
  ks->add_option("--reference", ko.reference, "uniform(a,b), normal(mu,sigma) or cauchy(loc,scale)");
  ks->add_option("--arms", ko.arms, "labels of the two paired samples");
  ks->add_flag("--latch", ko.latch, "keep rejecting once rejected");

  BaiOpts bai;
  auto* bai_cmd = app.add_subcommand("bai", "QLUCB best-arm identification benchmark");
  add_common(bai_cmd, true, false);
  bai_cmd->add_option("--scenario", bai.scenario, "uniform_shift, cauchy_shift or normal_scale");
  bai_cmd->add_option("--pi", bai.pi, "comma-separated target quantiles");
  bai_cmd->add_option("--eps", bai.eps, "epsilon");
  bai_cmd->add_option("--delta", bai.delta, "error probability");
  bai_cmd->add_option("--kinds", bai.kinds, "comma-separated confidence sequence kinds");
  bai_cmd->add_option("--runs", bai.runs, "runs per cell");
  bai_cmd->add_option("--K", bai.k_arms, "number of arms");
  bai_cmd->add_option("--max-rounds", bai.max_rounds, "round cap per run");
  bai_cmd->add_option("--threads", bai.threads, "worker threads (0 = all cores)");
  bai_cmd->add_option("--tune-m", bai.tune_m, "time the beta-binomial r is tuned for");

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    std::ofstream file;
    if (!common.out_path.empty()) {
      file.open(common.out_path);
      if (!file) throw ConfigError("cannot open '" + common.out_path + "' for writing");
    }
    std::ostream& os = common.out_path.empty() ? out : file;
    std::ifstream input;
    if (!common.input_path.empty()) {
      input.open(common.input_path);
      if (!input) throw IngestError("cannot open input '" + common.input_path + "'");
    }
    std::istream& is = common.input_path.empty() ? in : input;
    const std::uint64_t s = seed ? *seed : default_seed();

    Sink sink(os, common.format == "json" ? Format::json : Format::csv);
    if (bounds->parsed()) cmd_bounds(common, bo, sink);
    if (track->parsed()) cmd_track(common, to, is, sink);
    if (band->parsed()) cmd_band(common, bd, is, sink);
    if (abtest->parsed()) cmd_abtest(common, ab, s, is, sink);
    if (ks->parsed()) cmd_ks(common, ko, is, sink);
    if (bai_cmd->parsed()) cmd_bai(bai, s, sink);
    sink.finish();
    return kOk;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const TuningError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace qcs::cli
