#pragma once

// Run configuration: INI or JSON files, flag overrides, validation, and model
// construction.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "monoembed/exprmap.hpp"
#include "monoembed/models/rational.hpp"
#include "monoembed/models/ricker.hpp"
#include "monoembed/periodic.hpp"

namespace monoembed::app {

/// A configuration problem; `field` names the offending key ("certify.tol") or is
/// empty for file-level errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Flat "section.key" -> value store with the origin of each value.
class Settings {
 public:
  struct Entry {
    std::string value;
    std::string origin;
  };

  void set(const std::string& key, std::string value, std::string origin) {
    entries_[key] = {std::move(value), std::move(origin)};
  }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  void erase_prefix(const std::string& prefix) {
    for (auto it = entries_.begin(); it != entries_.end();) {
      it = it->first.rfind(prefix, 0) == 0 ? entries_.erase(it) : std::next(it);
    }
  }

 private:
  std::map<std::string, Entry> entries_;
};

inline void load_ini(const std::string& path, Settings& out) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", path + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside a section in " + path);
    }
    for (const auto& [key, value] : body) {
      out.set(section + "." + key, boost::algorithm::trim_copy(value.data()),
              path + " [" + section + "]");
    }
  }
}

inline void load_json(const std::string& path, Settings& out) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", path + ": byte " + std::to_string(e.byte) + ": invalid JSON");
  }
  if (!doc.is_object()) throw ConfigError("", path + ": top level must be an object");
  auto scalar = [&](const std::string& field, const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return expr::format_number(v.get<double>());
    throw ConfigError(field, "expected a scalar value");
  };
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError(section, "expected an object");
    for (const auto& [key, value] : body.items()) {
      const std::string field = section + "." + key;
      const std::string origin = path + " " + section;
      if (value.is_array()) {
        if (key == "expr") {
          for (std::size_t i = 0; i < value.size(); ++i) {
            out.set(section + ".expr" + std::to_string(i), scalar(field, value[i]), origin);
          }
        } else {
          std::string joined;
          for (std::size_t i = 0; i < value.size(); ++i) {
            if (i) joined += ',';
            joined += scalar(field, value[i]);
          }
          out.set(field, joined, origin);
        }
      } else {
        out.set(field, scalar(field, value), origin);
      }
    }
  }
}

/// Loads by extension: ".json" is JSON, anything else INI.
inline void load_file(const std::string& path, Settings& out) {
  if (boost::algorithm::iends_with(path, ".json")) {
    load_json(path, out);
  } else {
    load_ini(path, out);
  }
}

struct SweepAxis {
  std::string param;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 1;

  /// Parameter value of cell i; the end cells sit on lo and hi.
  double value(std::size_t i) const {
    if (steps == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
};

struct SweepConfig {
  SweepAxis p1{"h", 0.1, 5.0, 50};
  SweepAxis p2{"r", 0.1, 4.0, 50};
  std::string analysis = "pseudo";  // pseudo | certify | local
};

struct RunConfig {
  std::string model;  // ricker | rational | expr
  double r = 0.5;
  double h = 1.0;
  std::size_t delay = 1;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<std::string> exprs;
  std::size_t arity = 0;
  std::string pattern;  // explicit signs, "infer", or empty (built-in / infer)

  std::optional<Interval> region;
  std::size_t grid = 64;

  std::size_t samples = 100;
  double tol = 1e-10;
  std::size_t max_iter = 0;
  std::uint64_t seed = 42;
  std::size_t pattern_samples = 10'000;
  double agreement_tol = 1e-6;
  std::size_t warmup_max = 4096;
  std::size_t starts = 200;

  std::string out;
  std::string format = "json";
  std::size_t jobs = 0;

  std::vector<double> x0;
  std::size_t steps = 20;
  bool embedded = false;

  SweepConfig sweep;

  bool periodic() const noexcept { return model == "expr" && exprs.size() > 1; }
};

namespace detail {

inline double to_double(const std::string& field, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "'" + s + "' is not a number");
  }
}

inline std::uint64_t to_count(const std::string& field, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(field, "'" + s + "' is not a nonnegative integer");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(field, "'" + s + "' is out of range");
  }
}

inline bool to_bool(const std::string& field, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(field, "'" + s + "' is not a boolean");
}

inline std::vector<double> to_list(const std::string& field, const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  std::vector<double> out;
  for (auto& p : parts) out.push_back(to_double(field, boost::algorithm::trim_copy(p)));
  return out;
}

inline Interval to_range(const std::string& field, const std::string& s) {
  const auto v = to_list(field, s);
  if (v.size() != 2 || !(v[0] < v[1]) || !std::isfinite(v[0]) || !std::isfinite(v[1])) {
    throw ConfigError(field, "expected 'lo,hi' with lo < hi");
  }
  return {v[0], v[1]};
}

}  // namespace detail

/// Typed, validated configuration. MONOEMBED_SEED is consulted only when no seed is set.
inline RunConfig resolve(const Settings& s) {
  using namespace detail;
  RunConfig c;
  bool seed_set = false;
  std::map<std::size_t, std::string> numbered_exprs;
  for (const auto& [key, entry] : s.entries()) {
    const std::string& v = entry.value;
    const std::string where = key + " (" + entry.origin + ")";
    auto positive = [&](double x) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(where, "must be > 0");
      return x;
    };
    auto at_least_one = [&](std::uint64_t n) {
      if (n < 1) throw ConfigError(where, "must be >= 1");
      return static_cast<std::size_t>(n);
    };
    if (key == "model.name") {
      c.model = v == "periodic" ? "expr" : v;
      if (c.model != "ricker" && c.model != "rational" && c.model != "expr") {
        throw ConfigError(where, "unknown model '" + v + "' (ricker, rational, expr)");
      }
    } else if (key == "model.r") {
      c.r = to_double(where, v);
    } else if (key == "model.h") {
      c.h = to_double(where, v);
    } else if (key == "model.delay" || key == "model.k") {
      c.delay = to_count(where, v);
    } else if (key == "model.a") {
      c.a = to_list(where, v);
    } else if (key == "model.b") {
      c.b = to_list(where, v);
    } else if (key.rfind("model.expr", 0) == 0) {
      const std::string idx = key.substr(10);
      numbered_exprs[idx.empty() ? 0 : to_count(where, idx)] = v;
    } else if (key == "model.arity") {
      c.arity = at_least_one(to_count(where, v));
    } else if (key == "model.pattern") {
      c.pattern = v;
    } else if (key == "scan.region") {
      c.region = to_range(where, v);
    } else if (key == "scan.grid") {
      c.grid = to_count(where, v);
      if (c.grid < 16) throw ConfigError(where, "must be >= 16");
    } else if (key == "certify.samples") {
      c.samples = at_least_one(to_count(where, v));
    } else if (key == "certify.tol") {
      c.tol = positive(to_double(where, v));
    } else if (key == "certify.max_iter") {
      c.max_iter = at_least_one(to_count(where, v));
    } else if (key == "certify.seed") {
      c.seed = to_count(where, v);
      seed_set = true;
    } else if (key == "certify.pattern_samples") {
      c.pattern_samples = at_least_one(to_count(where, v));
    } else if (key == "certify.agreement_tol") {
      c.agreement_tol = positive(to_double(where, v));
    } else if (key == "certify.warmup_max") {
      c.warmup_max = to_count(where, v);
    } else if (key == "cycles.starts") {
      c.starts = at_least_one(to_count(where, v));
    } else if (key == "output.out") {
      c.out = v;
    } else if (key == "output.format") {
      if (v != "csv" && v != "svg" && v != "json") throw ConfigError(where, "csv, svg or json");
      c.format = v;
    } else if (key == "output.jobs") {
      c.jobs = to_count(where, v);
    } else if (key == "iterate.x0") {
      c.x0 = to_list(where, v);
    } else if (key == "iterate.steps") {
      c.steps = at_least_one(to_count(where, v));
    } else if (key == "iterate.embedded") {
      c.embedded = to_bool(where, v);
    } else if (key == "sweep.p1" || key == "sweep.p2") {
      (key == "sweep.p1" ? c.sweep.p1 : c.sweep.p2).param = v;
    } else if (key == "sweep.p1_range" || key == "sweep.p2_range") {
      const Interval iv = to_range(where, v);
      auto& ax = key == "sweep.p1_range" ? c.sweep.p1 : c.sweep.p2;
      ax.lo = iv.lo;
      ax.hi = iv.hi;
    } else if (key == "sweep.p1_steps" || key == "sweep.p2_steps") {
      (key == "sweep.p1_steps" ? c.sweep.p1 : c.sweep.p2).steps = at_least_one(to_count(where, v));
    } else if (key == "sweep.analysis") {
      if (v != "pseudo" && v != "certify" && v != "local") {
        throw ConfigError(where, "pseudo, certify or local");
      }
      c.sweep.analysis = v;
    } else {
      throw ConfigError(where, "unknown setting");
    }
  }
  for (auto& [i, text] : numbered_exprs) c.exprs.push_back(text);

  if (!seed_set) {
    if (const char* env = std::getenv("MONOEMBED_SEED")) c.seed = to_count("MONOEMBED_SEED", env);
  }
  if (c.model.empty()) c.model = c.exprs.empty() ? "" : "expr";
  if (c.model.empty()) throw ConfigError("model.name", "no model given (--model or --expr)");
  if (c.model == "expr") {
    if (c.exprs.empty()) throw ConfigError("model.expr", "expression model needs --expr");
    if (c.arity == 0) throw ConfigError("model.arity", "expression model needs --arity");
  } else if (!c.exprs.empty()) {
    throw ConfigError("model.expr", "give either a built-in model or expressions, not both");
  }
  if (c.model == "ricker") {
    if (!(c.r > 0.0)) throw ConfigError("model.r", "must be > 0");
    if (!(c.h > 0.0)) throw ConfigError("model.h", "must be > 0");
  }
  if (c.model == "rational") {
    if (c.a.empty() || c.b.empty()) throw ConfigError("model.a", "rational model needs a and b");
    if (c.a.size() != c.b.size()) throw ConfigError("model.b", "a and b differ in length");
  }
  return c;
}

/// Declared pattern of an expression model, or one inferred by sampling.
struct ResolvedPattern {
  MonotonicityPattern tau;
  std::string source;  // "builtin", "declared", "sampled"
  std::vector<std::size_t> constant_arguments;
};

inline Interval sampling_region(const RunConfig& c) {
  if (c.region) return *c.region;
  if (c.model == "ricker") return ricker_scan_region(RickerModel(c.r, c.h, c.delay)).x;
  return {0.0, 10.0};
}

inline std::vector<Expression> parse_exprs(const RunConfig& c) {
  std::vector<Expression> out;
  for (std::size_t i = 0; i < c.exprs.size(); ++i) {
    try {
      out.push_back(Expression::parse(c.exprs[i], c.arity));
    } catch (const ParseError& e) {
      throw ConfigError("model.expr" + (c.exprs.size() > 1 ? std::to_string(i) : std::string()),
                        e.what());
    }
  }
  return out;
}

/// Pattern for expression models: explicit, or inferred on the sampling region
/// (agreeing across all maps of a periodic system).
inline ResolvedPattern resolve_pattern(const RunConfig& c, const std::vector<Expression>& es) {
  if (!c.pattern.empty() && c.pattern != "infer") {
    try {
      auto tau = MonotonicityPattern::parse(c.pattern);
      if (tau.size() != c.arity) throw ConfigError("model.pattern", "length differs from arity");
      return {tau, "declared", {}};
    } catch (const InvalidArgument& e) {
      throw ConfigError("model.pattern", e.what());
    }
  }
  std::optional<MonotonicityPattern> tau;
  std::vector<std::size_t> constants;
  for (std::size_t i = 0; i < es.size(); ++i) {
    const auto inf = infer_pattern(es[i], sampling_region(c), 1000, c.seed + i);
    if (inf.witness) {
      throw ConfigError("model.pattern",
                        "argument x" + std::to_string(inf.witness->argument) +
                            " is not monotone on the sampling region");
    }
    if (tau && *tau != *inf.pattern) {
      throw ConfigError("model.pattern", "maps of the periodic system have different patterns");
    }
    tau = inf.pattern;
    constants = inf.constant_arguments;
  }
  return {*tau, "sampled", constants};
}

/// Applies a sweep or --param override by parameter name.
inline void set_param(RunConfig& c, const std::string& name, double v) {
  if (name == "r") {
    c.r = v;
  } else if (name == "h") {
    c.h = v;
  } else if (name == "delay" || name == "k") {
    c.delay = static_cast<std::size_t>(std::llround(v));
  } else if ((name[0] == 'a' || name[0] == 'b') && name.size() > 1 &&
             name.find_first_not_of("0123456789", 1) == std::string::npos) {
    auto& vec = name[0] == 'a' ? c.a : c.b;
    const std::size_t j = std::stoul(name.substr(1));
    if (j == 0 || j >= vec.size()) throw ConfigError("sweep", "no coefficient " + name);
    vec[j] = v;
  } else {
    throw ConfigError("sweep", "unknown sweep parameter '" + name + "'");
  }
}

}  // namespace monoembed::app
