#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "brl/environment.hpp"
#include "brl/errors.hpp"
#include "brl/generator.hpp"
#include "brl/keyvalue.hpp"
#include "brl/sweep.hpp"
#include "brl/twolevel.hpp"

namespace brl {

struct RunConfig {
  TwoLevelParams model;
  std::optional<BlochVector> initial_state;  // empty means "sweep"
  std::optional<double> t_end;               // default 10/S0
  CoefficientMode mode = CoefficientMode::time_dependent;
  bool suppress_negative_rate = false;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::optional<double> step;
  std::size_t record_every = 1;
  unsigned jobs = 0;  // 0 means all cores
  SweepGrid grid;
  std::optional<EnvironmentConfig> environment;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15) throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

}  // namespace detail

inline CoefficientMode parse_mode(const std::string& text) {
  if (text == "timedep" || text == "time_dependent") return CoefficientMode::time_dependent;
  if (text == "frozen") return CoefficientMode::frozen;
  throw ConfigError("mode must be timedep or frozen, got '" + text + "'");
}

inline RunConfig run_config_from_key_values(const KeyValues& kv) {
  RunConfig c;
  bool have_b = false;
  bool have_tm = false;
  bool have_s0 = false;
  for (const auto& [key, value] : kv) {
    if (key == "model.B") c.model.B = parse_real(key, value), have_b = true;
    else if (key == "model.t_m") c.model.t_m = parse_real(key, value), have_tm = true;
    else if (key == "model.S0") c.model.S0 = parse_real(key, value), have_s0 = true;
    else if (key == "model.temperature") c.model.temperature = parse_real(key, value);
    else if (key == "initial_state") {
      if (value == "sweep") {
        c.initial_state.reset();
      } else {
        const auto parts = detail::split_list(value);
        if (parts.size() != 3) throw ConfigError("initial_state: expected 'sweep' or 'sx, sy, sz'");
        c.initial_state = BlochVector{parse_real(key, parts[0]), parse_real(key, parts[1]), parse_real(key, parts[2])};
      }
    } else if (key == "t_end") c.t_end = parse_real(key, value);
    else if (key == "mode") c.mode = parse_mode(value);
    else if (key == "suppress_negative_rate") c.suppress_negative_rate = detail::parse_bool(key, value);
    else if (key == "outputs") c.outputs = detail::split_list(value);
    else if (key == "seed") c.seed = detail::parse_count(key, value);
    else if (key == "step") c.step = parse_real(key, value);
    else if (key == "record_every") c.record_every = detail::parse_count(key, value);
    else if (key == "jobs") c.jobs = static_cast<unsigned>(detail::parse_count(key, value));
    else if (key == "sweep.sphere_points") c.grid.sphere_points = detail::parse_count(key, value);
    else if (key == "sweep.shell_points") c.grid.shell_points = detail::parse_count(key, value);
    else if (key == "sweep.time_samples") c.grid.time_samples = detail::parse_count(key, value);
    else if (key == "sweep.jitter") c.grid.jitter = parse_real(key, value);
    else if (key == "sweep.shells") {
      c.grid.shells.clear();
      for (const auto& s : detail::split_list(value)) c.grid.shells.push_back(parse_real(key, s));
    } else if (key.rfind("environment.", 0) == 0) {
      continue;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (!have_b || !have_tm || !have_s0) throw ConfigError("model.B, model.t_m and model.S0 are required");
  if (!(c.model.B >= 0.0) || !std::isfinite(c.model.B)) throw ConfigError("model.B must be finite and >= 0");
  if (!(c.model.t_m > 0.0) || !std::isfinite(c.model.t_m)) throw ConfigError("model.t_m must be positive");
  if (!(c.model.S0 > 0.0) || !std::isfinite(c.model.S0)) throw ConfigError("model.S0 must be positive");
  if (!(c.model.temperature > 0.0)) throw ConfigError("model.temperature must be positive or inf");
  if (c.grid.jitter < 0.0) throw ConfigError("sweep.jitter must be >= 0");
  if (c.t_end && (!(*c.t_end >= 0.0) || !std::isfinite(*c.t_end))) throw ConfigError("t_end must be finite and >= 0");
  if (c.step && !(*c.step > 0.0)) throw ConfigError("step must be positive");
  if (c.initial_state && c.initial_state->norm() > 1.0 + 1e-12) throw ConfigError("initial_state: Bloch vector longer than 1");
  c.grid.seed = c.seed;
  if (kv.count("environment.kind") || kv.count("environment.spectrum")) {
    EnvironmentConfig env = environment_from_key_values(kv, "environment.");
    if (!kv.count("environment.S0")) env.S0 = c.model.S0;
    if (!kv.count("environment.omega_m")) env.omega_m = 1.0 / c.model.t_m;
    if (!kv.count("environment.temperature")) env.temperature = c.model.temperature;
    c.environment = env;
  }
  return c;
}

inline double effective_t_end(const RunConfig& c) { return c.t_end ? *c.t_end : 10.0 / c.model.S0; }

}  // namespace brl
