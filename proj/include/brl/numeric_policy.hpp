#pragma once

#include <cstdlib>
#include <string>

#include "brl/keyvalue.hpp"

namespace brl {

// Every tolerance the library compares against.
struct NumericPolicy {
  double algebra = 1e-12;
  double orthonormality = 1e-10;
  double positivity_slack = 1e-9;
  double quad_abs = 1e-11;
  double quad_rel = 1e-9;
  int quad_max_segments = 4000;
  double degenerate = 1e-12;
};

inline NumericPolicy policy_from_key_values(const KeyValues& kv, NumericPolicy base = {}) {
  for (const auto& [key, value] : kv) {
    if (key == "algebra") base.algebra = parse_real(key, value);
    else if (key == "orthonormality") base.orthonormality = parse_real(key, value);
    else if (key == "positivity_slack") base.positivity_slack = parse_real(key, value);
    else if (key == "quad_abs") base.quad_abs = parse_real(key, value);
    else if (key == "quad_rel") base.quad_rel = parse_real(key, value);
    else if (key == "quad_max_segments") base.quad_max_segments = static_cast<int>(parse_real(key, value));
    else if (key == "degenerate") base.degenerate = parse_real(key, value);
    else throw ConfigError("numeric policy: unknown key '" + key + "'");
  }
  if (base.positivity_slack < 0 || base.quad_abs <= 0 || base.quad_rel <= 0 || base.quad_max_segments < 1) {
    throw ConfigError("numeric policy: tolerances must be positive");
  }
  return base;
}

// Defaults, overridden by the file named in REDFIELD_NUMERIC_POLICY if set.
inline NumericPolicy policy_from_environment() {
  const char* path = std::getenv("REDFIELD_NUMERIC_POLICY");
  if (path == nullptr || *path == '\0') return {};
  return policy_from_key_values(load_key_values(path));
}

}  // namespace brl
