#pragma once
// Line-oriented `key = value` run configuration covering training, synthetic
// data generation, and evaluation. `#` starts a comment (whole-line or
// trailing); blank lines are ignored; unknown or duplicate keys are errors.

#include <map>
#include <string>

#include "limp/apps.hpp"

namespace limp {

struct RunConfig {
  TrainConfig train;
  FamilyConfig family;
  EvalProtocol eval;
};

// Raw key/value pairs in file order; throws ValidationError on malformed
// lines or duplicate keys.
std::map<std::string, std::string> parse_config_pairs(const std::string& text);

// Typed view: applies every pair onto the defaults; unknown keys, bad
// numbers, and out-of-range values are ValidationErrors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace limp
