#pragma once
// Standing gradient suites: central-finite-difference verification of the
// tape primitives, the heat-method VJP, the differentiable geodesic node, and
// every loss term, on <= 50-vertex meshes. Shared by the `check-grad` CLI
// subcommand and the acceptance battery.

#include <cstdint>
#include <string>
#include <vector>

namespace limp {

struct GradSuiteResult {
  std::string name;
  double deviation = 0.0;  // suite-specific max deviation (see each suite)
  double tolerance = 0.0;
  bool pass = false;
};

// Runs every suite with meshes/weights derived deterministically from `seed`.
// Throws only on infrastructure failure; a gradient mismatch is reported as
// pass = false.
std::vector<GradSuiteResult> run_gradient_suites(uint64_t seed);

}  // namespace limp
