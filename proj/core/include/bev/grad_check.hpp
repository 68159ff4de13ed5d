#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bev {

// Result of sweeping one loss's analytic gradient against central finite
// differences (step 1e-5) over seeded random instances. Non-smooth
// configurations (L1 ties, smooth-L1 knees, assignment flips) are detected
// and skipped, and counted in `skipped`.
struct GradCheckResult {
  std::string component;
  int instances = 0;
  long checked = 0;
  long skipped = 0;
  double max_rel_err = 0.0;
};

// Runs the finite-difference sweep for every differentiable loss. The
// differencing only evaluates loss values, so it is independent of the
// analytic gradient path it verifies.
std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed, int instances);

}  // namespace bev
