#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vdns {

/// Outcome of one property check; `value` is the worst case observed.
struct CheckResult {
  /// Acceptance criterion the check belongs to (1 identities, 2 stability, 4 consistency).
  int criterion = 0;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  /// "<=" or ">=": how value is compared with limit.
  std::string relation = "<=";
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 20240917;
  /// Random inputs per mesh for the c_h and d_h identities.
  std::size_t identity_samples = 500;
  /// Random inputs per mesh for the discrete integration by parts.
  std::size_t ibp_samples = 200;
  /// (u, dt) samples per mesh for the density transport checks.
  std::size_t transport_samples = 50;
};

/// Exact identities on the 2x2 Cartesian, 2-triangle and bundled hexagonal meshes.
std::vector<CheckResult> identity_checks(const CheckOptions& options);
/// Transport M-matrix, range, mass and L2 decay, kinetic energy decay, norm equivalences.
std::vector<CheckResult> stability_checks(const CheckOptions& options);
/// Refinement rates of the d_h and c_h consistency residuals.
std::vector<CheckResult> consistency_checks(const CheckOptions& options);

std::vector<CheckResult> run_property_suite(const CheckOptions& options);

/// Fixed-width pass/fail table, one line per check.
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace vdns
