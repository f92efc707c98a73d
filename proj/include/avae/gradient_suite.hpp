#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "avae/grad_check.hpp"

namespace avae {

struct GradSuiteEntry {
  std::string name;
  GradCheckReport report;
};

struct GradSuiteResult {
  std::vector<GradSuiteEntry> entries;

  double max_rel_error() const;
  bool passed(double tolerance) const { return max_rel_error() < tolerance; }
  /// One line per entry.
  std::string format() const;
};

/// Central-difference step used by the suite.
inline constexpr double kGradSuiteStep = 1e-5;

/// Finite-difference checks in double precision of every differentiable
/// operator, and of L_enc, L_gen (all parameters) and L_dis (discriminator
/// parameters) on a tiny model: 8x8 RGB inputs, N = 4, batch 2.
GradSuiteResult run_gradient_suite(std::uint64_t seed = 0, double step = kGradSuiteStep);

}  // namespace avae
