#pragma once

#include <functional>
#include <string>

#include "avae/autodiff.hpp"

namespace avae {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  // Location of the worst coordinate, "param[i]/flat_index".
  std::string worst;
  double worst_analytic = 0.0, worst_numeric = 0.0;
};

/// Relative-error denominator floor: below it the comparison is absolute.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares reverse-mode gradients of `loss` against central finite
/// differences for every coordinate of every parameter in `params`.
///
/// `loss` must rebuild its graph from the current parameter values on every
/// call and be deterministic. Parameter values are perturbed in place and
/// restored. Existing gradients on `params` are cleared first and left
/// holding the reverse-mode result afterwards.
///
/// rel_error = |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor)
GradCheckReport grad_check(const std::function<Var<double>()>& loss, Params<double>& params,
                           double step = 1e-6);

}  // namespace avae
