#pragma once

#include <cstdint>
#include <vector>

#include "avae/autodiff.hpp"

namespace avae {

struct AdamOptions {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments and counter for one parameter group. Moment tensors mirror the
/// shapes of the parameters they belong to.
template <typename T>
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
};

/// Adam with bias correction over a fixed parameter group.
template <typename T>
class Adam {
 public:
  Adam(Params<T> params, AdamOptions options = {});

  /// Applies one update from the gradients currently held by the parameters,
  /// then clears them. Throws UsageError if any parameter has no gradient.
  void step();

  const Params<T>& params() const noexcept { return params_; }
  const AdamState<T>& state() const noexcept { return state_; }
  /// Replaces moments and counter (checkpoint restore). Shapes must match.
  void load_state(AdamState<T> state);
  std::uint64_t steps() const noexcept { return state_.step; }

 private:
  Params<T> params_;
  AdamState<T> state_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace avae
