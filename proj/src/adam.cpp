#include "avae/adam.hpp"

#include <cmath>
#include <string>

namespace avae {

template <typename T>
Adam<T>::Adam(Params<T> params, AdamOptions options) : params_(std::move(params)) {
  state_.options = options;
  for (const auto& p : params_) {
    state_.first_moment.emplace_back(p.shape(), T(0));
    state_.second_moment.emplace_back(p.shape(), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) {
      throw UsageError("adam step: parameter " + std::to_string(i) + " " +
                       shape_str(params_[i].shape()) + " has no gradient");
    }
  }
  const auto& o = state_.options;
  state_.step += 1;
  const double t = static_cast<double>(state_.step);
  const double correct1 = 1.0 - std::pow(o.beta1, t);
  const double correct2 = 1.0 - std::pow(o.beta2, t);
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto value = params_[i].mutable_value().data();
    auto grad = params_[i].grad()->data();
    auto m = state_.first_moment[i].data();
    auto v = state_.second_moment[i].data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const T g = grad[j];
      m[j] = b1 * m[j] + (T(1) - b1) * g;
      v[j] = b2 * v[j] + (T(1) - b2) * g * g;
      const double m_hat = static_cast<double>(m[j]) / correct1;
      const double v_hat = static_cast<double>(v[j]) / correct2;
      value[j] -= static_cast<T>(o.lr * m_hat / (std::sqrt(v_hat) + o.eps));
    }
    params_[i].zero_grad();
  }
}

template <typename T>
void Adam<T>::load_state(AdamState<T> state) {
  if (state.first_moment.size() != params_.size() ||
      state.second_moment.size() != params_.size()) {
    throw DimensionError("adam state has " + std::to_string(state.first_moment.size()) +
                         " moments for " + std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    require_same_shape(state.first_moment[i].shape(), params_[i].shape(), "adam first moment");
    require_same_shape(state.second_moment[i].shape(), params_[i].shape(), "adam second moment");
  }
  state_ = std::move(state);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace avae
