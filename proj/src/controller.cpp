#include "avae/controller.hpp"

#include <algorithm>
#include <cmath>

#include "avae/errors.hpp"

namespace avae {

void ControllerState::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) {
    throw UsageError("controller gains must be non-negative");
  }
  if (!(eta > 0.0 && eta <= 1.0)) throw UsageError("eta must lie in (0, 1]");
  if (alpha < 0) throw UsageError("alpha must be non-negative");
}

double error_signal(double loss_real, double loss_fake, double loss_recon,
                    const ControllerState& state) {
  if (!std::isfinite(loss_real) || !std::isfinite(loss_fake) || !std::isfinite(loss_recon)) {
    throw NumericError("error_signal: non-finite loss");
  }
  if (state.literal_error_sign) {
    return state.eta * loss_real - loss_fake + state.alpha * loss_recon;
  }
  return state.eta * loss_real - (loss_fake + state.alpha * loss_recon);
}

ControllerState update_k(double e_t, const ControllerState& state) {
  ControllerState next = state;
  const double delta = state.lambda1 * e_t + state.lambda2 * (e_t - state.e_prev) +
                       state.lambda3 * (e_t + state.e_prev2 - 2.0 * state.e_prev);
  next.k = std::clamp(state.k + delta, 0.0, 1.0);
  next.e_prev2 = state.e_prev;
  next.e_prev = e_t;
  return next;
}

double diversity_ratio(double mean_fake, double mean_recon, double mean_real, double alpha) {
  if (!(mean_real > 0.0) || !std::isfinite(mean_real)) {
    throw NumericError("diversity_ratio: E[L_d] must be positive");
  }
  return (mean_fake + alpha * mean_recon) / mean_real;
}

double convergence_measure(double loss_real, double loss_fake, double loss_recon, double eta,
                           double alpha) {
  return loss_real + std::abs(eta * loss_real - loss_fake - alpha * loss_recon);
}

std::optional<std::size_t> PlantTrace::settle_step(double tolerance) const {
  if (errors.empty()) return std::nullopt;
  const double bound = tolerance * std::abs(errors.front());
  // Settling time: the step after which the error never leaves the band.
  std::size_t t = errors.size();
  while (t > 0 && std::abs(errors[t - 1]) < bound) --t;
  if (t == errors.size()) return std::nullopt;
  return t + 1;
}

double PlantTrace::peak_overshoot() const {
  if (errors.empty() || errors.front() == 0.0) return 0.0;
  const double sign = errors.front() > 0 ? 1.0 : -1.0;
  double peak = 0.0;
  for (double e : errors) peak = std::max(peak, -sign * e);
  return peak / std::abs(errors.front());
}

PlantTrace simulate_plant(const PlantConfig& plant, ControllerState state) {
  state.validate();
  PlantTrace trace;
  trace.errors.reserve(plant.steps);
  trace.ks.reserve(plant.steps);
  double fake = plant.base_fake + plant.gain * state.k;
  for (std::size_t t = 0; t < plant.steps; ++t) {
    const double e = error_signal(plant.loss_real, fake, 0.0, state);
    state = update_k(e, state);
    trace.errors.push_back(e);
    trace.ks.push_back(state.k);
    fake += plant.rate * (plant.base_fake + plant.gain * state.k - fake);
  }
  return trace;
}

}  // namespace avae
