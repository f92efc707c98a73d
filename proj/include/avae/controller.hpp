#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace avae {

/// Feedback state for the equilibrium gain k_t.
///
/// k is updated in velocity form from the last three errors:
///   k_t = k_{t-1} + l1*e_t + l2*(e_t - e_{t-1}) + l3*(e_t + e_{t-2} - 2*e_{t-1})
/// where l1 acts as the integral gain, l2 as proportional and l3 as
/// differential. k is clamped to [0, 1] after every update.
struct ControllerState {
  double k = 0.0;
  double e_prev = 0.0;   // e_{t-1}
  double e_prev2 = 0.0;  // e_{t-2}
  double lambda1 = 1e-3;
  double lambda2 = 1e-5;
  double lambda3 = 1e-5;
  double eta = 0.5;    // diversity factor, (0, 1]
  double alpha = 0.3;  // weight on the VAE-reconstruction energy L_v
  // Use e_t = eta*L_d - L_g + alpha*L_v instead of eta*L_d - (L_g + alpha*L_v).
  bool literal_error_sign = false;

  /// Throws UsageError on negative gains, eta outside (0,1] or negative alpha.
  void validate() const;
};

/// e_t = eta*L_d - (L_g + alpha*L_v). Throws NumericError on non-finite input.
double error_signal(double loss_real, double loss_fake, double loss_recon,
                    const ControllerState& state);

/// Applies one gain update with error e_t and shifts the error history.
ControllerState update_k(double e_t, const ControllerState& state);

/// (E[L_g] + alpha*E[L_v]) / E[L_d]. Throws NumericError when E[L_d] <= 0.
double diversity_ratio(double mean_fake, double mean_recon, double mean_real, double alpha);

/// M = L_d + |eta*L_d - L_g - alpha*L_v|.
double convergence_measure(double loss_real, double loss_fake, double loss_recon, double eta,
                           double alpha);

/// First-order synthetic plant for exercising the controller:
///   fake_{t+1} = fake_t + rate * (base_fake + gain * k_t - fake_t)
/// with L_v folded into the fake term. The fake energy rises with k, as it
/// does when k scales the discriminator's push on generated samples, so the
/// loop is stable for positive gains.
struct PlantConfig {
  double loss_real = 1.0;
  double base_fake = 0.1;
  double gain = 16.0;
  double rate = 0.02;
  std::size_t steps = 2000;
};

struct PlantTrace {
  std::vector<double> errors;  // e_1 .. e_steps
  std::vector<double> ks;      // k after each update
  /// First step (1-based) from which |e_t| < tolerance * |e_1| holds to the
  /// end of the trace; empty if the final error is still outside the band.
  std::optional<std::size_t> settle_step(double tolerance = 0.01) const;
  /// Largest excursion past the target, relative to |e_1| (0 if none).
  double peak_overshoot() const;
};

PlantTrace simulate_plant(const PlantConfig& plant, ControllerState state);

}  // namespace avae
