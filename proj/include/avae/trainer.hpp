#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "avae/adam.hpp"
#include "avae/controller.hpp"
#include "avae/discriminator.hpp"
#include "avae/generator.hpp"

namespace avae {

struct TrainConfig {
  // Model
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t latent_dim = 64;
  std::array<std::size_t, 3> widths{32, 64, 128};
  // Loss weights
  double alpha = 0.3;
  double beta = 0.1;
  double gamma = 0.1;
  FakeEnergy fake_energy = FakeEnergy::SelfReconstruction;
  // Controller
  double eta = 0.5;
  double lambda1 = 1e-3;
  double lambda2 = 1e-5;
  double lambda3 = 1e-5;
  bool literal_error_sign = false;
  // Recompute eta every step from running loss means instead of keeping it fixed.
  bool adaptive_eta = false;
  // Optimizer
  double lr = 5e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Schedule
  std::size_t batch = 16;
  std::size_t iterations = 2000;
  std::uint64_t seed = 0;
  std::size_t checkpoint_interval = 1000;
  std::size_t metrics_interval = 1;

  ArchConfig arch() const { return {image_size, channels, latent_dim, widths}; }
  AdamOptions adam() const { return {lr, adam_beta1, adam_beta2, adam_eps}; }
  ControllerState controller() const;
  void validate() const;
};

/// Scalars of one training iteration, as logged.
struct LossBundle {
  std::size_t iteration = 0;
  double L_e = 0, L_n = 0, L_d = 0, L_g = 0, L_v = 0, L_s = 0;
  double L_dis = 0, L_gen = 0, L_enc = 0;
  double e_t = 0, k_t = 0, M = 0;

  bool all_finite() const;
  std::string describe() const;
};

struct LossParts {
  double L_e = 0, L_n = 0, L_d = 0, L_g = 0, L_v = 0, L_s = 0;
};

struct CompositeLosses {
  double dis = 0, gen = 0, enc = 0;
};

struct LossWeights {
  double alpha = 0.3, beta = 0.1, gamma = 0.1;
};

/// L_dis = L_d - k*(L_g + alpha*L_v)
/// L_gen = L_g + alpha*L_v + beta*L_s + gamma*L_e
/// L_enc = L_n + beta*L_s + gamma*L_e
CompositeLosses composite_losses(const LossParts& parts, double k, const LossWeights& w);

/// All nodes of one forward pass of the full model.
template <typename T>
struct StepGraph {
  Var<T> x;
  GaussianParams<T> posterior;
  ReparamSample<T> z_v;
  Var<T> z_g;
  Var<T> x_v, x_g;
  DiscPass<T> disc;
  Var<T> L_e, L_n, L_s, L_d, L_g, L_v;
  Var<T> L_enc, L_gen, L_dis;

  LossParts parts() const;
};

/// Forward pass with frozen noise. `k_prev` weighs the fake energies in L_dis.
///
/// L_dis is built on the same discriminator activations as L_gen; isolation
/// comes from the backward targets: L_enc reaches only theta_e, L_gen only
/// theta_d and L_dis only the discriminator.
template <typename T>
StepGraph<T> build_step_graph(const Generator<T>& gen, const Discriminator<T>& disc,
                              const Tensor<T>& x, Tensor<T> epsilon, Tensor<T> z_g,
                              double k_prev, const LossWeights& weights, FakeEnergy mode);

/// Owns both auto-encoders, their three optimizers, the controller and the
/// noise stream; advances them one iteration at a time.
class Trainer {
 public:
  using Real = float;

  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const noexcept { return config_; }

  /// One full iteration: forward, encoder update, decoder update, controller
  /// step, discriminator update. Throws NumericError (with the offending
  /// bundle in the message) on non-finite losses.
  LossBundle step(const Tensor<Real>& batch);

  // The individual phases of `step`, exposed for inspection.
  StepGraph<Real> forward(const Tensor<Real>& batch);
  void update_encoder(const StepGraph<Real>& g);
  void update_decoder(const StepGraph<Real>& g);
  /// Returns e_t and advances k.
  double step_controller(const LossParts& parts);
  void update_discriminator(const StepGraph<Real>& g);

  Generator<Real>& generator() noexcept { return gen_; }
  const Generator<Real>& generator() const noexcept { return gen_; }
  Discriminator<Real>& discriminator() noexcept { return disc_; }
  const Discriminator<Real>& discriminator() const noexcept { return disc_; }
  ControllerState& controller() noexcept { return controller_; }
  const ControllerState& controller() const noexcept { return controller_; }
  Adam<Real>& encoder_optimizer() noexcept { return opt_enc_; }
  Adam<Real>& decoder_optimizer() noexcept { return opt_dec_; }
  Adam<Real>& discriminator_optimizer() noexcept { return opt_disc_; }
  const Adam<Real>& encoder_optimizer() const noexcept { return opt_enc_; }
  const Adam<Real>& decoder_optimizer() const noexcept { return opt_dec_; }
  const Adam<Real>& discriminator_optimizer() const noexcept { return opt_disc_; }
  Rng& noise() noexcept { return noise_; }
  const Rng& noise() const noexcept { return noise_; }

  std::size_t iteration() const noexcept { return iteration_; }
  void set_iteration(std::size_t it) noexcept { iteration_ = it; }

  /// Sums of L_g, L_v, L_d over all iterations so far (diversity diagnostics).
  struct RunningSums {
    double fake = 0, recon = 0, real = 0;
    std::size_t count = 0;
  };
  const RunningSums& running() const noexcept { return running_; }
  void set_running(const RunningSums& r) noexcept { running_ = r; }
  /// diversity_ratio() of the running means (0 before any step).
  double diversity_estimate() const;

 private:
  TrainConfig config_;
  Generator<Real> gen_;
  Discriminator<Real> disc_;
  Adam<Real> opt_enc_;
  Adam<Real> opt_dec_;
  Adam<Real> opt_disc_;
  ControllerState controller_;
  Rng noise_;
  std::size_t iteration_ = 0;
  RunningSums running_;
};

/// Header of the metrics log.
inline constexpr const char* kMetricsHeader =
    "iter,L_e,L_n,L_d,L_g,L_v,L_s,L_dis,L_gen,L_enc,e_t,k_t,M";
/// One metrics row (no trailing newline), printed with round-trip precision.
std::string format_metrics_row(const LossBundle& b);

extern template struct StepGraph<float>;
extern template struct StepGraph<double>;

}  // namespace avae
