#include "avae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "avae/ops.hpp"

namespace avae {

ControllerState TrainConfig::controller() const {
  ControllerState s;
  s.lambda1 = lambda1;
  s.lambda2 = lambda2;
  s.lambda3 = lambda3;
  s.eta = eta;
  s.alpha = alpha;
  s.literal_error_sign = literal_error_sign;
  return s;
}

void TrainConfig::validate() const {
  arch().validate();
  if (alpha < 0 || beta < 0 || gamma < 0) throw UsageError("alpha, beta, gamma must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw UsageError("eta must lie in (0, 1]");
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) throw UsageError("lambda gains must be >= 0");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (batch == 0) throw UsageError("batch must be >= 1");
  if (checkpoint_interval == 0) throw UsageError("checkpoint_interval must be >= 1");
  if (metrics_interval == 0) throw UsageError("metrics_interval must be >= 1");
}

bool LossBundle::all_finite() const {
  for (double v : {L_e, L_n, L_d, L_g, L_v, L_s, L_dis, L_gen, L_enc, e_t, k_t, M})
    if (!std::isfinite(v)) return false;
  return true;
}

std::string LossBundle::describe() const {
  return std::string(kMetricsHeader) + "\n" + format_metrics_row(*this);
}

std::string format_metrics_row(const LossBundle& b) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                b.iteration, b.L_e, b.L_n, b.L_d, b.L_g, b.L_v, b.L_s, b.L_dis, b.L_gen, b.L_enc,
                b.e_t, b.k_t, b.M);
  return buf;
}

CompositeLosses composite_losses(const LossParts& p, double k, const LossWeights& w) {
  CompositeLosses c;
  c.dis = p.L_d - k * (p.L_g + w.alpha * p.L_v);
  c.gen = p.L_g + w.alpha * p.L_v + w.beta * p.L_s + w.gamma * p.L_e;
  c.enc = p.L_n + w.beta * p.L_s + w.gamma * p.L_e;
  return c;
}

template <typename T>
LossParts StepGraph<T>::parts() const {
  return {L_e.item(), L_n.item(), L_d.item(), L_g.item(), L_v.item(), L_s.item()};
}

template <typename T>
StepGraph<T> build_step_graph(const Generator<T>& gen, const Discriminator<T>& disc,
                              const Tensor<T>& x, Tensor<T> epsilon, Tensor<T> z_g,
                              double k_prev, const LossWeights& w, FakeEnergy mode) {
  StepGraph<T> g;
  g.x = Var<T>::constant(x);
  g.posterior = gen.encode(g.x);
  g.z_v = reparametrize(g.posterior, std::move(epsilon));
  g.z_g = Var<T>::constant(std::move(z_g));
  g.x_v = gen.decode(g.z_v.z);
  g.x_g = gen.decode(g.z_g);
  auto [energy, pass] = energies(disc, g.x, g.x_g, g.x_v, mode);
  g.disc = pass;
  g.L_e = data_loss(g.x, g.x_v);
  g.L_n = kl_loss(g.posterior);
  g.L_s = latent_similarity(pass.z_d, pass.z_v);
  g.L_d = energy.real;
  g.L_g = energy.fake;
  g.L_v = energy.recon;

  const T alpha = static_cast<T>(w.alpha), beta = static_cast<T>(w.beta);
  const T gamma = static_cast<T>(w.gamma);
  Var<T> fake_terms = g.L_g + alpha * g.L_v;
  Var<T> shared = beta * g.L_s + gamma * g.L_e;
  g.L_enc = g.L_n + shared;
  g.L_gen = fake_terms + shared;
  g.L_dis = g.L_d - static_cast<T>(k_prev) * fake_terms;
  return g;
}

namespace {

Rng init_rng(std::uint64_t seed) { return Rng(derive_seed(seed, 0)); }

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_((config.validate(), config)),
      gen_([&] {
        Rng rng = init_rng(config_.seed);
        return Generator<Real>(config_.arch(), rng);
      }()),
      disc_([&] {
        Rng rng(derive_seed(config_.seed, 1));
        return Discriminator<Real>(config_.arch(), rng);
      }()),
      opt_enc_(values_of(gen_.encoder_parameters()), config_.adam()),
      opt_dec_(values_of(gen_.decoder_parameters()), config_.adam()),
      opt_disc_(values_of(disc_.named_parameters()), config_.adam()),
      controller_(config_.controller()),
      noise_(derive_seed(config_.seed, 2)) {}

StepGraph<Trainer::Real> Trainer::forward(const Tensor<Real>& batch) {
  const std::size_t b = batch.shape().empty() ? 0 : batch.dim(0);
  Tensor<Real> epsilon = noise_.normal<Real>(Shape{b, config_.latent_dim});
  Tensor<Real> z_g = sample_prior<Real>(b, config_.latent_dim, noise_);
  return build_step_graph(gen_, disc_, batch, std::move(epsilon), std::move(z_g), controller_.k,
                          {config_.alpha, config_.beta, config_.gamma}, config_.fake_energy);
}

void Trainer::update_encoder(const StepGraph<Real>& g) {
  g.L_enc.backward(opt_enc_.params());
  opt_enc_.step();
}

void Trainer::update_decoder(const StepGraph<Real>& g) {
  g.L_gen.backward(opt_dec_.params());
  opt_dec_.step();
}

double Trainer::step_controller(const LossParts& p) {
  running_.fake += p.L_g;
  running_.recon += p.L_v;
  running_.real += p.L_d;
  running_.count += 1;
  if (config_.adaptive_eta && running_.real > 0) {
    controller_.eta = std::clamp(diversity_estimate(), 1e-6, 1.0);
  }
  const double e = error_signal(p.L_d, p.L_g, p.L_v, controller_);
  controller_ = update_k(e, controller_);
  return e;
}

void Trainer::update_discriminator(const StepGraph<Real>& g) {
  g.L_dis.backward(opt_disc_.params());
  opt_disc_.step();
}

double Trainer::diversity_estimate() const {
  if (running_.count == 0) return 0.0;
  const double n = static_cast<double>(running_.count);
  return diversity_ratio(running_.fake / n, running_.recon / n, running_.real / n,
                         config_.alpha);
}

LossBundle Trainer::step(const Tensor<Real>& batch) {
  StepGraph<Real> g = forward(batch);
  const LossParts p = g.parts();
  LossBundle b;
  b.iteration = iteration_ + 1;
  b.L_e = p.L_e;
  b.L_n = p.L_n;
  b.L_d = p.L_d;
  b.L_g = p.L_g;
  b.L_v = p.L_v;
  b.L_s = p.L_s;
  b.L_enc = g.L_enc.item();
  b.L_gen = g.L_gen.item();
  b.L_dis = g.L_dis.item();
  if (!b.all_finite()) {
    throw NumericError("non-finite loss at iteration " + std::to_string(b.iteration) + "\n" +
                       b.describe());
  }
  update_encoder(g);
  update_decoder(g);
  b.e_t = step_controller(p);
  b.k_t = controller_.k;
  b.M = convergence_measure(p.L_d, p.L_g, p.L_v, controller_.eta, config_.alpha);
  update_discriminator(g);
  iteration_ += 1;
  return b;
}

template struct StepGraph<float>;
template struct StepGraph<double>;
template StepGraph<float> build_step_graph(const Generator<float>&, const Discriminator<float>&,
                                           const Tensor<float>&, Tensor<float>, Tensor<float>,
                                           double, const LossWeights&, FakeEnergy);
template StepGraph<double> build_step_graph(const Generator<double>&,
                                            const Discriminator<double>&, const Tensor<double>&,
                                            Tensor<double>, Tensor<double>, double,
                                            const LossWeights&, FakeEnergy);

}  // namespace avae
