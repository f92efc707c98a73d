#include "avae/generator.hpp"

#include "avae/ops.hpp"

namespace avae {

template <typename T>
Generator<T>::Generator(const ArchConfig& arch, Rng& rng)
    : arch_(arch),
      trunk_(arch, rng),
      mu_head_(AffineLayer<T>::init(arch.flat_features(), arch.latent_dim, rng)),
      log_var_head_(AffineLayer<T>::init(arch.flat_features(), arch.latent_dim, rng)),
      decoder_(arch, rng) {}

template <typename T>
GaussianParams<T> Generator<T>::encode(const Var<T>& x) const {
  Var<T> h = trunk_(x);
  return {mu_head_(h), clamp(log_var_head_(h), T(kLogVarMin), T(kLogVarMax))};
}

template <typename T>
Var<T> Generator<T>::decode(const Var<T>& z) const {
  return decoder_(z);
}

template <typename T>
NamedParams<T> Generator<T>::encoder_parameters() const {
  NamedParams<T> out;
  trunk_.collect("vae.enc.", out);
  out.emplace_back("vae.enc.mu.weight", mu_head_.weight);
  out.emplace_back("vae.enc.mu.bias", mu_head_.bias);
  out.emplace_back("vae.enc.logvar.weight", log_var_head_.weight);
  out.emplace_back("vae.enc.logvar.bias", log_var_head_.bias);
  return out;
}

template <typename T>
NamedParams<T> Generator<T>::decoder_parameters() const {
  NamedParams<T> out;
  decoder_.collect("vae.dec.", out);
  return out;
}

template <typename T>
NamedParams<T> Generator<T>::named_parameters() const {
  NamedParams<T> out = encoder_parameters();
  auto dec = decoder_parameters();
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

template <typename T>
ReparamSample<T> reparametrize(const GaussianParams<T>& g, Tensor<T> epsilon) {
  require_same_shape(g.mu.shape(), g.log_var.shape(), "reparametrize mu/log_var");
  require_same_shape(epsilon.shape(), g.mu.shape(), "reparametrize epsilon");
  Var<T> sigma = exp(scale(g.log_var, T(0.5)));
  Var<T> z = add(g.mu, mul(sigma, Var<T>::constant(epsilon)));
  return {z, std::move(epsilon)};
}

template <typename T>
ReparamSample<T> reparametrize(const GaussianParams<T>& g, Rng& rng) {
  return reparametrize(g, rng.normal<T>(g.mu.shape()));
}

template <typename T>
Var<T> data_loss(const Var<T>& x, const Var<T>& x_v) {
  return l1_mean(x, x_v);
}

template <typename T>
Var<T> kl_loss(const GaussianParams<T>& g) {
  require_same_shape(g.mu.shape(), g.log_var.shape(), "kl_loss");
  const Shape& s = g.mu.shape();
  const T batch = static_cast<T>(s[0]);
  // 0.5 * sum(mu^2 + sigma^2 - log sigma^2 - 1) / B, with the last three
  // terms fused so small posteriors do not cancel to zero in float.
  Var<T> terms = add(mul(g.mu, g.mu), exp_excess(g.log_var));
  return scale(sum(terms), T(0.5) / batch);
}

template <typename T>
Tensor<T> sample_prior(std::size_t batch, std::size_t latent_dim, Rng& rng) {
  if (batch == 0 || latent_dim == 0) throw UsageError("sample_prior: batch and N must be >= 1");
  return rng.normal<T>(Shape{batch, latent_dim});
}

template <typename T>
Tensor<T> sample_prior(std::size_t batch, std::size_t latent_dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample_prior<T>(batch, latent_dim, rng);
}

template class Generator<float>;
template class Generator<double>;

#define AVAE_INSTANTIATE_GEN(T)                                                        \
  template ReparamSample<T> reparametrize(const GaussianParams<T>&, Tensor<T>);        \
  template ReparamSample<T> reparametrize(const GaussianParams<T>&, Rng&);             \
  template Var<T> data_loss(const Var<T>&, const Var<T>&);                             \
  template Var<T> kl_loss(const GaussianParams<T>&);                                   \
  template Tensor<T> sample_prior(std::size_t, std::size_t, Rng&);                     \
  template Tensor<T> sample_prior(std::size_t, std::size_t, std::uint64_t);

AVAE_INSTANTIATE_GEN(float)
AVAE_INSTANTIATE_GEN(double)

}  // namespace avae
