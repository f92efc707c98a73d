#include "avae/discriminator.hpp"

#include "avae/ops.hpp"

namespace avae {

template <typename T>
Discriminator<T>::Discriminator(const ArchConfig& arch, Rng& rng)
    : arch_(arch),
      trunk_(arch, rng),
      head_(AffineLayer<T>::init(arch.flat_features(), arch.latent_dim, rng)),
      decoder_(arch, rng) {}

template <typename T>
Var<T> Discriminator<T>::encode(const Var<T>& x) const {
  return head_(trunk_(x));
}

template <typename T>
Var<T> Discriminator<T>::decode(const Var<T>& z) const {
  return decoder_(z);
}

template <typename T>
DiscPass<T> Discriminator<T>::pass(const Var<T>& x, const Var<T>& x_g, const Var<T>& x_v) const {
  require_same_shape(x.shape(), x_g.shape(), "discriminator x/x_g");
  require_same_shape(x.shape(), x_v.shape(), "discriminator x/x_v");
  DiscPass<T> p;
  p.z_d = encode(x);
  p.z_g = encode(x_g);
  p.z_v = encode(x_v);
  p.x_d = decode(p.z_d);
  p.x_g = decode(p.z_g);
  p.x_v = decode(p.z_v);
  return p;
}

template <typename T>
NamedParams<T> Discriminator<T>::encoder_parameters() const {
  NamedParams<T> out;
  trunk_.collect("disc.enc.", out);
  out.emplace_back("disc.enc.head.weight", head_.weight);
  out.emplace_back("disc.enc.head.bias", head_.bias);
  return out;
}

template <typename T>
NamedParams<T> Discriminator<T>::decoder_parameters() const {
  NamedParams<T> out;
  decoder_.collect("disc.dec.", out);
  return out;
}

template <typename T>
NamedParams<T> Discriminator<T>::named_parameters() const {
  NamedParams<T> out = encoder_parameters();
  auto dec = decoder_parameters();
  out.insert(out.end(), dec.begin(), dec.end());
  return out;
}

template <typename T>
Energies<T> reconstruction_energies(const Var<T>& x, const Var<T>& x_g, const Var<T>& x_v,
                                    const Var<T>& rx_d, const Var<T>& rx_g, const Var<T>& rx_v,
                                    FakeEnergy mode) {
  require_same_shape(x.shape(), x_g.shape(), "energies x/x_g");
  require_same_shape(x.shape(), x_v.shape(), "energies x/x_v");
  const Var<T>& fake_ref = mode == FakeEnergy::SelfReconstruction ? x_g : x;
  return {l1_mean(x, rx_d), l1_mean(fake_ref, rx_g), l1_mean(x_v, rx_v)};
}

template <typename T>
std::pair<Energies<T>, DiscPass<T>> energies(const Discriminator<T>& disc, const Var<T>& x,
                                             const Var<T>& x_g, const Var<T>& x_v,
                                             FakeEnergy mode) {
  DiscPass<T> p = disc.pass(x, x_g, x_v);
  Energies<T> e = reconstruction_energies(x, x_g, x_v, p.x_d, p.x_g, p.x_v, mode);
  return {e, p};
}

template <typename T>
Var<T> latent_similarity(const Var<T>& z_d, const Var<T>& z_v) {
  require_same_shape(z_d.shape(), z_v.shape(), "latent_similarity");
  // mean over B*N elements == (1/N) * batch mean of the per-sample l1 norm.
  return l1_mean(z_d, z_v);
}

template class Discriminator<float>;
template class Discriminator<double>;

#define AVAE_INSTANTIATE_DISC(T)                                                          \
  template Energies<T> reconstruction_energies(const Var<T>&, const Var<T>&, const Var<T>&, \
                                               const Var<T>&, const Var<T>&, const Var<T>&, \
                                               FakeEnergy);                                 \
  template std::pair<Energies<T>, DiscPass<T>> energies(                                    \
      const Discriminator<T>&, const Var<T>&, const Var<T>&, const Var<T>&, FakeEnergy);    \
  template Var<T> latent_similarity(const Var<T>&, const Var<T>&);

AVAE_INSTANTIATE_DISC(float)
AVAE_INSTANTIATE_DISC(double)

}  // namespace avae
