#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "avae/latent.hpp"
#include "avae/scoring.hpp"
#include "avae/synth.hpp"
#include "avae/training.hpp"

namespace py = pybind11;
using namespace avae;

namespace {

using F32 = py::array_t<float, py::array::c_style | py::array::forcecast>;
using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T, typename A>
Tensor<T> to_tensor(const A& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor<T>(std::move(shape), std::vector<T>(a.data(), a.data() + a.size()));
}

template <typename T>
py::array_t<T> to_numpy(const Tensor<T>& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<T> out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict bundle_dict(const LossBundle& b) {
  py::dict d;
  d["iteration"] = b.iteration;
  d["L_e"] = b.L_e;
  d["L_n"] = b.L_n;
  d["L_d"] = b.L_d;
  d["L_g"] = b.L_g;
  d["L_v"] = b.L_v;
  d["L_s"] = b.L_s;
  d["L_dis"] = b.L_dis;
  d["L_gen"] = b.L_gen;
  d["L_enc"] = b.L_enc;
  d["e_t"] = b.e_t;
  d["k_t"] = b.k_t;
  d["M"] = b.M;
  return d;
}

RunConfig config_from(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig cfg = parse_config(text);
  for (const auto& s : overrides) apply_assignment(cfg, s);
  return cfg;
}

std::vector<Latent> latents_from(const F64& a) {
  if (a.ndim() != 2) throw DimensionError("expected a [count, N] array of latents");
  std::vector<Latent> out;
  const std::size_t n = a.shape(1);
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.push_back(Tensor<double>(Shape{n}, std::vector<double>(a.data(i, 0), a.data(i, 0) + n)));
  return out;
}

py::array_t<double> stack(const std::vector<Latent>& zs) {
  const std::size_t n = zs.empty() ? 0 : zs[0].size();
  py::array_t<double> out({static_cast<py::ssize_t>(zs.size()), static_cast<py::ssize_t>(n)});
  for (std::size_t i = 0; i < zs.size(); ++i) std::copy(zs[i].data().begin(), zs[i].data().end(), out.mutable_data(i, 0));
  return out;
}

/// Inference handle over a saved checkpoint.
struct Model {
  Checkpoint ckpt;
  Generator<float> gen;
  explicit Model(const std::filesystem::path& path) : ckpt(load_checkpoint(path)), gen(load_generator(ckpt)) {}
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adversarial VAE training engine";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  // Closed-form pieces.
  m.def("kl_loss", [](const F64& mu, const F64& log_var) {
    return kl_loss<double>({Var<double>::constant(to_tensor<double>(mu)), Var<double>::constant(to_tensor<double>(log_var))}).item();
  }, py::arg("mu"), py::arg("log_var"));
  m.def("composite_losses", [](double L_e, double L_n, double L_d, double L_g, double L_v, double L_s, double k,
                               double alpha, double beta, double gamma) {
    const auto c = composite_losses({L_e, L_n, L_d, L_g, L_v, L_s}, k, {alpha, beta, gamma});
    return py::make_tuple(c.dis, c.gen, c.enc);
  }, py::arg("L_e"), py::arg("L_n"), py::arg("L_d"), py::arg("L_g"), py::arg("L_v"), py::arg("L_s"),
     py::arg("k"), py::arg("alpha") = 0.3, py::arg("beta") = 0.1, py::arg("gamma") = 0.1);
  m.def("convergence_measure", &convergence_measure, py::arg("L_d"), py::arg("L_g"), py::arg("L_v"),
        py::arg("eta") = 0.5, py::arg("alpha") = 0.3);
  m.def("diversity_ratio", &diversity_ratio, py::arg("mean_fake"), py::arg("mean_recon"),
        py::arg("mean_real"), py::arg("alpha") = 0.3);

  py::class_<ControllerState>(m, "ControllerState")
      .def(py::init<>())
      .def_readwrite("k", &ControllerState::k)
      .def_readwrite("e_prev", &ControllerState::e_prev)
      .def_readwrite("e_prev2", &ControllerState::e_prev2)
      .def_readwrite("lambda1", &ControllerState::lambda1)
      .def_readwrite("lambda2", &ControllerState::lambda2)
      .def_readwrite("lambda3", &ControllerState::lambda3)
      .def_readwrite("eta", &ControllerState::eta)
      .def_readwrite("alpha", &ControllerState::alpha)
      .def("error_signal", [](const ControllerState& s, double L_d, double L_g, double L_v) {
        return error_signal(L_d, L_g, L_v, s);
      })
      .def("update", [](const ControllerState& s, double e) { return update_k(e, s); });

  m.def("inception_score", [](const F64& probs, std::size_t splits) {
    return inception_score_from_probs(to_tensor<double>(probs), splits).score;
  }, py::arg("probs"), py::arg("splits") = 1);

  // Latent arithmetic on [count, N] float64 arrays.
  m.def("interpolate", [](const F64& a, const F64& b, std::size_t steps) {
    return stack(interpolate(to_tensor<double>(a), to_tensor<double>(b), steps));
  }, py::arg("z_a"), py::arg("z_b"), py::arg("steps"));
  m.def("build_attribute", [](const F64& with, const F64& without) {
    return to_numpy(build_attribute(latents_from(with), latents_from(without), "attr").vector);
  }, py::arg("with_attr"), py::arg("without_attr"));
  m.def("apply_attribute", [](const F64& z, const F32& vec, double weight) {
    return to_numpy(apply_attribute(to_tensor<double>(z), {"attr", to_tensor<float>(vec), 0, 0}, weight));
  }, py::arg("z"), py::arg("vector"), py::arg("weight"));

  // Configuration.
  m.def("default_config", [] { return format_config(RunConfig{}); });
  m.def("config_keys", &config_keys);
  m.def("normalize_config", [](const std::string& text, const std::vector<std::string>& overrides) {
    return format_config(config_from(text, overrides));
  }, py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});

  // Data and training.
  m.def("write_synth_dataset", [](const std::filesystem::path& dir, std::size_t count, std::size_t size,
                                  std::uint64_t seed) { write_synth_dataset(dir, {count, size, seed}); },
        py::arg("dir"), py::arg("count") = 5000, py::arg("size") = 32, py::arg("seed") = 0);
  m.def("load_images", [](const std::filesystem::path& dir) { return to_numpy(load_dataset(dir).images); });

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const std::string& text, const std::vector<std::string>& overrides) {
             return Trainer(config_from(text, overrides).train);
           }), py::arg("config") = "", py::arg("overrides") = std::vector<std::string>{})
      .def("step", [](Trainer& t, const F32& batch) {
        const Tensor<float> x = to_tensor<float>(batch);
        LossBundle b;
        {
          py::gil_scoped_release release;
          b = t.step(x);
        }
        return bundle_dict(b);
      }, py::arg("batch"))
      .def_property_readonly("iteration", &Trainer::iteration)
      .def_property_readonly("k", [](const Trainer& t) { return t.controller().k; })
      .def("sample", [](const Trainer& t, std::size_t count, std::uint64_t seed) {
        const auto z = sample_prior<float>(count, t.config().latent_dim, seed);
        return to_numpy(t.generator().decode(Var<float>::constant(z)).value());
      }, py::arg("count"), py::arg("seed") = 0)
      .def("save", [](const Trainer& t, const std::filesystem::path& path) {
        RunConfig cfg;
        cfg.train = t.config();
        save_checkpoint(path, snapshot(t, cfg));
      });

  m.def("train", [](const std::filesystem::path& data, const std::filesystem::path& out,
                    const std::string& text, const std::vector<std::string>& overrides) {
    RunConfig cfg = config_from(text, overrides);
    cfg.data = data.string();
    const Dataset ds = load_dataset(data);
    TrainingResult r;
    {
      py::gil_scoped_release release;
      r = run_training(ds, cfg, {out});
    }
    return r.iterations;
  }, py::arg("data"), py::arg("out"), py::arg("config") = "",
     py::arg("overrides") = std::vector<std::string>{});

  py::class_<Model>(m, "Model")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def_property_readonly("latent_dim", [](const Model& mo) { return mo.gen.arch().latent_dim; })
      .def_property_readonly("config", [](const Model& mo) { return format_config(checkpoint_config(mo.ckpt)); })
      .def("encode", [](const Model& mo, const F32& images) { return stack(encode_means(mo.gen, to_tensor<float>(images))); })
      .def("decode", [](const Model& mo, const F64& z) { return to_numpy(decode_latents(mo.gen, latents_from(z))); })
      .def("sample", [](const Model& mo, std::size_t count, std::uint64_t seed) {
        const auto z = sample_prior<float>(count, mo.gen.arch().latent_dim, seed);
        return to_numpy(mo.gen.decode(Var<float>::constant(z)).value());
      }, py::arg("count"), py::arg("seed") = 0)
      .def("attributes", [](const Model& mo) { return stored_attributes(mo.ckpt); })
      .def("attribute", [](const Model& mo, const std::string& name) { return to_numpy(load_attribute(mo.ckpt, name).vector); });
}
