#include "avae/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blas.hpp"

namespace avae {

namespace {

template <typename T>
Node<T>& parent(Node<T>& self, std::size_t i) {
  return *self.parents[i];
}

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank) {
    throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(s));
  }
}

// Unrolls one sample [C,H,W] into columns [C*k*k, Ho*Wo].
template <typename T>
void im2col(const T* img, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo, T* col) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        T* row = col + ((c * k + ki) * k + kj) * ho * wo;
        for (std::size_t oh = 0; oh < ho; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + ki) -
                                    static_cast<std::ptrdiff_t>(pad);
          T* out = row + oh * wo;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(out, out + wo, T(0));
            continue;
          }
          const T* src = img + (c * h + static_cast<std::size_t>(ih)) * w;
          for (std::size_t ow = 0; ow < wo; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kj) -
                                      static_cast<std::ptrdiff_t>(pad);
            out[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(w))
                          ? T(0)
                          : src[static_cast<std::size_t>(iw)];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters columns back and accumulates into img.
template <typename T>
void col2im_add(const T* col, std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
                std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo, T* img) {
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t ki = 0; ki < k; ++ki) {
      for (std::size_t kj = 0; kj < k; ++kj) {
        const T* row = col + ((c * k + ki) * k + kj) * ho * wo;
        for (std::size_t oh = 0; oh < ho; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + ki) -
                                    static_cast<std::ptrdiff_t>(pad);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = img + (c * h + static_cast<std::size_t>(ih)) * w;
          const T* in = row + oh * wo;
          for (std::size_t ow = 0; ow < wo; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kj) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(w)) dst[iw] += in[ow];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, std::size_t stride,
              std::size_t padding) {
  const Shape& xs = input.shape();
  const Shape& ks = kernel.shape();
  require_rank(xs, 4, "conv2d input");
  require_rank(ks, 4, "conv2d kernel");
  if (stride == 0) throw UsageError("conv2d: stride must be >= 1");
  const std::size_t batch = xs[0], channels = xs[1], h = xs[2], w = xs[3];
  const std::size_t filters = ks[0], k = ks[2];
  if (ks[1] != channels) {
    throw DimensionError("conv2d: input has " + std::to_string(channels) +
                         " channels but kernel expects " + std::to_string(ks[1]));
  }
  if (ks[3] != k) throw DimensionError("conv2d: kernel must be square, got " + shape_str(ks));
  if (k > h + 2 * padding || k > w + 2 * padding) {
    throw DimensionError("conv2d: kernel " + shape_str(ks) + " larger than padded input " +
                         shape_str(xs));
  }
  const std::size_t ho = (h + 2 * padding - k) / stride + 1;
  const std::size_t wo = (w + 2 * padding - k) / stride + 1;
  const std::size_t ckk = channels * k * k, hw = ho * wo;
  const bool direct = (k == 1 && stride == 1 && padding == 0);

  Tensor<T> out(Shape{batch, filters, ho, wo});
  std::vector<T> col(direct ? 0 : ckk * hw);
  const T* x = input.value().data().data();
  const T* wgt = kernel.value().data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    const T* sample = x + b * channels * h * w;
    const T* cols = sample;
    if (!direct) {
      im2col(sample, channels, h, w, k, stride, padding, ho, wo, col.data());
      cols = col.data();
    }
    detail::gemm(false, false, int(filters), int(hw), int(ckk), T(1), wgt, int(ckk), cols,
                 int(hw), T(0), out.data().data() + b * filters * hw, int(hw));
  }

  return make_result<T>(
      "conv2d", std::move(out), {input, kernel},
      [=](Node<T>& self) {
        Node<T>& in = parent(self, 0);
        Node<T>& ker = parent(self, 1);
        const T* dout = self.grad->data().data();
        const T* xv = in.value.data().data();
        const T* wv = ker.value.data().data();
        T* dw = ker.active ? ker.grad_buffer().data() : nullptr;
        T* dx = in.active ? in.grad_buffer().data() : nullptr;
        std::vector<T> buf(direct ? 0 : ckk * hw);
        std::vector<T> dcol(direct || !dx ? 0 : ckk * hw);
        for (std::size_t b = 0; b < batch; ++b) {
          const T* g = dout + b * filters * hw;
          const T* sample = xv + b * channels * h * w;
          if (dw) {
            const T* cols = sample;
            if (!direct) {
              im2col(sample, channels, h, w, k, stride, padding, ho, wo, buf.data());
              cols = buf.data();
            }
            detail::gemm(false, true, int(filters), int(ckk), int(hw), T(1), g, int(hw), cols,
                         int(hw), T(1), dw, int(ckk));
          }
          if (dx) {
            T* dsample = dx + b * channels * h * w;
            if (direct) {
              detail::gemm(true, false, int(ckk), int(hw), int(filters), T(1), wv, int(ckk), g,
                           int(hw), T(1), dsample, int(hw));
            } else {
              detail::gemm(true, false, int(ckk), int(hw), int(filters), T(1), wv, int(ckk), g,
                           int(hw), T(0), dcol.data(), int(hw));
              col2im_add(dcol.data(), channels, h, w, k, stride, padding, ho, wo, dsample);
            }
          }
        }
      });
}

template <typename T>
Var<T> add_bias(const Var<T>& input, const Var<T>& bias) {
  const Shape& xs = input.shape();
  require_rank(bias.shape(), 1, "add_bias bias");
  if (xs.size() != 2 && xs.size() != 4) {
    throw DimensionError("add_bias: expected [B,F] or [B,C,H,W], got " + shape_str(xs));
  }
  const std::size_t channels = xs[1];
  if (bias.shape()[0] != channels) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(xs));
  }
  const std::size_t batch = xs[0];
  const std::size_t inner = xs.size() == 4 ? xs[2] * xs[3] : 1;
  Tensor<T> out = input.value();
  auto o = out.data();
  auto bv = bias.value().data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c) {
      T* p = o.data() + (b * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) p[i] += bv[c];
    }
  return make_result<T>("add_bias", std::move(out), {input, bias},
                        [=](Node<T>& self) {
                          auto g = self.grad->data();
                          Node<T>& in = parent(self, 0);
                          Node<T>& bn = parent(self, 1);
                          if (in.active) in.accumulate(g);
                          if (bn.active) {
                            auto db = bn.grad_buffer();
                            for (std::size_t b = 0; b < batch; ++b)
                              for (std::size_t c = 0; c < channels; ++c) {
                                const T* p = g.data() + (b * channels + c) * inner;
                                T acc = 0;
                                for (std::size_t i = 0; i < inner; ++i) acc += p[i];
                                db[c] += acc;
                              }
                          }
                        });
}

template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  require_rank(x.shape(), 2, "linear input");
  require_rank(weight.shape(), 2, "linear weight");
  const std::size_t batch = x.shape()[0], in_dim = x.shape()[1];
  const std::size_t out_dim = weight.shape()[0];
  if (weight.shape()[1] != in_dim) {
    throw DimensionError("linear: input width " + std::to_string(in_dim) +
                         " does not match weight " + shape_str(weight.shape()));
  }
  Tensor<T> out(Shape{batch, out_dim});
  // Row by row, so a sample's output does not depend on what else is in the
  // batch (a batched product may pick a different kernel and round differently).
  for (std::size_t b = 0; b < batch; ++b) {
    detail::gemm(false, true, 1, int(out_dim), int(in_dim), T(1),
                 x.value().data().data() + b * in_dim, int(in_dim), weight.value().data().data(),
                 int(in_dim), T(0), out.data().data() + b * out_dim, int(out_dim));
  }
  auto product = make_result<T>(
      "linear", std::move(out), {x, weight}, [=](Node<T>& self) {
        Node<T>& xn = parent(self, 0);
        Node<T>& wn = parent(self, 1);
        const T* g = self.grad->data().data();
        if (xn.active) {
          detail::gemm(false, false, int(batch), int(in_dim), int(out_dim), T(1), g,
                       int(out_dim), wn.value.data().data(), int(in_dim), T(1),
                       xn.grad_buffer().data(), int(in_dim));
        }
        if (wn.active) {
          detail::gemm(true, false, int(out_dim), int(in_dim), int(batch), T(1), g,
                       int(out_dim), xn.value.data().data(), int(in_dim), T(1),
                       wn.grad_buffer().data(), int(in_dim));
        }
      });
  return add_bias(product, bias);
}

template <typename T>
Var<T> elu(const Var<T>& x) {
  Tensor<T> out(x.shape());
  auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > T(0) ? in[i] : std::expm1(in[i]);
  return make_result<T>("elu", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = parent(self, 0);
    auto g = self.grad->data();
    auto y = self.value.data();
    auto xv = in.value.data();
    auto d = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (xv[i] > T(0) ? T(1) : y[i] + T(1));
  });
}

template <typename T>
Var<T> exp_excess(const Var<T>& x) {
  Tensor<T> out(x.shape());
  auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i];
    o[i] = static_cast<T>(std::expm1(v) - v);
  }
  return make_result<T>("exp_excess", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = parent(self, 0);
    auto g = self.grad->data();
    auto xv = in.value.data();
    auto d = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * std::expm1(xv[i]);
  });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  Tensor<T> out(x.shape());
  auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const T v = in[i];
    if (v >= T(0)) {
      o[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      o[i] = e / (T(1) + e);
    }
  }
  return make_result<T>("sigmoid", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = parent(self, 0);
    auto g = self.grad->data();
    auto y = self.value.data();
    auto d = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var<T> exp(const Var<T>& x) {
  Tensor<T> out(x.shape());
  auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = std::exp(in[i]);
  return make_result<T>("exp", std::move(out), {x}, [](Node<T>& self) {
    Node<T>& in = parent(self, 0);
    auto g = self.grad->data();
    auto y = self.value.data();
    auto d = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i];
  });
}

template <typename T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  if (!(lo <= hi)) throw UsageError("clamp: lo must not exceed hi");
  Tensor<T> out(x.shape());
  auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = std::clamp(in[i], lo, hi);
  return make_result<T>("clamp", std::move(out), {x}, [lo, hi](Node<T>& self) {
    Node<T>& in = parent(self, 0);
    auto g = self.grad->data();
    auto xv = in.value.data();
    auto d = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] >= lo && xv[i] <= hi) d[i] += g[i];
  });
}

template <typename T>
Var<T> downsample(const Var<T>& x) {
  const Shape& s = x.shape();
  require_rank(s, 4, "downsample");
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  if (h % 2 || w % 2) {
    throw DimensionError("downsample: spatial size must be even, got " + shape_str(s));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> out(Shape{s[0], s[1], oh, ow});
  const T* in = x.value().data().data();
  T* o = out.data().data();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        const T* r0 = in + (p * h + 2 * i) * w + 2 * j;
        const T* r1 = r0 + w;
        o[(p * oh + i) * ow + j] = ((r0[0] + r0[1]) + (r1[0] + r1[1])) * T(0.25);
      }
  return make_result<T>("downsample", std::move(out), {x}, [=](Node<T>& self) {
    Node<T>& inode = parent(self, 0);
    const T* g = self.grad->data().data();
    T* d = inode.grad_buffer().data();
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const T v = g[(p * oh + i) * ow + j] * T(0.25);
          T* r0 = d + (p * h + 2 * i) * w + 2 * j;
          T* r1 = r0 + w;
          r0[0] += v;
          r0[1] += v;
          r1[0] += v;
          r1[1] += v;
        }
  });
}

template <typename T>
Var<T> upsample(const Var<T>& x) {
  const Shape& s = x.shape();
  require_rank(s, 4, "upsample");
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  const std::size_t oh = 2 * h, ow = 2 * w;
  Tensor<T> out(Shape{s[0], s[1], oh, ow});
  const T* in = x.value().data().data();
  T* o = out.data().data();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) o[(p * oh + i) * ow + j] = in[(p * h + i / 2) * w + j / 2];
  return make_result<T>("upsample", std::move(out), {x}, [=](Node<T>& self) {
    Node<T>& inode = parent(self, 0);
    const T* g = self.grad->data().data();
    T* d = inode.grad_buffer().data();
    for (std::size_t p = 0; p < planes; ++p)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) d[(p * h + i / 2) * w + j / 2] += g[(p * oh + i) * ow + j];
  });
}

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> out = x.value().reshaped(std::move(shape));
  return make_result<T>("reshape", std::move(out), {x}, [](Node<T>& self) {
    parent(self, 0).accumulate(self.grad->data());
  });
}

template <typename T>
Var<T> detach(const Var<T>& x) {
  return Var<T>::constant(x.value());
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<T> out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return make_result<T>("add", std::move(out), {a, b}, [](Node<T>& self) {
    auto g = self.grad->data();
    for (std::size_t k = 0; k < 2; ++k)
      if (parent(self, k).active) parent(self, k).accumulate(g);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor<T> out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return make_result<T>("sub", std::move(out), {a, b}, [](Node<T>& self) {
    auto g = self.grad->data();
    if (parent(self, 0).active) parent(self, 0).accumulate(g);
    if (parent(self, 1).active) {
      auto d = parent(self, 1).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor<T> out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return make_result<T>("mul", std::move(out), {a, b}, [](Node<T>& self) {
    auto g = self.grad->data();
    Node<T>& an = parent(self, 0);
    Node<T>& bn = parent(self, 1);
    // Read both operands before writing: a and b may be the same node.
    std::vector<T> ga(g.size()), gb(g.size());
    auto av = an.value.data();
    auto bv = bn.value.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] = g[i] * bv[i];
      gb[i] = g[i] * av[i];
    }
    if (an.active) an.accumulate(ga);
    if (bn.active) bn.accumulate(gb);
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v *= factor;
  return make_result<T>("scale", std::move(out), {x}, [factor](Node<T>& self) {
    auto g = self.grad->data();
    auto d = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * factor;
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T offset) {
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v += offset;
  return make_result<T>("add_scalar", std::move(out), {x}, [](Node<T>& self) {
    parent(self, 0).accumulate(self.grad->data());
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  return make_result<T>("sum", Tensor<T>::scalar(acc), {x}, [](Node<T>& self) {
    const T g = (*self.grad)[0];
    for (auto& d : parent(self, 0).grad_buffer()) d += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  const T n = static_cast<T>(x.value().size());
  T acc = 0;
  for (T v : x.value().data()) acc += v;
  return make_result<T>("mean", Tensor<T>::scalar(acc / n), {x}, [n](Node<T>& self) {
    const T g = (*self.grad)[0] / n;
    for (auto& d : parent(self, 0).grad_buffer()) d += g;
  });
}

template <typename T>
Var<T> l1_mean(const Var<T>& a, const Var<T>& b) {
  require_same_shape(a.shape(), b.shape(), "l1_mean");
  auto av = a.value().data();
  auto bv = b.value().data();
  const T n = static_cast<T>(av.size());
  T acc = 0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(av[i] - bv[i]);
  return make_result<T>("l1_mean", Tensor<T>::scalar(acc / n), {a, b}, [n](Node<T>& self) {
    Node<T>& an = parent(self, 0);
    Node<T>& bn = parent(self, 1);
    const T g = (*self.grad)[0] / n;
    std::vector<T> d(an.value.size());
    auto x = an.value.data();
    auto y = bn.value.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const T diff = x[i] - y[i];
      d[i] = diff > T(0) ? g : (diff < T(0) ? -g : T(0));
    }
    if (an.active) an.accumulate(d);
    if (bn.active) {
      auto db = bn.grad_buffer();
      for (std::size_t i = 0; i < d.size(); ++i) db[i] -= d[i];
    }
  });
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  require_rank(logits.shape(), 2, "softmax_rows");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  Tensor<T> out(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = logits.data().data() + r * cols;
    T* o = out.data().data() + r * cols;
    const T mx = *std::max_element(in, in + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - mx));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return out;
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels) {
  require_rank(logits.shape(), 2, "cross_entropy");
  const std::size_t rows = logits.shape()[0], cols = logits.shape()[1];
  if (labels.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
  }
  std::vector<int> lab(labels.begin(), labels.end());
  for (int l : lab)
    if (l < 0 || static_cast<std::size_t>(l) >= cols)
      throw UsageError("cross_entropy: label " + std::to_string(l) + " out of range");
  Tensor<T> probs = softmax_rows(logits.value());
  T loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = logits.value().data().data() + r * cols;
    const T mx = *std::max_element(in, in + cols);
    T total = 0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(in[c] - mx);
    loss += mx + std::log(total) - in[lab[r]];
  }
  loss /= static_cast<T>(rows);
  return make_result<T>("cross_entropy", Tensor<T>::scalar(loss), {logits},
                        [=, probs = std::move(probs)](Node<T>& self) {
                          const T g = (*self.grad)[0] / static_cast<T>(rows);
                          auto d = parent(self, 0).grad_buffer();
                          for (std::size_t r = 0; r < rows; ++r)
                            for (std::size_t c = 0; c < cols; ++c) {
                              const T onehot = static_cast<int>(c) == lab[r] ? T(1) : T(0);
                              d[r * cols + c] += g * (probs[r * cols + c] - onehot);
                            }
                        });
}

#define AVAE_INSTANTIATE_OPS(T)                                                   \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, std::size_t, std::size_t); \
  template Var<T> add_bias(const Var<T>&, const Var<T>&);                         \
  template Var<T> linear(const Var<T>&, const Var<T>&, const Var<T>&);            \
  template Var<T> elu(const Var<T>&);                                             \
  template Var<T> sigmoid(const Var<T>&);                                         \
  template Var<T> exp(const Var<T>&);                                             \
  template Var<T> exp_excess(const Var<T>&);                                      \
  template Var<T> clamp(const Var<T>&, T, T);                                     \
  template Var<T> downsample(const Var<T>&);                                      \
  template Var<T> upsample(const Var<T>&);                                        \
  template Var<T> reshape(const Var<T>&, Shape);                                  \
  template Var<T> detach(const Var<T>&);                                          \
  template Var<T> add(const Var<T>&, const Var<T>&);                              \
  template Var<T> sub(const Var<T>&, const Var<T>&);                              \
  template Var<T> mul(const Var<T>&, const Var<T>&);                              \
  template Var<T> scale(const Var<T>&, T);                                        \
  template Var<T> add_scalar(const Var<T>&, T);                                   \
  template Var<T> sum(const Var<T>&);                                             \
  template Var<T> mean(const Var<T>&);                                            \
  template Var<T> l1_mean(const Var<T>&, const Var<T>&);                          \
  template Var<T> cross_entropy(const Var<T>&, std::span<const int>);             \
  template Tensor<T> softmax_rows(const Tensor<T>&);

AVAE_INSTANTIATE_OPS(float)
AVAE_INSTANTIATE_OPS(double)

}  // namespace avae
