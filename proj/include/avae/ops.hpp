#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "avae/autodiff.hpp"

namespace avae {

// Differentiable operators. Every function returns a new graph node; inputs
// are never modified. Shapes are checked eagerly and violations throw
// DimensionError.

/// 2-D cross-correlation. input [B,C,H,W], kernel [F,C,k,k] -> [B,F,H',W'],
/// H' = (H + 2*padding - k) / stride + 1.
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& kernel, std::size_t stride = 1,
              std::size_t padding = 0);

/// Adds a per-channel bias. For [B,C,H,W] the bias is [C]; for [B,F] it is [F].
template <typename T>
Var<T> add_bias(const Var<T>& input, const Var<T>& bias);

/// Affine map: x [B,In] * weight[Out,In]^T + bias[Out] -> [B,Out].
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

template <typename T> Var<T> elu(const Var<T>& x);
template <typename T> Var<T> sigmoid(const Var<T>& x);
template <typename T> Var<T> exp(const Var<T>& x);
/// exp(x) - 1 - x, evaluated without cancellation near 0.
template <typename T> Var<T> exp_excess(const Var<T>& x);
/// Element-wise clamp; gradient is zero outside [lo, hi].
template <typename T> Var<T> clamp(const Var<T>& x, T lo, T hi);

/// 2x2 mean pooling. Odd H or W throws DimensionError.
template <typename T> Var<T> downsample(const Var<T>& x);
/// Nearest-neighbour 2x replication.
template <typename T> Var<T> upsample(const Var<T>& x);

template <typename T> Var<T> reshape(const Var<T>& x, Shape shape);
/// Same value, cut from the graph.
template <typename T> Var<T> detach(const Var<T>& x);

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> scale(const Var<T>& x, T factor);
template <typename T> Var<T> add_scalar(const Var<T>& x, T offset);

template <typename T> Var<T> sum(const Var<T>& x);
template <typename T> Var<T> mean(const Var<T>& x);

/// mean(|a - b|); the subgradient at a == b is 0.
template <typename T> Var<T> l1_mean(const Var<T>& a, const Var<T>& b);

/// Mean negative log-likelihood of integer labels under softmax(logits).
/// logits [B,C]; labels.size() == B, each in [0, C).
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const int> labels);

/// Row-wise softmax of a [B,C] tensor (no graph).
template <typename T> Tensor<T> softmax_rows(const Tensor<T>& logits);

template <typename T> Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <typename T> Var<T> operator*(T c, const Var<T>& x) { return scale(x, c); }

}  // namespace avae
