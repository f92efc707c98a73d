#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avae/tensor.hpp"

namespace avae {

template <typename T>
struct Node {
  Tensor<T> value;
  std::optional<Tensor<T>> grad;
  bool requires_grad = false;
  // Set per backward pass: true when this node leads to a target leaf.
  bool active = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `self.grad` and accumulates into parents that are active.
  std::function<void(Node& self)> backward_fn;

  bool is_leaf() const noexcept { return parents.empty(); }

  /// grad += g (allocating a zero gradient first if absent).
  void accumulate(std::span<const T> g);
  /// Mutable gradient buffer, zero-allocated on first use.
  std::span<T> grad_buffer();
};

/// Handle to a node in the computation graph. Copies share the node.
///
/// Leaves are created with `Var::leaf` (parameters, requires_grad) or
/// `Var::constant`. Every op in ops.hpp returns a fresh non-leaf Var whose
/// parents are its inputs; the graph is therefore acyclic by construction.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var leaf(Tensor<T> value, bool requires_grad = true);
  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor<T>& value() const { return node_->value; }
  /// Mutable access for optimizers and gradient checks; never call while a
  /// graph that captured this value still needs to run backward.
  Tensor<T>& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  T item() const { return node_->value.item(); }

  bool requires_grad() const noexcept { return node_->requires_grad; }
  const std::optional<Tensor<T>>& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.has_value(); }
  void zero_grad() { node_->grad.reset(); }

  /// Reverse-mode sweep from this scalar. Gradients accumulate additively
  /// into every requires_grad leaf reachable from here.
  void backward() const;
  /// Same, but only leaves in `targets` receive gradients and only the
  /// subgraph between them and this scalar is traversed.
  void backward(std::span<const Var> targets) const;

  Node<T>* node() const noexcept { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

template <typename T>
using Params = std::vector<Var<T>>;

/// Clear gradients on every parameter in the list.
template <typename T>
void zero_grads(std::span<Var<T>> params) {
  for (auto& p : params) p.zero_grad();
}

/// Builds the result node of an op. `backward_fn` may be empty for ops that
/// never need gradients. Throws NumericError if `value` has NaN/Inf.
template <typename T>
Var<T> make_result(const char* op, Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward_fn);

extern template struct Node<float>;
extern template struct Node<double>;
extern template class Var<float>;
extern template class Var<double>;

}  // namespace avae
