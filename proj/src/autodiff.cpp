#include "avae/autodiff.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

namespace avae {

template <typename T>
void Node<T>::accumulate(std::span<const T> g) {
  auto buf = grad_buffer();
  if (g.size() != buf.size()) {
    throw DimensionError(std::string("gradient size mismatch in ") + op);
  }
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

template <typename T>
std::span<T> Node<T>::grad_buffer() {
  if (!grad) grad.emplace(value.shape(), T(0));
  return grad->data();
}

template <typename T>
Var<T> Var<T>::leaf(Tensor<T> value, bool requires_grad) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

template <typename T>
Var<T> make_result(const char* op, Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward_fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->op = op;
  bool needs = false;
  node->parents.reserve(inputs.size());
  for (auto& in : inputs) {
    needs = needs || in.requires_grad();
    node->parents.push_back(in.node_ptr());
  }
  node->requires_grad = needs;
  if (needs) node->backward_fn = std::move(backward_fn);
  return Var<T>(std::move(node));
}

namespace {

template <typename T>
std::vector<Node<T>*> topo_order(Node<T>* root) {
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  // Iterative post-order DFS; graphs can be deep enough to matter.
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

template <typename T>
void run_backward(Node<T>* root, const std::unordered_set<const Node<T>*>* targets) {
  if (root->value.size() != 1) {
    throw DimensionError("backward() requires a scalar root, got shape " +
                         shape_str(root->value.shape()));
  }
  if (!root->requires_grad) return;
  auto order = topo_order(root);
  for (Node<T>* n : order) {
    if (n->is_leaf()) {
      n->active = n->requires_grad && (!targets || targets->count(n) > 0);
    } else {
      n->active = std::any_of(n->parents.begin(), n->parents.end(),
                              [](const auto& p) { return p->requires_grad && p->active; });
      n->grad.reset();
    }
  }
  if (!root->active) return;
  if (root->is_leaf()) {
    root->accumulate(std::vector<T>{T(1)});
    return;
  }
  root->grad.emplace(root->value.shape(), T(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->is_leaf() || !n->active || !n->grad) continue;
    n->backward_fn(*n);
    // Intermediate gradients are not needed after propagation.
    if (n != root) n->grad.reset();
  }
  for (Node<T>* n : order) n->active = false;
}

}  // namespace

template <typename T>
void Var<T>::backward() const {
  run_backward<T>(node_.get(), nullptr);
}

template <typename T>
void Var<T>::backward(std::span<const Var> targets) const {
  std::unordered_set<const Node<T>*> set;
  for (const auto& t : targets) set.insert(t.node());
  run_backward<T>(node_.get(), &set);
}

template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template Var<float> make_result(const char*, Tensor<float>, std::vector<Var<float>>,
                                std::function<void(Node<float>&)>);
template Var<double> make_result(const char*, Tensor<double>, std::vector<Var<double>>,
                                 std::function<void(Node<double>&)>);

}  // namespace avae
