#ifndef JSCC_GRAPH_HPP_
#define JSCC_GRAPH_HPP_

#include <functional>
#include <stdexcept>
#include <vector>

#include "jscc/tensor.hpp"

namespace jscc {

/// Reverse-mode tape. Nodes are appended in evaluation order; backward walks
/// the tape from the loss node down, so creation order is the topological
/// order. A graph instance is single-threaded; concurrent forward passes each
/// build their own graph over shared (read-only) parameter tensors.
template <typename S>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&)>;

  int add_leaf(Tensor<S> v, bool requires_grad) {
    Node n;
    n.owned = std::move(v);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  /// Leaf that aliases external storage (model parameters); the caller keeps
  /// the tensor alive for the graph's lifetime.
  int add_leaf_ref(const Tensor<S>* v, bool requires_grad) {
    Node n;
    n.external = v;
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_op(Tensor<S> v, bool requires_grad, BackwardFn fn) {
    Node n;
    n.owned = std::move(v);
    n.requires_grad = requires_grad;
    if (requires_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Tensor<S>& val(int id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.external != nullptr ? *n.external : n.owned;
  }

  bool requires_grad(int id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  bool has_grad(int id) const { return nodes_[static_cast<size_t>(id)].grad_present; }

  /// Gradient tensor for a node, zero-initialized on first access.
  Tensor<S>& grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_present) {
      n.grad = Tensor<S>(val(id).shape());
      n.grad_present = true;
    }
    return n.grad;
  }

  /// Runs reverse-mode accumulation from a scalar root. `seed` is the
  /// gradient of the overall objective with respect to the root value.
  void backward(int root, S seed = S(1)) {
    if (val(root).numel() != 1) {
      throw std::invalid_argument("backward root must be a scalar node");
    }
    grad(root)[0] += seed;
    for (int id = root; id >= 0; --id) {
      Node& n = nodes_[static_cast<size_t>(id)];
      if (n.grad_present && n.backward) n.backward(*this);
    }
  }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor<S> owned;
    const Tensor<S>* external = nullptr;
    Tensor<S> grad;
    bool grad_present = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

}  // namespace jscc

#endif  // JSCC_GRAPH_HPP_
