// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode tape. Nodes are created in topological order by the op
// constructors in ops.hpp; backward() walks the tape in reverse.

#ifndef WSEP_GRAPH_HPP_
#define WSEP_GRAPH_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wsep/tensor.hpp"

namespace wsep {

template <typename T>
struct Node {
  Tensor<T> val;
  Tensor<T> grad;          // allocated lazily, zero-initialized
  bool needs_grad = false;
  std::function<void()> backfn;  // accumulates into parent grads

  void ensure_grad() {
    if (grad.shape != val.shape) {
      grad = Tensor<T>(val.shape);
    }
  }
};

template <typename T>
using ParamMap = std::map<std::string, Tensor<T>>;

template <typename T>
class Graph {
 public:
  Node<T>* leaf(Tensor<T> value, bool needs_grad = false) {
    auto node = std::make_unique<Node<T>>();
    node->val = std::move(value);
    node->needs_grad = needs_grad;
    nodes_.push_back(std::move(node));
    return nodes_.back().get();
  }

  // Leaf bound to a named parameter in `store`. The value is copied in;
  // after backward() the gradient is read back through params().
  Node<T>* param(ParamMap<T>& store, const std::string& name, bool trainable) {
    auto it = store.find(name);
    WSEP_CHECK(it != store.end(), "unknown parameter: " << name);
    Node<T>* n = leaf(it->second, trainable);
    params_.emplace_back(name, n);
    return n;
  }

  Node<T>* make(Tensor<T> value, std::vector<Node<T>*> parents,
                std::function<void()> backfn) {
    bool needs = false;
    for (auto* p : parents) needs = needs || p->needs_grad;
    auto node = std::make_unique<Node<T>>();
    node->val = std::move(value);
    node->needs_grad = needs;
    if (needs) node->backfn = std::move(backfn);
    nodes_.push_back(std::move(node));
    return nodes_.back().get();
  }

  // Seeds d(loss)/d(loss) = 1 and runs the tape backwards.
  void backward(Node<T>* loss) {
    WSEP_CHECK(loss->val.numel() == 1, "backward expects a scalar loss");
    for (auto& n : nodes_)
      if (n->needs_grad) n->ensure_grad();
    loss->grad.data[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node<T>* n = it->get();
      if (n->needs_grad && n->backfn) n->backfn();
    }
  }

  const std::vector<std::pair<std::string, Node<T>*>>& params() const {
    return params_;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::unique_ptr<Node<T>>> nodes_;
  std::vector<std::pair<std::string, Node<T>*>> params_;
};

}  // namespace wsep

#endif  // WSEP_GRAPH_HPP_
