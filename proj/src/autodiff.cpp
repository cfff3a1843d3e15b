#include "amf/autodiff.hpp"

#include <string>
#include <unordered_set>

#include "amf/errors.hpp"

namespace amf {

using detail::Node;

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

Tensor Var::grad() const {
  if (node_->grad.empty()) return Tensor(node_->value.shape());
  return node_->grad;
}

void Var::zero_grad() const { node_->grad = Tensor(); }

Var Var::detached() const {
  return node_->requires_grad ? parameter(node_->value) : constant(node_->value);
}

Real Var::item() const {
  if (node_->value.size() != 1) {
    throw ShapeMismatch("item() on tensor of shape " + shape_string(node_->value.shape()));
  }
  return node_->value[0];
}

Var make_op_result(Tensor value, std::vector<Var> parents,
                   std::function<void(Node&)> propagate, const char* op_name) {
  if (!value.all_finite()) {
    throw NonFiniteValue(std::string(op_name) + " produced a non-finite value");
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->is_leaf = false;
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(std::move(p.node_));
    node->propagate = std::move(propagate);
  }
  return Var(std::move(node));
}

void backward(const Var& loss) {
  const Tensor& v = loss.value();
  if (v.size() != 1) {
    throw NonScalarLoss("backward() needs a scalar loss, got shape " + shape_string(v.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node_.get(), 0}};
  visited.insert(loss.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Node& root = *loss.node_;
  if (root.grad.empty()) root.grad = Tensor(v.shape());
  root.grad[0] += 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node& node = **it;
    if (node.is_leaf) continue;
    if (!node.grad.empty() && node.propagate) node.propagate(node);
    node.grad = Tensor();  // intermediate gradients are not retained
  }
}

}  // namespace amf
