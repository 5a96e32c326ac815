#include "comrisk/autodiff.hpp"

#include "comrisk/errors.hpp"

namespace comrisk {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor value, std::string name) {
  if (!value.all_finite()) {
    throw NumericError("parameter '" + name + "' holds non-finite values");
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward,
                 const char* op_name) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite output from ") + op_name);
  }
  Node n;
  n.value = std::move(value);
  n.name = op_name;
  for (const Var& v : inputs) {
    if (v.tape() != this) {
      throw Error(std::string(op_name) + ": input belongs to a different tape");
    }
    n.inputs.push_back(v.id());
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Tensor& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (!n.has_grad) {
    // Unreached leaves have a zero gradient of their own shape.
    auto& self = const_cast<Tape&>(*this);
    return self.grad_slot(id);
  }
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("backward: root from another tape");
  if (value(root.id()).size() != 1) {
    throw DimensionError("backward root must be a single element, got " +
                         shape_str(value(root.id()).shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad_slot(root.id()).fill(1.0);
  last_visits_ = 0;

  std::vector<Tensor*> slots;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    ++last_visits_;
    slots.assign(n.inputs.size(), nullptr);
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      if (nodes_[n.inputs[k]].requires_grad) slots[k] = &grad_slot(n.inputs[k]);
    }
    n.backward(n.grad, slots);
  }
}

}  // namespace comrisk
