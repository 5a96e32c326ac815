#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "comrisk/tensor.hpp"

namespace comrisk {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode differentiation tape.
///
/// Nodes are appended in evaluation order, so insertion order is a
/// topological order and backward() walks it in reverse, visiting each node
/// once. A node requires a gradient iff one of its inputs does.
class Tape {
 public:
  /// Receives the output gradient and one slot per input. A slot is null when
  /// that input does not require a gradient.
  using BackwardFn =
      std::function<void(const Tensor& grad_out, std::vector<Tensor*>& grad_in)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value, std::string name = {});

  /// Appends an operation result. `backward` may be empty when no input
  /// requires a gradient. Throws NumericError if `value` is not finite.
  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward,
             const char* op_name);

  /// Seeds d(root)/d(root) = 1 and propagates. `root` must hold one element.
  void backward(Var root);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const std::string& name(std::size_t id) const { return nodes_[id].name; }
  std::size_t size() const { return nodes_.size(); }

  /// Number of node visits made by the last backward(); used by tests.
  std::size_t last_backward_visits() const { return last_visits_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::string name;
  };

  Tensor& grad_slot(std::size_t id);

  std::vector<Node> nodes_;
  std::size_t last_visits_ = 0;
};

}  // namespace comrisk
