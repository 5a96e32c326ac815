#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "comrisk/autodiff.hpp"
#include "comrisk/rng.hpp"
#include "comrisk/tensor.hpp"

namespace comrisk {

/// Named trainable tensors in a fixed insertion order.
class ParamStore {
 public:
  void add(std::string name, Tensor value);
  bool contains(const std::string& name) const;
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t total_elements() const;
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Tensor& value(std::size_t i) { return entries_[i].second; }
  const Tensor& value(std::size_t i) const { return entries_[i].second; }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The parameters of a ParamStore registered as leaves on one tape.
class BoundParams {
 public:
  BoundParams(Tape& tape, const ParamStore& store);

  Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.contains(name); }
  Tape& tape() const { return *tape_; }

  /// Gradients after tape.backward(), ordered like the store.
  std::vector<Tensor> gradients() const;

 private:
  Tape* tape_;
  std::vector<Var> ordered_;
  std::unordered_map<std::string, Var> vars_;
};

/// U(-a, a) with a = sqrt(6 / (rows + cols)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace comrisk
