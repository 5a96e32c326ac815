#include "comrisk/params.hpp"

#include <cmath>

#include "comrisk/errors.hpp"

namespace comrisk {

void ParamStore::add(std::string name, Tensor value) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

bool ParamStore::contains(const std::string& name) const {
  return index_.contains(name);
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter " + name);
  return entries_[it->second].second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter " + name);
  return entries_[it->second].second;
}

std::size_t ParamStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.size();
  return n;
}

BoundParams::BoundParams(Tape& tape, const ParamStore& store) : tape_(&tape) {
  ordered_.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    Var v = tape.parameter(store.value(i), store.name(i));
    ordered_.push_back(v);
    vars_.emplace(store.name(i), v);
  }
}

Var BoundParams::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigError("parameter not bound: " + name);
  return it->second;
}

std::vector<Tensor> BoundParams::gradients() const {
  std::vector<Tensor> out;
  out.reserve(ordered_.size());
  for (const Var& v : ordered_) out.push_back(v.grad());
  return out;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t({rows, cols}, 0.0);
  for (double& x : t.storage()) x = rng.uniform(-a, a);
  return t;
}

}  // namespace comrisk
