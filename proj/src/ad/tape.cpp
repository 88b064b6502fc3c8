#include "dsnt/ad/tape.hpp"

#include <cmath>

namespace dsnt::ad {

ParamId ParameterSet::add(std::string name, Tensor init) {
  if (index_.count(name)) throw Error("duplicate parameter name: " + name);
  ParamId id = values_.size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return id;
}

std::optional<ParamId> ParameterSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamId ParameterSet::at(std::string_view name) const {
  auto id = find(name);
  if (!id) throw Error("unknown parameter: " + std::string(name));
  return *id;
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& t : values_) n += t.size();
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : values_)
    if (!t.all_finite()) return false;
  return true;
}

void ParameterSet::init_uniform(ParamId id, double range, Rng& rng) {
  for (auto& x : values_[id].data()) x = (2.0 * uniform01(rng) - 1.0) * range;
}

Gradients::Gradients(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (ParamId i = 0; i < params.size(); ++i) grads_.emplace_back(params.value(i).shape());
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw Error("gradient sets differ in size");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].data();
    auto src = other.grads_[i].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_)
    for (auto& x : g.data()) x *= factor;
}

double Gradients::global_norm() const {
  double s = 0.0;
  for (const auto& g : grads_)
    for (double x : g.data()) s += x * x;
  return std::sqrt(s);
}

double Gradients::clip_global_norm(double max_norm) {
  double norm = global_norm();
  if (norm > max_norm && norm > 0.0) scale(max_norm / norm);
  return norm;
}

Var Tape::constant(Tensor value) {
  return push("constant", std::move(value), {}, nullptr);
}

Var Tape::variable(Tensor value) {
  Var v = push("variable", std::move(value), {}, nullptr);
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Tape::param(ParamId id) {
  if (!params_) throw Error("tape has no parameter set");
  if (id >= params_->size()) throw Error("parameter id out of range");
  auto it = param_nodes_.find(id);
  if (it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.ref = &params_->value(id);
  n.param = static_cast<std::int64_t>(id);
  n.requires_grad = true;
  n.op = "param";
  nodes_.push_back(std::move(n));
  auto nid = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_nodes_.emplace(id, nid);
  return Var{this, nid};
}

const Tensor& Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

Var Tape::push(const char* op, Tensor value, std::vector<std::uint32_t> inputs, BackwardFn fn) {
  if (!value.all_finite()) throw Error(std::string("non-finite result in ") + op);
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (auto in : inputs) n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

std::span<double> Tape::grad_target(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.param >= 0 && sink_) return (*sink_)[static_cast<ParamId>(n.param)].data();
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad.data();
}

void Tape::backward(Var loss, Gradients* out) {
  if (loss.tape != this) throw Error("backward: loss belongs to another tape");
  if (value(loss.id).size() != 1) throw Error("backward: loss is not a scalar, shape " +
                                              shape_string(value(loss.id).shape()));
  if (out && params_ && out->size() != params_->size()) throw Error("backward: gradient set mismatch");
  for (auto& n : nodes_) n.grad = Tensor();
  sink_ = out;
  grad_target(loss.id)[0] = 1.0;
  for (std::int64_t i = loss.id; i >= 0; --i) {
    auto id = static_cast<std::uint32_t>(i);
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
  sink_ = nullptr;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return Tensor(value(v.id).shape());
  return n.grad;
}

}  // namespace dsnt::ad
