#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dsnt/ad/tensor.hpp"
#include "dsnt/common.hpp"

namespace dsnt::ad {

using ParamId = std::size_t;

/// Named, ordered model parameters. Insertion order is the serialization order.
class ParameterSet {
 public:
  ParamId add(std::string name, Tensor init);

  std::size_t size() const { return values_.size(); }
  const std::string& name(ParamId id) const { return names_[id]; }
  Tensor& value(ParamId id) { return values_[id]; }
  const Tensor& value(ParamId id) const { return values_[id]; }
  std::optional<ParamId> find(std::string_view name) const;
  ParamId at(std::string_view name) const;
  std::size_t total_elements() const;
  bool all_finite() const;

  /// Weight matrices uniform in [-range, range]; callers zero the biases.
  void init_uniform(ParamId id, double range, Rng& rng);

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, ParamId> index_;
};

/// One dense gradient tensor per parameter, zero-initialised.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& params);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](ParamId id) { return grads_[id]; }
  const Tensor& operator[](ParamId id) const { return grads_[id]; }

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  double global_norm() const;
  /// Rescales so the global L2 norm is at most `max_norm`; returns the norm before clipping.
  double clip_global_norm(double max_norm);

 private:
  std::vector<Tensor> grads_;
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

/// Dynamically built record of primitive operations. Nodes are appended in
/// evaluation order, so insertion order is a topological order and the
/// backward sweep visits them in reverse exactly once.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t)>;

  explicit Tape(const ParameterSet* params = nullptr) : params_(params) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is readable through grad() after backward().
  Var variable(Tensor value);
  /// Leaf bound to a parameter; created once per tape and reused.
  Var param(ParamId id);

  const Tensor& value(std::uint32_t id) const;
  const Tensor& value(Var v) const { return value(v.id); }
  std::size_t size() const { return nodes_.size(); }
  const ParameterSet* params() const { return params_; }

  /// Reverse sweep from a scalar. Parameter gradients are added into `out`
  /// (which must be shaped for this tape's ParameterSet); parameters the loss
  /// never reaches keep whatever `out` already held. Node gradients from an
  /// earlier sweep are discarded first, so one tape can be swept repeatedly.
  void backward(Var loss, Gradients* out = nullptr);

  /// Gradient of a variable (or any node) from the last sweep; zeros if unreached.
  Tensor grad(Var v) const;

  // ---- used by primitive implementations -------------------------------
  Var push(const char* op, Tensor value, std::vector<std::uint32_t> inputs, BackwardFn fn);
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Accumulation target for the gradient of node `id`, allocated on first use.
  std::span<double> grad_target(std::uint32_t id);
  /// Upstream gradient of node `id` during the sweep.
  std::span<const double> upstream(std::uint32_t id) const { return nodes_[id].grad.data(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;
    Tensor grad;
    BackwardFn backward;
    std::int64_t param = -1;
    bool requires_grad = false;
    const char* op = "";
  };

  const ParameterSet* params_;
  std::vector<Node> nodes_;
  std::unordered_map<ParamId, std::uint32_t> param_nodes_;
  Gradients* sink_ = nullptr;
};

inline const Tensor& Var::value() const { return tape->value(id); }

}  // namespace dsnt::ad
