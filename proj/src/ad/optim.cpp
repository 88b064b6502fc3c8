#include "dsnt/ad/optim.hpp"

#include <cmath>

namespace dsnt::ad {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adagrad") return OptimizerKind::Adagrad;
  if (name == "adam") return OptimizerKind::Adam;
  throw Error("unknown optimizer '" + name + "' (expected sgd, adagrad or adam)");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adagrad: return "adagrad";
    case OptimizerKind::Adam: return "adam";
  }
  return "sgd";
}

namespace {

void check_shapes(const ParameterSet& params, const Gradients& grads) {
  if (params.size() != grads.size()) throw Error("optimizer: parameter/gradient count mismatch");
  for (ParamId i = 0; i < params.size(); ++i)
    if (params.value(i).shape() != grads[i].shape())
      throw Error("optimizer: shape mismatch for parameter " + params.name(i));
}

void check_finite(const ParameterSet& params, ParamId id) {
  if (!params.value(id).all_finite()) throw Error("optimizer: non-finite update for parameter " + params.name(id));
}

void init_moments(const ParameterSet& params, std::vector<Tensor>& m) {
  if (m.size() == params.size()) return;
  m.clear();
  for (ParamId i = 0; i < params.size(); ++i) m.emplace_back(params.value(i).shape());
}

}  // namespace

void sgd_step(ParameterSet& params, const Gradients& grads, const OptimizerConfig& cfg) {
  check_shapes(params, grads);
  for (ParamId i = 0; i < params.size(); ++i) {
    auto w = params.value(i).data();
    auto g = grads[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.lr * g[k];
    check_finite(params, i);
  }
}

void adagrad_step(ParameterSet& params, const Gradients& grads, OptimizerState& state, const OptimizerConfig& cfg) {
  check_shapes(params, grads);
  init_moments(params, state.second);
  ++state.step;
  for (ParamId i = 0; i < params.size(); ++i) {
    auto w = params.value(i).data();
    auto g = grads[i].data();
    auto h = state.second[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      h[k] += g[k] * g[k];
      w[k] -= cfg.lr * g[k] / (std::sqrt(h[k]) + cfg.eps);
    }
    check_finite(params, i);
  }
}

void adam_step(ParameterSet& params, const Gradients& grads, OptimizerState& state, const OptimizerConfig& cfg) {
  check_shapes(params, grads);
  init_moments(params, state.first);
  init_moments(params, state.second);
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (ParamId i = 0; i < params.size(); ++i) {
    auto w = params.value(i).data();
    auto g = grads[i].data();
    auto m = state.first[i].data();
    auto v = state.second[i].data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      w[k] -= cfg.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.eps);
    }
    check_finite(params, i);
  }
}

void Optimizer::step(ParameterSet& params, const Gradients& grads) {
  switch (cfg_.kind) {
    case OptimizerKind::Sgd: sgd_step(params, grads, cfg_); break;
    case OptimizerKind::Adagrad: adagrad_step(params, grads, state_, cfg_); break;
    case OptimizerKind::Adam: adam_step(params, grads, state_, cfg_); break;
  }
}

}  // namespace dsnt::ad
