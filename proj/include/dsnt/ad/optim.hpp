#pragma once

#include <string>
#include <vector>

#include "dsnt/ad/tape.hpp"

namespace dsnt::ad {

enum class OptimizerKind { Sgd, Adagrad, Adam };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Running moments for the adaptive rules; SGD keeps none.
struct OptimizerState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  long step = 0;
};

void sgd_step(ParameterSet& params, const Gradients& grads, const OptimizerConfig& cfg);
void adagrad_step(ParameterSet& params, const Gradients& grads, OptimizerState& state, const OptimizerConfig& cfg);
void adam_step(ParameterSet& params, const Gradients& grads, OptimizerState& state, const OptimizerConfig& cfg);

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}
  void step(ParameterSet& params, const Gradients& grads);
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  OptimizerState state_;
};

}  // namespace dsnt::ad
