#include "dsnt/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsnt::ad {

double relative_error(double analytic, double numeric, double floor) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

std::vector<std::size_t> sample_coords(std::size_t n, std::size_t max_coords, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (max_coords == 0 || max_coords >= n) return idx;
  shuffle(idx, rng);
  idx.resize(max_coords);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void note(GradCheckResult& r, double err, const std::string& where) {
  ++r.coords_checked;
  if (err > r.max_rel_error) {
    r.max_rel_error = err;
    r.worst = where;
  }
}

}  // namespace

GradCheckResult grad_check(ParameterSet& params, const std::function<Var(Tape&)>& loss,
                           const GradCheckOptions& opts) {
  Gradients analytic(params);
  {
    Tape tape(&params);
    Var l = loss(tape);
    tape.backward(l, &analytic);
  }
  auto eval = [&] {
    Tape tape(&params);
    return loss(tape).value()[0];
  };

  Rng rng(opts.seed);
  GradCheckResult result;
  for (ParamId id = 0; id < params.size(); ++id) {
    auto& value = params.value(id);
    for (auto k : sample_coords(value.size(), opts.max_coords, rng)) {
      const double saved = value[k];
      value[k] = saved + opts.h;
      const double plus = eval();
      value[k] = saved - opts.h;
      const double minus = eval();
      value[k] = saved;
      const double numeric = (plus - minus) / (2.0 * opts.h);
      note(result, relative_error(analytic[id][k], numeric, opts.floor),
           params.name(id) + "[" + std::to_string(k) + "]");
    }
  }
  return result;
}

GradCheckResult grad_check_inputs(std::vector<Tensor> inputs,
                                  const std::function<Var(Tape&, const std::vector<Var>&)>& loss,
                                  const GradCheckOptions& opts) {
  auto run = [&](bool with_grads, std::vector<Tensor>* grads) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : inputs) vars.push_back(tape.variable(t));
    Var l = loss(tape, vars);
    if (with_grads) {
      tape.backward(l);
      for (const auto& v : vars) grads->push_back(tape.grad(v));
    }
    return l.value()[0];
  };

  std::vector<Tensor> analytic;
  run(true, &analytic);

  Rng rng(opts.seed);
  GradCheckResult result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (auto k : sample_coords(inputs[i].size(), opts.max_coords, rng)) {
      const double saved = inputs[i][k];
      inputs[i][k] = saved + opts.h;
      const double plus = run(false, nullptr);
      inputs[i][k] = saved - opts.h;
      const double minus = run(false, nullptr);
      inputs[i][k] = saved;
      const double numeric = (plus - minus) / (2.0 * opts.h);
      note(result, relative_error(analytic[i][k], numeric, opts.floor),
           "input" + std::to_string(i) + "[" + std::to_string(k) + "]");
    }
  }
  return result;
}

}  // namespace dsnt::ad
