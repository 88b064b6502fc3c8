#pragma once

#include <functional>
#include <vector>

#include "dsnt/ad/tape.hpp"

namespace dsnt::ad {

struct GradCheckOptions {
  double h = 1e-5;
  /// Coordinates checked per tensor; 0 checks every coordinate.
  std::size_t max_coords = 0;
  std::uint64_t seed = 7;
  /// Lower bound on the relative-error denominator so coordinates whose
  /// true gradient is ~0 are judged on absolute error.
  double floor = 1e-4;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst;  // "<tensor>[<index>]"
};

/// |analytic - numeric| / max(|analytic|, |numeric|, floor)
double relative_error(double analytic, double numeric, double floor);

/// Central differences over parameters. `loss` must be deterministic and
/// build its whole computation on the tape it is given.
GradCheckResult grad_check(ParameterSet& params, const std::function<Var(Tape&)>& loss,
                           const GradCheckOptions& opts = {});

/// Central differences over free input tensors, for checking single primitives.
GradCheckResult grad_check_inputs(std::vector<Tensor> inputs,
                                  const std::function<Var(Tape&, const std::vector<Var>&)>& loss,
                                  const GradCheckOptions& opts = {});

}  // namespace dsnt::ad
