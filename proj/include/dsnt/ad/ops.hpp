#pragma once

#include <vector>

#include "dsnt/ad/tape.hpp"

namespace dsnt::ad {

// Elementwise; operands must share a shape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// v * s where s is a size-1 node.
Var mul_scalar(Var v, Var s);
/// Inner product of two vectors, size-1 result.
Var dot(Var a, Var b);

/// [m x k] * [k x n] -> [m x n]
Var matmul(Var a, Var b);
/// [m x n] * [n] -> [m]
Var matvec(Var w, Var x);
/// w x + b, fused.
Var affine(Var w, Var x, Var b);

Var concat(const std::vector<Var>& parts);
Var slice(Var a, std::size_t offset, std::size_t length);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var log(Var a);

Var softmax(Var a);
Var sum(Var a);
Var mean(Var a);

/// Elementwise product with a fixed mask (entries 0 or 1/keep).
Var dropout(Var a, const Tensor& mask);
/// Bernoulli(keep) mask scaled by 1/keep (inverted dropout).
Tensor dropout_mask(std::size_t n, double keep, Rng& rng);

/// Row `row` of an embedding matrix.
Var lookup(Var table, std::size_t row);

/// -log softmax(logits)[label]
Var cross_entropy(Var logits, std::size_t label);

/// Sum of equally shaped nodes; a single input is returned unchanged.
Var add_n(const std::vector<Var>& parts);

}  // namespace dsnt::ad
