#include "dsnt/ad/ops.hpp"

#include <algorithm>
#include <cmath>

namespace dsnt::ad {
namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape || a.tape == nullptr) throw Error(std::string(op) + ": operands on different tapes");
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_tape(a, b, op);
  if (a.shape() != b.shape())
    throw Error(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                shape_string(b.shape()));
}

void require_vector(Var a, const char* op) {
  if (a.value().rank() != 1) throw Error(std::string(op) + ": expected a vector, got " + shape_string(a.shape()));
}

void require_matrix(Var a, const char* op) {
  if (a.value().rank() != 2) throw Error(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
}

inline double dot_kernel(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

template <typename F>
Tensor map(const Tensor& in, F f) {
  Tensor out(in.shape());
  const double* s = in.ptr();
  double* d = out.ptr();
  for (std::size_t i = 0; i < in.size(); ++i) d[i] = f(s[i]);
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  axpy(1.0, b.value().ptr(), out.ptr(), out.size());
  return a.tape->push("add", std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    if (t.requires_grad(a)) axpy(1.0, g.data(), t.grad_target(a).data(), g.size());
    if (t.requires_grad(b)) axpy(1.0, g.data(), t.grad_target(b).data(), g.size());
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  axpy(-1.0, b.value().ptr(), out.ptr(), out.size());
  return a.tape->push("sub", std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    if (t.requires_grad(a)) axpy(1.0, g.data(), t.grad_target(a).data(), g.size());
    if (t.requires_grad(b)) axpy(-1.0, g.data(), t.grad_target(b).data(), g.size());
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const double* y = b.value().ptr();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return a.tape->push("mul", std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* av = t.value(a).ptr();
    const double* bv = t.value(b).ptr();
    if (t.requires_grad(a)) {
      auto da = t.grad_target(a);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto db = t.grad_target(b);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = map(a.value(), [factor](double x) { return x * factor; });
  return a.tape->push("scale", std::move(out), {a.id}, [a = a.id, factor](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    axpy(factor, g.data(), t.grad_target(a).data(), g.size());
  });
}

Var mul_scalar(Var v, Var s) {
  require_same_tape(v, s, "mul_scalar");
  if (s.size() != 1) throw Error("mul_scalar: scalar operand has shape " + shape_string(s.shape()));
  const double k = s.value()[0];
  Tensor out = map(v.value(), [k](double x) { return x * k; });
  return v.tape->push("mul_scalar", std::move(out), {v.id, s.id}, [v = v.id, s = s.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const Tensor& vv = t.value(v);
    if (t.requires_grad(v)) axpy(t.value(s)[0], g.data(), t.grad_target(v).data(), g.size());
    if (t.requires_grad(s)) t.grad_target(s)[0] += dot_kernel(g.data(), vv.ptr(), g.size());
  });
}

Var dot(Var a, Var b) {
  require_same_shape(a, b, "dot");
  require_vector(a, "dot");
  double d = dot_kernel(a.value().ptr(), b.value().ptr(), a.size());
  return a.tape->push("dot", Tensor::scalar(d), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    double g = t.upstream(self)[0];
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) axpy(g, bv.ptr(), t.grad_target(a).data(), av.size());
    if (t.requires_grad(b)) axpy(g, av.ptr(), t.grad_target(b).data(), bv.size());
  });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k)
    throw Error("matmul: shape mismatch " + shape_string(A.shape()) + " x " + shape_string(B.shape()));
  Tensor out(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) axpy(A.at(i, p), B.ptr() + p * n, out.ptr() + i * n, n);
  return a.tape->push("matmul", std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    if (t.requires_grad(a)) {  // dA = G B^T
      auto da = t.grad_target(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) da[i * k + p] += dot_kernel(g.data() + i * n, B.ptr() + p * n, n);
    }
    if (t.requires_grad(b)) {  // dB = A^T G
      auto db = t.grad_target(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) axpy(A.at(i, p), g.data() + i * n, db.data() + p * n, n);
    }
  });
}

namespace {

void matvec_backward(Tape& t, std::uint32_t self, std::uint32_t w, std::uint32_t x) {
  auto g = t.upstream(self);
  const Tensor& W = t.value(w);
  const Tensor& X = t.value(x);
  const std::size_t m = W.rows(), n = W.cols();
  if (t.requires_grad(w)) {  // dW += g x^T
    auto dw = t.grad_target(w);
    for (std::size_t i = 0; i < m; ++i)
      if (g[i] != 0.0) axpy(g[i], X.ptr(), dw.data() + i * n, n);
  }
  if (t.requires_grad(x)) {  // dx += W^T g
    auto dx = t.grad_target(x);
    for (std::size_t i = 0; i < m; ++i)
      if (g[i] != 0.0) axpy(g[i], W.ptr() + i * n, dx.data(), n);
  }
}

Tensor matvec_forward(const Tensor& W, const Tensor& X, const char* op) {
  if (W.rank() != 2 || X.rank() != 1 || W.cols() != X.size())
    throw Error(std::string(op) + ": shape mismatch " + shape_string(W.shape()) + " x " + shape_string(X.shape()));
  const std::size_t m = W.rows(), n = W.cols();
  Tensor out(Shape{m});
  for (std::size_t i = 0; i < m; ++i) out[i] = dot_kernel(W.ptr() + i * n, X.ptr(), n);
  return out;
}

}  // namespace

Var matvec(Var w, Var x) {
  require_same_tape(w, x, "matvec");
  Tensor out = matvec_forward(w.value(), x.value(), "matvec");
  return w.tape->push("matvec", std::move(out), {w.id, x.id}, [w = w.id, x = x.id](Tape& t, std::uint32_t self) {
    matvec_backward(t, self, w, x);
  });
}

Var affine(Var w, Var x, Var b) {
  require_same_tape(w, x, "affine");
  require_same_tape(w, b, "affine");
  Tensor out = matvec_forward(w.value(), x.value(), "affine");
  if (b.value().shape() != out.shape())
    throw Error("affine: bias shape " + shape_string(b.shape()) + " vs output " + shape_string(out.shape()));
  axpy(1.0, b.value().ptr(), out.ptr(), out.size());
  return w.tape->push("affine", std::move(out), {w.id, x.id, b.id},
                      [w = w.id, x = x.id, b = b.id](Tape& t, std::uint32_t self) {
                        matvec_backward(t, self, w, x);
                        if (t.requires_grad(b)) {
                          auto g = t.upstream(self);
                          axpy(1.0, g.data(), t.grad_target(b).data(), g.size());
                        }
                      });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat: no inputs");
  std::vector<std::uint32_t> ids;
  std::vector<double> data;
  for (const auto& p : parts) {
    require_same_tape(parts.front(), p, "concat");
    require_vector(p, "concat");
    ids.push_back(p.id);
    auto v = p.value().data();
    data.insert(data.end(), v.begin(), v.end());
  }
  auto in = ids;
  return parts.front().tape->push("concat", Tensor::vector(std::move(data)), std::move(in),
                                  [ids = std::move(ids)](Tape& t, std::uint32_t self) {
                                    auto g = t.upstream(self);
                                    std::size_t off = 0;
                                    for (auto id : ids) {
                                      std::size_t n = t.value(id).size();
                                      if (t.requires_grad(id)) axpy(1.0, g.data() + off, t.grad_target(id).data(), n);
                                      off += n;
                                    }
                                  });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  require_vector(a, "slice");
  if (offset + length > a.size())
    throw Error("slice: range [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                ") exceeds size " + std::to_string(a.size()));
  auto v = a.value().data().subspan(offset, length);
  Tensor out = Tensor::vector(std::vector<double>(v.begin(), v.end()));
  return a.tape->push("slice", std::move(out), {a.id}, [a = a.id, offset](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    axpy(1.0, g.data(), t.grad_target(a).data() + offset, g.size());
  });
}

Var tanh(Var a) {
  Tensor out = map(a.value(), [](double x) { return std::tanh(x); });
  return a.tape->push("tanh", std::move(out), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* y = t.value(self).ptr();
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var sigmoid(Var a) {
  Tensor out = map(a.value(), [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.tape->push("sigmoid", std::move(out), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* y = t.value(self).ptr();
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var relu(Var a) {
  Tensor out = map(a.value(), [](double x) { return x > 0 ? x : 0.0; });
  return a.tape->push("relu", std::move(out), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* x = t.value(a).ptr();
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > 0) da[i] += g[i];
  });
}

Var log(Var a) {
  Tensor out = map(a.value(), [](double x) { return std::log(x); });
  return a.tape->push("log", std::move(out), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* x = t.value(a).ptr();
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] / x[i];
  });
}

Var softmax(Var a) {
  require_vector(a, "softmax");
  const Tensor& x = a.value();
  double mx = *std::max_element(x.data().begin(), x.data().end());
  Tensor out(x.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) z += (out[i] = std::exp(x[i] - mx));
  for (auto& v : out.data()) v /= z;
  return a.tape->push("softmax", std::move(out), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    const double* y = t.value(self).ptr();
    double gy = dot_kernel(g.data(), y, g.size());
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += y[i] * (g[i] - gy);
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape->push("sum", Tensor::scalar(s), {a.id}, [a = a.id](Tape& t, std::uint32_t self) {
    double g = t.upstream(self)[0];
    for (auto& d : t.grad_target(a)) d += g;
  });
}

Var mean(Var a) {
  if (a.size() == 0) throw Error("mean: empty input");
  const double inv = 1.0 / static_cast<double>(a.size());
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape->push("mean", Tensor::scalar(s * inv), {a.id}, [a = a.id, inv](Tape& t, std::uint32_t self) {
    double g = t.upstream(self)[0] * inv;
    for (auto& d : t.grad_target(a)) d += g;
  });
}

Var dropout(Var a, const Tensor& mask) {
  if (mask.size() != a.size()) throw Error("dropout: mask size mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return a.tape->push("dropout", std::move(out), {a.id}, [a = a.id, mask](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    auto da = t.grad_target(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * mask[i];
  });
}

Tensor dropout_mask(std::size_t n, double keep, Rng& rng) {
  if (keep <= 0.0 || keep > 1.0) throw Error("dropout keep probability must be in (0, 1]");
  Tensor mask(Shape{n});
  for (std::size_t i = 0; i < n; ++i) mask[i] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
  return mask;
}

Var lookup(Var table, std::size_t row) {
  require_matrix(table, "lookup");
  const Tensor& E = table.value();
  if (row >= E.rows()) throw Error("lookup: row " + std::to_string(row) + " out of range");
  const std::size_t d = E.cols();
  Tensor out = Tensor::vector(std::vector<double>(E.ptr() + row * d, E.ptr() + (row + 1) * d));
  return table.tape->push("lookup", std::move(out), {table.id}, [e = table.id, row, d](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    axpy(1.0, g.data(), t.grad_target(e).data() + row * d, d);
  });
}

Var cross_entropy(Var logits, std::size_t label) {
  require_vector(logits, "cross_entropy");
  const Tensor& x = logits.value();
  if (label >= x.size()) throw Error("cross_entropy: label out of range");
  double mx = *std::max_element(x.data().begin(), x.data().end());
  double z = 0.0;
  for (double v : x.data()) z += std::exp(v - mx);
  double loss = mx + std::log(z) - x[label];
  return logits.tape->push("cross_entropy", Tensor::scalar(loss), {logits.id},
                           [a = logits.id, label](Tape& t, std::uint32_t self) {
                             double g = t.upstream(self)[0];
                             const Tensor& x = t.value(a);
                             double mx = *std::max_element(x.data().begin(), x.data().end());
                             double z = 0.0;
                             for (double v : x.data()) z += std::exp(v - mx);
                             auto da = t.grad_target(a);
                             for (std::size_t i = 0; i < x.size(); ++i) {
                               double p = std::exp(x[i] - mx) / z;
                               da[i] += g * (p - (i == label ? 1.0 : 0.0));
                             }
                           });
}

Var add_n(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("add_n: no inputs");
  if (parts.size() == 1) return parts.front();
  Tensor out = parts.front().value();
  std::vector<std::uint32_t> ids{parts.front().id};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    require_same_shape(parts.front(), parts[i], "add_n");
    axpy(1.0, parts[i].value().ptr(), out.ptr(), out.size());
    ids.push_back(parts[i].id);
  }
  auto in = ids;
  return parts.front().tape->push("add_n", std::move(out), std::move(in), [ids = std::move(ids)](Tape& t, std::uint32_t self) {
    auto g = t.upstream(self);
    for (auto id : ids)
      if (t.requires_grad(id)) axpy(1.0, g.data(), t.grad_target(id).data(), g.size());
  });
}

}  // namespace dsnt::ad
