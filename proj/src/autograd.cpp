#include "graphtag/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace graphtag {

Parameter::Parameter(std::string name, Tensor v)
    : value(std::move(v)), grad(value.shape()), name_(std::move(name)) {}

const Tensor& Var::value() const { return tape_->value(id_); }

Tensor Var::grad() const {
  if (tape_->has_grad(id_)) return tape_->grad(id_);
  return Tensor(value().shape());
}

Var Tape::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  Node n;
  n.op = "variable";
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Node n;
  n.op = "parameter";
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

Var Tape::record(std::string_view op, Tensor value, std::vector<std::size_t> parents,
                 BackwardFn backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(),
                                [this](std::size_t p) { return nodes_[p].requires_grad; });
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw Error("backward: loss belongs to another tape");
  if (value(loss.id_).size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " +
                     shape_string(value(loss.id_).shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  grad(loss.id_).fill(1.0);
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) {
      auto& dst = n.param->grad.storage();
      const auto& src = n.grad.storage();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

namespace {

Tape& common_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw Error("operands recorded on different tapes");
  return a.tape();
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + shape_string(t.shape()));
  }
}

// C (m x n) += A (m x k) * B (k x n), all row-major.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C (m x n) += A (m x k) * B^T where B is n x k.
void gemm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// C (k x n) += A^T * B where A is m x k and B is m x n.
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var unary(const char* op, Var a, Fwd fwd, Deriv deriv) {
  Tape& tape = a.tape();
  Tensor out = a.value();
  for (double& v : out.storage()) v = fwd(v);
  const std::size_t ia = a.id();
  return tape.record(op, std::move(out), {ia}, [ia, deriv](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& y = t.value(self);
    const Tensor& x = t.value(ia);
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(x[i], y[i]);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Split a shape around `axis` into (outer, axis extent, inner).
struct AxisLayout {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisLayout axis_layout(const Shape& s, std::size_t axis) {
  AxisLayout l;
  for (std::size_t d = 0; d < axis; ++d) l.outer *= s[d];
  l.extent = s[axis];
  for (std::size_t d = axis + 1; d < s.size(); ++d) l.inner *= s[d];
  return l;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank("matmul", A, 2);
  require_rank("matmul", B, 2);
  const std::size_t m = A.shape()[0], k = A.shape()[1], n = B.shape()[1];
  if (B.shape()[0] != k) throw_shape_mismatch("matmul", A.shape(), B.shape());
  Tensor out(Shape{m, n});
  gemm_acc(A.data().data(), B.data().data(), out.data().data(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record("matmul", std::move(out), {ia, ib},
                     [ia, ib, m, k, n](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       if (t.requires_grad(ia)) {
                         // dA = g B^T
                         gemm_nt_acc(g.data().data(), t.value(ib).data().data(),
                                     t.grad(ia).data().data(), m, n, k);
                       }
                       if (t.requires_grad(ib)) {
                         // dB = A^T g
                         gemm_tn_acc(t.value(ia).data().data(), g.data().data(),
                                     t.grad(ib).data().data(), m, k, n);
                       }
                     });
}

Var transpose(Var a) {
  const Tensor& A = a.value();
  require_rank("transpose", A, 2);
  const std::size_t r = A.shape()[0], c = A.shape()[1];
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = A.at(i, j);
  const std::size_t ia = a.id();
  return a.tape().record("transpose", std::move(out), {ia},
                         [ia, r, c](Tape& t, std::size_t self) {
                           if (!t.requires_grad(ia)) return;
                           const Tensor& g = t.grad(self);
                           Tensor& ga = t.grad(ia);
                           for (std::size_t i = 0; i < r; ++i)
                             for (std::size_t j = 0; j < c; ++j) ga.at(i, j) += g.at(j, i);
                         });
}

Var linear(Var x, Var w, Var bias) {
  Tape& tape = common_tape(x, w);
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  require_rank("linear", X, 2);
  require_rank("linear", W, 2);
  const std::size_t m = X.shape()[0], in = X.shape()[1], out_dim = W.shape()[0];
  if (W.shape()[1] != in) throw_shape_mismatch("linear", X.shape(), W.shape());
  Tensor out(Shape{m, out_dim});
  if (bias.valid()) {
    common_tape(x, bias);
    const Tensor& B = bias.value();
    if (B.rank() != 1 || B.size() != out_dim) throw_shape_mismatch("linear bias", W.shape(), B.shape());
    for (std::size_t i = 0; i < m; ++i)
      std::copy(B.data().begin(), B.data().end(), out.data().begin() + i * out_dim);
  }
  gemm_nt_acc(X.data().data(), W.data().data(), out.data().data(), m, in, out_dim);
  const std::size_t ix = x.id(), iw = w.id();
  std::vector<std::size_t> parents{ix, iw};
  const bool has_bias = bias.valid();
  const std::size_t ib = has_bias ? bias.id() : 0;
  if (has_bias) parents.push_back(ib);
  return tape.record("linear", std::move(out), std::move(parents),
                     [=](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       if (t.requires_grad(ix)) {
                         // dX = g W
                         gemm_acc(g.data().data(), t.value(iw).data().data(),
                                  t.grad(ix).data().data(), m, out_dim, in);
                       }
                       if (t.requires_grad(iw)) {
                         // dW = g^T X
                         gemm_tn_acc(g.data().data(), t.value(ix).data().data(),
                                     t.grad(iw).data().data(), m, out_dim, in);
                       }
                       if (has_bias && t.requires_grad(ib)) {
                         Tensor& gb = t.grad(ib);
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < out_dim; ++j) gb[j] += g[i * out_dim + j];
                       }
                     });
}

namespace {

template <typename Fwd, typename DA, typename DB>
Var binary(const char* op, Var a, Var b, Fwd fwd, DA da, DB db) {
  Tape& tape = common_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!same_shape(A, B)) throw_shape_mismatch(op, A.shape(), B.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(A[i], B[i]);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(op, std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    if (t.requires_grad(ia)) {
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(av[i], bv[i]);
    }
    if (t.requires_grad(ib)) {
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(av[i], bv[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return binary("add", a, b, [](double x, double y) { return x + y; },
                [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary("sub", a, b, [](double x, double y) { return x - y; },
                [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary("mul", a, b, [](double x, double y) { return x * y; },
                [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(Var a, double factor) { return affine(a, factor, 0.0); }

Var affine(Var a, double factor, double shift) {
  return unary("affine", a, [=](double x) { return factor * x + shift; },
               [=](double, double) { return factor; });
}

Var sigmoid(Var a) {
  return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var sum(Var a) {
  const Tensor& A = a.value();
  const double total = std::accumulate(A.data().begin(), A.data().end(), 0.0);
  const std::size_t ia = a.id();
  return a.tape().record("sum", Tensor::scalar(total), {ia}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    for (double& v : t.grad(ia).storage()) v += g;
  });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id();
  return a.tape().record("reshape", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw Error("concat: no operands");
  Tape& tape = parts[0].tape();
  const Shape& first = parts[0].value().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> extents;
  for (const Var& p : parts) {
    common_tape(parts[0], p);
    const Shape& s = p.value().shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) throw_shape_mismatch("concat", first, s);
    out_shape[axis] += s[axis];
    ids.push_back(p.id());
    extents.push_back(s[axis]);
  }
  const AxisLayout lay = axis_layout(out_shape, axis);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& src = parts[k].value();
    const std::size_t block = extents[k] * lay.inner;
    for (std::size_t o = 0; o < lay.outer; ++o) {
      std::copy_n(src.data().begin() + o * block, block,
                  out.data().begin() + o * lay.extent * lay.inner + offset);
    }
    offset += block;
  }
  return tape.record("concat", std::move(out), ids,
                     [ids, extents, lay](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                         const std::size_t block = extents[k] * lay.inner;
                         if (t.requires_grad(ids[k])) {
                           Tensor& gk = t.grad(ids[k]);
                           for (std::size_t o = 0; o < lay.outer; ++o) {
                             const double* src = g.data().data() + o * lay.extent * lay.inner + off;
                             double* dst = gk.data().data() + o * block;
                             for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                           }
                         }
                         off += block;
                       }
                     });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Tensor& A = a.value();
  if (axis >= A.rank() || begin >= end || end > A.shape()[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") on axis " + std::to_string(axis) + " invalid for shape " +
                     shape_string(A.shape()));
  }
  const AxisLayout lay = axis_layout(A.shape(), axis);
  Shape out_shape = A.shape();
  out_shape[axis] = end - begin;
  Tensor out(out_shape);
  const std::size_t block = (end - begin) * lay.inner;
  for (std::size_t o = 0; o < lay.outer; ++o) {
    std::copy_n(A.data().begin() + o * lay.extent * lay.inner + begin * lay.inner, block,
                out.data().begin() + o * block);
  }
  const std::size_t ia = a.id();
  return a.tape().record("slice", std::move(out), {ia},
                         [ia, lay, begin, block](Tape& t, std::size_t self) {
                           if (!t.requires_grad(ia)) return;
                           const Tensor& g = t.grad(self);
                           Tensor& ga = t.grad(ia);
                           for (std::size_t o = 0; o < lay.outer; ++o) {
                             double* dst = ga.data().data() + o * lay.extent * lay.inner +
                                           begin * lay.inner;
                             const double* src = g.data().data() + o * block;
                             for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                           }
                         });
}

Var max_over_axis(Var a, std::size_t axis) {
  const Tensor& A = a.value();
  require_rank("max_over_axis", A, 2);
  if (axis > 1) throw ShapeError("max_over_axis: axis must be 0 or 1");
  const std::size_t r = A.shape()[0], c = A.shape()[1];
  const std::size_t groups = axis == 0 ? c : r;
  const std::size_t len = axis == 0 ? r : c;
  auto index = [=](std::size_t gi, std::size_t k) { return axis == 0 ? k * c + gi : gi * c + k; };
  Tensor out(axis == 0 ? Shape{1, c} : Shape{r, 1});
  std::vector<std::size_t> argmax(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    std::size_t best = index(gi, 0);
    for (std::size_t k = 1; k < len; ++k) {
      if (A[index(gi, k)] > A[best]) best = index(gi, k);
    }
    argmax[gi] = best;
    out[gi] = A[best];
  }
  const std::size_t ia = a.id();
  return a.tape().record("max_over_axis", std::move(out), {ia},
                         [ia, argmax](Tape& t, std::size_t self) {
                           if (!t.requires_grad(ia)) return;
                           const Tensor& g = t.grad(self);
                           Tensor& ga = t.grad(ia);
                           for (std::size_t gi = 0; gi < argmax.size(); ++gi) ga[argmax[gi]] += g[gi];
                         });
}

Var embedding_lookup(Var table, std::span<const int> ids) {
  const Tensor& T = table.value();
  require_rank("embedding_lookup", T, 2);
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
  const std::size_t vocab = T.shape()[0], dim = T.shape()[1];
  Tensor out(Shape{ids.size(), dim});
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || static_cast<std::size_t>(ids[k]) >= vocab) {
      throw ShapeError("embedding_lookup: id " + std::to_string(ids[k]) +
                       " outside table of shape " + shape_string(T.shape()));
    }
    std::copy_n(T.data().begin() + ids[k] * dim, dim, out.data().begin() + k * dim);
  }
  const std::size_t it = table.id();
  std::vector<int> idv(ids.begin(), ids.end());
  return table.tape().record("embedding_lookup", std::move(out), {it},
                             [it, idv, dim](Tape& t, std::size_t self) {
                               if (!t.requires_grad(it)) return;
                               const Tensor& g = t.grad(self);
                               Tensor& gt = t.grad(it);
                               for (std::size_t k = 0; k < idv.size(); ++k) {
                                 double* dst = gt.data().data() + idv[k] * dim;
                                 const double* src = g.data().data() + k * dim;
                                 for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
                               }
                             });
}

Var conv1d(Var x, Var w, Var bias, std::size_t width) {
  Tape& tape = common_tape(x, w);
  common_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& W = w.value();
  const Tensor& B = bias.value();
  require_rank("conv1d", X, 2);
  require_rank("conv1d", W, 2);
  const std::size_t len = X.shape()[0], cin = X.shape()[1], cout = W.shape()[0];
  if (width == 0 || W.shape()[1] != width * cin) throw_shape_mismatch("conv1d", X.shape(), W.shape());
  if (B.rank() != 1 || B.size() != cout) throw_shape_mismatch("conv1d bias", W.shape(), B.shape());
  if (len < width) {
    throw ShapeError("conv1d: input of " + std::to_string(len) +
                     " rows shorter than filter width " + std::to_string(width));
  }
  const std::size_t steps = len - width + 1, span = width * cin;
  Tensor out(Shape{steps, cout});
  for (std::size_t k = 0; k < steps; ++k)
    std::copy(B.data().begin(), B.data().end(), out.data().begin() + k * cout);
  // Window k is the contiguous block X[k .. k+width-1] flattened row-major.
  for (std::size_t k = 0; k < steps; ++k) {
    gemm_nt_acc(X.data().data() + k * cin, W.data().data(), out.data().data() + k * cout, 1, span,
                cout);
  }
  const std::size_t ix = x.id(), iw = w.id(), ib = bias.id();
  return tape.record("conv1d", std::move(out), {ix, iw, ib},
                     [=](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       for (std::size_t k = 0; k < steps; ++k) {
                         const double* gk = g.data().data() + k * cout;
                         if (t.requires_grad(ix)) {
                           gemm_acc(gk, t.value(iw).data().data(),
                                    t.grad(ix).data().data() + k * cin, 1, cout, span);
                         }
                         if (t.requires_grad(iw)) {
                           gemm_tn_acc(gk, t.value(ix).data().data() + k * cin,
                                       t.grad(iw).data().data(), 1, cout, span);
                         }
                         if (t.requires_grad(ib)) {
                           Tensor& gb = t.grad(ib);
                           for (std::size_t j = 0; j < cout; ++j) gb[j] += gk[j];
                         }
                       }
                     });
}

Var dropout(Var a, const Tensor& mask) {
  const Tensor& A = a.value();
  if (!same_shape(A, mask)) throw_shape_mismatch("dropout", A.shape(), mask.shape());
  Tensor out(A.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * mask[i];
  const std::size_t ia = a.id();
  return a.tape().record("dropout", std::move(out), {ia}, [ia, mask](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
  });
}

Var softmax(Var a) {
  const Tensor& A = a.value();
  if (A.rank() == 0) throw ShapeError("softmax: scalar input");
  Tensor out = softmax_rows(A);
  const std::size_t ia = a.id();
  const std::size_t width = A.shape().back();
  return a.tape().record("softmax", std::move(out), {ia}, [ia, width](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad(ia);
    for (std::size_t r = 0; r < y.size() / width; ++r) {
      const std::size_t base = r * width;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += g[base + j] * y[base + j];
      for (std::size_t j = 0; j < width; ++j) ga[base + j] += y[base + j] * (g[base + j] - dot);
    }
  });
}

Var cross_entropy_with_logits(Var logits, std::span<const int> targets) {
  const Tensor& L = logits.value();
  require_rank("cross_entropy_with_logits", L, 2);
  const std::size_t rows = L.shape()[0], k = L.shape()[1];
  if (targets.size() != rows) {
    throw ShapeError("cross_entropy_with_logits: " + std::to_string(targets.size()) +
                     " targets for logits of shape " + shape_string(L.shape()));
  }
  Tensor logp = log_softmax_rows(L);
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] < 0) continue;
    if (static_cast<std::size_t>(targets[r]) >= k) {
      throw ShapeError("cross_entropy_with_logits: target " + std::to_string(targets[r]) +
                       " outside " + std::to_string(k) + " classes");
    }
    loss -= logp.at(r, targets[r]);
  }
  const std::size_t il = logits.id();
  std::vector<int> tv(targets.begin(), targets.end());
  return logits.tape().record(
      "cross_entropy", Tensor::scalar(loss), {il},
      [il, tv, k, logp = std::move(logp)](Tape& t, std::size_t self) {
        if (!t.requires_grad(il)) return;
        const double g = t.grad(self)[0];
        Tensor& gl = t.grad(il);
        for (std::size_t r = 0; r < tv.size(); ++r) {
          if (tv[r] < 0) continue;
          for (std::size_t j = 0; j < k; ++j) {
            const double p = std::exp(logp.at(r, j));
            gl.at(r, j) += g * (p - (static_cast<int>(j) == tv[r] ? 1.0 : 0.0));
          }
        }
      });
}

Var bilinear(Var p, Var u, Var d) {
  Tape& tape = common_tape(p, u);
  common_tape(p, d);
  const Tensor& P = p.value();
  const Tensor& U = u.value();
  const Tensor& D = d.value();
  require_rank("bilinear", P, 2);
  require_rank("bilinear", D, 2);
  require_rank("bilinear", U, 3);
  const std::size_t m = P.shape()[0], d1 = P.shape()[1], d2 = D.shape()[1], r = U.shape()[2];
  if (D.shape()[0] != m) throw_shape_mismatch("bilinear", P.shape(), D.shape());
  if (U.shape()[0] != d1 || U.shape()[1] != d2) throw_shape_mismatch("bilinear", P.shape(), U.shape());
  Tensor out(Shape{m, r});
  // out[i] = sum_a P[i][a] * (U[a] (d2 x r))^T D[i]
  std::vector<double> tmp(r);
  for (std::size_t i = 0; i < m; ++i) {
    const double* drow = D.data().data() + i * d2;
    for (std::size_t a = 0; a < d1; ++a) {
      const double pa = P.at(i, a);
      if (pa == 0.0) continue;
      std::fill(tmp.begin(), tmp.end(), 0.0);
      gemm_acc(drow, U.data().data() + a * d2 * r, tmp.data(), 1, d2, r);
      for (std::size_t kk = 0; kk < r; ++kk) out.at(i, kk) += pa * tmp[kk];
    }
  }
  const std::size_t ip = p.id(), iu = u.id(), id = d.id();
  return tape.record("bilinear", std::move(out), {ip, iu, id}, [=](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& Pv = t.value(ip);
    const Tensor& Uv = t.value(iu);
    const Tensor& Dv = t.value(id);
    const bool gp = t.requires_grad(ip), gu = t.requires_grad(iu), gd = t.requires_grad(id);
    std::vector<double> ud(r);  // U[a] D[i], reused
    for (std::size_t i = 0; i < m; ++i) {
      const double* grow = g.data().data() + i * r;
      const double* drow = Dv.data().data() + i * d2;
      for (std::size_t a = 0; a < d1; ++a) {
        const double* ua = Uv.data().data() + a * d2 * r;
        const double pa = Pv.at(i, a);
        if (gp) {
          std::fill(ud.begin(), ud.end(), 0.0);
          gemm_acc(drow, ua, ud.data(), 1, d2, r);
          double acc = 0.0;
          for (std::size_t kk = 0; kk < r; ++kk) acc += grow[kk] * ud[kk];
          t.grad(ip).at(i, a) += acc;
        }
        if (pa == 0.0) continue;
        if (gd) {
          // dD[i][b] += pa * sum_k U[a][b][k] g[i][k]
          double* gdrow = t.grad(id).data().data() + i * d2;
          for (std::size_t b = 0; b < d2; ++b) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < r; ++kk) acc += ua[b * r + kk] * grow[kk];
            gdrow[b] += pa * acc;
          }
        }
        if (gu) {
          double* gua = t.grad(iu).data().data() + a * d2 * r;
          for (std::size_t b = 0; b < d2; ++b) {
            const double s = pa * drow[b];
            if (s == 0.0) continue;
            for (std::size_t kk = 0; kk < r; ++kk) gua[b * r + kk] += s * grow[kk];
          }
        }
      }
    }
  });
}

}  // namespace graphtag
