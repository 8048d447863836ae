#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphtag/tensor.hpp"

namespace graphtag {

// A learnable tensor. Gradients from every tape that touches it accumulate
// into `grad` until zero_grad().
class Parameter {
 public:
  Parameter(std::string name, Tensor value);

  const std::string& name() const { return name_; }
  const Shape& shape() const { return value.shape(); }
  void zero_grad() { grad.fill(0.0); }

  Tensor value;
  Tensor grad;

 private:
  std::string name_;
};

class Tape;

// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient of the last backward() with respect to this node; zeros if the
  // node was not reached.
  Tensor grad() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode autodiff record. Nodes are appended in evaluation order, so the
// append order is a topological order of the DAG. One tape per thread.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf that receives a gradient (used for inputs under gradient checks).
  Var variable(Tensor value);
  // Leaf bound to a parameter; repeated calls return the same node.
  Var param(Parameter& p);

  // Seeds d(loss)/d(loss) = 1, visits each reachable node once in reverse
  // order, and adds parameter gradients into Parameter::grad.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  std::string_view op_name(std::size_t id) const { return nodes_[id].op; }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_[id].parents; }

  // Op implementation interface.
  const Tensor& value(std::size_t id) const;
  Tensor& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  Var record(std::string_view op, Tensor value, std::vector<std::size_t> parents,
             BackwardFn backward);

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  // deque keeps value references stable while ops append nodes.
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Differentiable ops. Matrices are rank-2; a "row" is a 1 x d matrix.
Var matmul(Var a, Var b);
Var transpose(Var a);
// x: m x in, w: out x in, optional bias: out  ->  x w^T + bias
Var linear(Var x, Var w, Var bias = {});
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// factor * a + shift, elementwise
Var affine(Var a, double factor, double shift);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var sum(Var a);
Var reshape(Var a, Shape shape);
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);
// Max over one axis of a matrix, keeping that axis with size 1.
Var max_over_axis(Var a, std::size_t axis);
// Rows of `table` selected by ids.
Var embedding_lookup(Var table, std::span<const int> ids);
// x: L x c_in, w: c_out x (width * c_in), bias: c_out. No padding; output
// has L - width + 1 rows. Window row k covers x rows k..k+width-1.
Var conv1d(Var x, Var w, Var bias, std::size_t width);
// Elementwise product with a constant mask (inverted dropout masks carry the
// 1/(1-p) scale).
Var dropout(Var a, const Tensor& mask);
// Row-wise softmax over the last axis.
Var softmax(Var a);
// Sum over rows of -log softmax(logits)[target]; rows with target < 0 are
// skipped. Returns a scalar.
Var cross_entropy_with_logits(Var logits, std::span<const int> targets);
// p: m x d1, u: d1 x d2 x r, d: m x d2 -> m x r with
// out[m][k] = sum_ab p[m][a] u[a][b][k] d[m][b].
Var bilinear(Var p, Var u, Var d);

}  // namespace graphtag
