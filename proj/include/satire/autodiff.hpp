#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <unordered_map>
#include <vector>

#include "satire/ndarray.hpp"

namespace satire {

// A learnable array. Gradients accumulate across backward passes and are
// zeroed by the optimizer step (or explicitly).
struct Parameter {
  std::string name;
  NDArray value;
  NDArray grad;

  Parameter() = default;
  Parameter(std::string n, NDArray v)
      : name(std::move(n)), value(std::move(v)) {
    grad = NDArray::zeros(value.shape);
  }
  void zero_grad() { grad.fill(0.0); }
};

// Handle to a node on a Tape. Only valid for the tape that produced it.
struct Var {
  std::size_t idx = static_cast<std::size_t>(-1);
};

// Records a forward computation and replays it in reverse to accumulate
// gradients into every reachable Parameter. One tape per training context;
// build a fresh tape per document.
class Tape {
 public:
  explicit Tape(std::uint64_t dropout_seed = 0) : rng_(dropout_seed) {}

  Var leaf(NDArray v);        // constant input, no parameter binding
  Var param(Parameter& p);    // tracked leaf; repeated calls reuse the node

  // forward primitives
  Var matmul(Var a, Var b);                 // [m,k]x[k,n] -> [m,n]
  Var matvec(Var m, Var x);                 // [m,k]x[k]   -> [m]
  Var add(Var a, Var b);                    // same shape, or [t,d]+[d]
  Var sub(Var a, Var b);                    // same shape
  Var mul(Var a, Var b);                    // elementwise, same shape
  Var smul(Var s, Var x);                   // scalar [1] times tensor
  Var affine(double a, Var x, double b);    // a*x + b elementwise
  Var concat(const std::vector<Var>& xs);   // 1-D concat along the axis
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var softmax(Var x);                       // last axis, max-subtracted
  Var max_over_time(Var x);                 // [t,f] -> [f], max over t
  Var embedding_lookup(Var table, const std::vector<int>& idx);  // [n,d]
  Var dropout(Var x, double p, bool training);
  Var unfold(Var x, std::size_t window);    // [t,d] -> [t-w+1, w*d]
  Var row(Var x, std::size_t r);            // [t,d] -> [d]
  Var index(Var x, std::size_t i);          // [n] -> [1]
  Var stack(const std::vector<Var>& rows);  // k vectors [d] -> [k,d]
  Var sum(Var x);                           // -> [1]
  Var dot(Var a, Var b);                    // [n],[n] -> [1]

  // mean of -(y log p + (1-y) log(1-p)); p clamped to (1e-12, 1-1e-12)
  Var binary_cross_entropy(Var pred, const std::vector<double>& labels);

  // Seeds d(loss)=1, sweeps the tape once in reverse execution order,
  // accumulates (+=) into every bound Parameter, then clears the tape.
  void backward(Var loss);

  // references stay valid as the tape grows (deque storage)
  const NDArray& value(Var v) const { return nodes_[v.idx].value; }
  double scalar_value(Var v) const { return nodes_[v.idx].value.data.at(0); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    NDArray value;
    NDArray grad;
    std::function<void()> back;  // empty for leaves
  };
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
  std::vector<std::pair<Parameter*, std::size_t>> bound_;
  std::mt19937_64 rng_;

  Var push(NDArray value, std::function<void()> back = {});
  NDArray& grad_of(Var v) { return nodes_[v.idx].grad; }
  const NDArray& val_of(Var v) const { return nodes_[v.idx].value; }
};

// value <- value - lr * grad for every parameter, then gradients are zeroed.
void sgd_step(const std::vector<Parameter*>& params, double lr);

// lr(epoch) = initial * decay^epoch, epoch starting at 0.
double lr_schedule(int epoch, double initial = 0.3, double decay = 0.9);

// Central-difference check of d(f)/d(p). `f` must rebuild its tape, run
// forward and backward (gradients land in p.grad), return the loss, and be
// deterministic (dropout off or identically seeded). Returns the max over
// coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double grad_check(Parameter& p, const std::function<double()>& f,
                  double h = 1e-5);

}  // namespace satire
