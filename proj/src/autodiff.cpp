#include "satire/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace satire {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kBceEps = 1e-12;

}  // namespace

Var Tape::push(NDArray value, std::function<void()> back) {
  Node n;
  n.grad = NDArray::zeros(value.shape);
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::leaf(NDArray v) { return push(std::move(v)); }

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{it->second};
  Var v = push(p.value);
  param_nodes_[&p] = v.idx;
  bound_.emplace_back(&p, v.idx);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const NDArray& A = val_of(a);
  const NDArray& B = val_of(b);
  require_shape(A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows(), A, B,
                "matmul");
  std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  NDArray C = NDArray::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      double av = A.at(i, l);
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += av * B.at(l, j);
    }
  Var out = push(std::move(C), [this, a, b, m, k, n, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& A2 = val_of(a);
    const NDArray& B2 = val_of(b);
    NDArray& ga = grad_of(a);
    NDArray& gb = grad_of(b);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double gv = g.at(i, j);
        if (gv == 0.0) continue;
        for (std::size_t l = 0; l < k; ++l) {
          ga.at(i, l) += gv * B2.at(l, j);
          gb.at(l, j) += A2.at(i, l) * gv;
        }
      }
  });
  return out;
}

Var Tape::matvec(Var m, Var x) {
  const NDArray& M = val_of(m);
  const NDArray& X = val_of(x);
  require_shape(M.rank() == 2 && X.rank() == 1 && M.cols() == X.numel(), M, X,
                "matvec");
  std::size_t r = M.rows(), c = M.cols();
  NDArray y = NDArray::zeros({r});
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += M.at(i, j) * X.at(j);
    y.at(i) = s;
  }
  Var out = push(std::move(y), [this, m, x, r, c, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& M2 = val_of(m);
    const NDArray& X2 = val_of(x);
    NDArray& gm = grad_of(m);
    NDArray& gx = grad_of(x);
    for (std::size_t i = 0; i < r; ++i) {
      double gv = g.at(i);
      if (gv == 0.0) continue;
      for (std::size_t j = 0; j < c; ++j) {
        gm.at(i, j) += gv * X2.at(j);
        gx.at(j) += M2.at(i, j) * gv;
      }
    }
  });
  return out;
}

Var Tape::add(Var a, Var b) {
  const NDArray& A = val_of(a);
  const NDArray& B = val_of(b);
  if (A.same_shape(B)) {
    NDArray C = A;
    for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) += B.at(i);
    return push(std::move(C), [this, a, b, outi = nodes_.size()] {
      const NDArray& g = nodes_[outi].grad;
      NDArray& ga = grad_of(a);
      NDArray& gb = grad_of(b);
      for (std::size_t i = 0; i < g.numel(); ++i) {
        ga.at(i) += g.at(i);
        gb.at(i) += g.at(i);
      }
    });
  }
  // broadcast over the leading axis: [t,d] + [d]
  require_shape(A.rank() == 2 && B.rank() == 1 && A.cols() == B.numel(), A, B,
                "add");
  std::size_t t = A.rows(), d = A.cols();
  NDArray C = A;
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < d; ++j) C.at(i, j) += B.at(j);
  return push(std::move(C), [this, a, b, t, d, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    NDArray& ga = grad_of(a);
    NDArray& gb = grad_of(b);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        ga.at(i, j) += g.at(i, j);
        gb.at(j) += g.at(i, j);
      }
  });
}

Var Tape::sub(Var a, Var b) {
  const NDArray& A = val_of(a);
  const NDArray& B = val_of(b);
  require_shape(A.same_shape(B), A, B, "sub");
  NDArray C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) -= B.at(i);
  return push(std::move(C), [this, a, b, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    NDArray& ga = grad_of(a);
    NDArray& gb = grad_of(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga.at(i) += g.at(i);
      gb.at(i) -= g.at(i);
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const NDArray& A = val_of(a);
  const NDArray& B = val_of(b);
  require_shape(A.same_shape(B), A, B, "mul");
  NDArray C = A;
  for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) *= B.at(i);
  return push(std::move(C), [this, a, b, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& A2 = val_of(a);
    const NDArray& B2 = val_of(b);
    NDArray& ga = grad_of(a);
    NDArray& gb = grad_of(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga.at(i) += g.at(i) * B2.at(i);
      gb.at(i) += g.at(i) * A2.at(i);
    }
  });
}

Var Tape::smul(Var s, Var x) {
  const NDArray& S = val_of(s);
  const NDArray& X = val_of(x);
  require_shape(S.numel() == 1, S, X, "smul");
  double sv = S.at(0);
  NDArray C = X;
  for (double& v : C.data) v *= sv;
  return push(std::move(C), [this, s, x, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& X2 = val_of(x);
    double sv2 = val_of(s).at(0);
    NDArray& gs = grad_of(s);
    NDArray& gx = grad_of(x);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      gs.at(0) += g.at(i) * X2.at(i);
      gx.at(i) += g.at(i) * sv2;
    }
  });
}

Var Tape::affine(double a, Var x, double b) {
  NDArray C = val_of(x);
  for (double& v : C.data) v = a * v + b;
  return push(std::move(C), [this, a, x, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    NDArray& gx = grad_of(x);
    for (std::size_t i = 0; i < g.numel(); ++i) gx.at(i) += a * g.at(i);
  });
}

Var Tape::concat(const std::vector<Var>& xs) {
  if (xs.empty()) throw DataError("concat: empty input list");
  std::size_t total = 0;
  for (Var v : xs) {
    if (val_of(v).rank() != 1)
      throw DataError("concat: expects 1-D inputs, got " +
                      shape_str(val_of(v).shape));
    total += val_of(v).numel();
  }
  NDArray C = NDArray::zeros({total});
  std::size_t off = 0;
  for (Var v : xs) {
    const NDArray& X = val_of(v);
    std::copy(X.data.begin(), X.data.end(), C.data.begin() + off);
    off += X.numel();
  }
  return push(std::move(C), [this, xs, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    std::size_t off2 = 0;
    for (Var v : xs) {
      NDArray& gx = grad_of(v);
      for (std::size_t i = 0; i < gx.numel(); ++i) gx.at(i) += g.at(off2 + i);
      off2 += gx.numel();
    }
  });
}

Var Tape::sigmoid(Var x) {
  NDArray C = val_of(x);
  for (double& v : C.data) v = stable_sigmoid(v);
  return push(std::move(C), [this, x, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& y = nodes_[outi].value;
    NDArray& gx = grad_of(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      gx.at(i) += g.at(i) * y.at(i) * (1.0 - y.at(i));
  });
}

Var Tape::tanh(Var x) {
  NDArray C = val_of(x);
  for (double& v : C.data) v = std::tanh(v);
  return push(std::move(C), [this, x, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& y = nodes_[outi].value;
    NDArray& gx = grad_of(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      gx.at(i) += g.at(i) * (1.0 - y.at(i) * y.at(i));
  });
}

Var Tape::softmax(Var x) {
  const NDArray& X = val_of(x);
  std::size_t rows = X.rank() == 2 ? X.rows() : 1;
  std::size_t n = X.rank() == 2 ? X.cols() : X.numel();
  if (n == 0) throw DataError("softmax: empty input");
  NDArray C = X;
  for (std::size_t r = 0; r < rows; ++r) {
    double* p = C.data.data() + r * n;
    double mx = *std::max_element(p, p + n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::exp(p[i] - mx);
      z += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) p[i] /= z;
  }
  return push(std::move(C), [this, x, rows, n, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    const NDArray& y = nodes_[outi].value;
    NDArray& gx = grad_of(x);
    for (std::size_t r = 0; r < rows; ++r) {
      double dotv = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dotv += g.at(r * n + i) * y.at(r * n + i);
      for (std::size_t i = 0; i < n; ++i)
        gx.at(r * n + i) += y.at(r * n + i) * (g.at(r * n + i) - dotv);
    }
  });
}

Var Tape::max_over_time(Var x) {
  const NDArray& X = val_of(x);
  if (X.rank() != 2) throw DataError("max_over_time: expects [t,f], got " +
                                     shape_str(X.shape));
  std::size_t t = X.rows(), f = X.cols();
  if (t == 0) throw DataError("max_over_time: zero time steps");
  NDArray C = NDArray::zeros({f});
  std::vector<std::size_t> arg(f, 0);
  for (std::size_t j = 0; j < f; ++j) {
    double best = X.at(0, j);
    std::size_t bi = 0;
    for (std::size_t i = 1; i < t; ++i)
      if (X.at(i, j) > best) {  // ties keep the first position
        best = X.at(i, j);
        bi = i;
      }
    C.at(j) = best;
    arg[j] = bi;
  }
  return push(std::move(C),
              [this, x, f, arg = std::move(arg), outi = nodes_.size()] {
                const NDArray& g = nodes_[outi].grad;
                NDArray& gx = grad_of(x);
                for (std::size_t j = 0; j < f; ++j)
                  gx.at(arg[j], j) += g.at(j);
              });
}

Var Tape::embedding_lookup(Var table, const std::vector<int>& idx) {
  const NDArray& T = val_of(table);
  if (T.rank() != 2)
    throw DataError("embedding_lookup: table must be 2-D, got " +
                    shape_str(T.shape));
  std::size_t d = T.cols();
  for (int i : idx)
    if (i < 0 || static_cast<std::size_t>(i) >= T.rows())
      throw DataError("embedding_lookup: index " + std::to_string(i) +
                      " out of range for table " + shape_str(T.shape));
  NDArray C = NDArray::zeros({idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy(T.data.begin() + idx[r] * d, T.data.begin() + (idx[r] + 1) * d,
              C.data.begin() + r * d);
  return push(std::move(C), [this, table, idx, d, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    NDArray& gt = grad_of(table);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < d; ++j)
        gt.at(static_cast<std::size_t>(idx[r]), j) += g.at(r, j);
  });
}

Var Tape::dropout(Var x, double p, bool training) {
  if (p < 0.0 || p >= 1.0)
    throw DataError("dropout: p must lie in [0,1), got " + std::to_string(p));
  if (!training || p == 0.0) return affine(1.0, x, 0.0);
  const NDArray& X = val_of(x);
  double keep = 1.0 - p;
  std::vector<double> mask(X.numel());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& m : mask) m = (u(rng_) < p) ? 0.0 : 1.0 / keep;
  NDArray C = X;
  for (std::size_t i = 0; i < C.numel(); ++i) C.at(i) *= mask[i];
  return push(std::move(C),
              [this, x, mask = std::move(mask), outi = nodes_.size()] {
                const NDArray& g = nodes_[outi].grad;
                NDArray& gx = grad_of(x);
                for (std::size_t i = 0; i < g.numel(); ++i)
                  gx.at(i) += g.at(i) * mask[i];
              });
}

Var Tape::unfold(Var x, std::size_t window) {
  const NDArray& X = val_of(x);
  if (X.rank() != 2)
    throw DataError("unfold: expects [t,d], got " + shape_str(X.shape));
  std::size_t t = X.rows(), d = X.cols();
  if (window == 0 || window > t)
    throw DataError("unfold: window " + std::to_string(window) +
                    " invalid for " + shape_str(X.shape));
  std::size_t out_t = t - window + 1;
  NDArray C = NDArray::zeros({out_t, window * d});
  for (std::size_t i = 0; i < out_t; ++i)
    std::copy(X.data.begin() + i * d, X.data.begin() + (i + window) * d,
              C.data.begin() + i * window * d);
  return push(std::move(C),
              [this, x, window, d, out_t, outi = nodes_.size()] {
                const NDArray& g = nodes_[outi].grad;
                NDArray& gx = grad_of(x);
                for (std::size_t i = 0; i < out_t; ++i)
                  for (std::size_t k = 0; k < window * d; ++k)
                    gx.at(i * d + k) += g.at(i * window * d + k);
              });
}

Var Tape::row(Var x, std::size_t r) {
  const NDArray& X = val_of(x);
  if (X.rank() != 2 || r >= X.rows())
    throw DataError("row: index " + std::to_string(r) + " out of range for " +
                    shape_str(X.shape));
  std::size_t d = X.cols();
  NDArray C = NDArray::zeros({d});
  std::copy(X.data.begin() + r * d, X.data.begin() + (r + 1) * d,
            C.data.begin());
  return push(std::move(C), [this, x, r, d, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    NDArray& gx = grad_of(x);
    for (std::size_t j = 0; j < d; ++j) gx.at(r, j) += g.at(j);
  });
}

Var Tape::index(Var x, std::size_t i) {
  const NDArray& X = val_of(x);
  if (X.rank() != 1 || i >= X.numel())
    throw DataError("index: position " + std::to_string(i) +
                    " out of range for " + shape_str(X.shape));
  NDArray C = NDArray::scalar(X.at(i));
  return push(std::move(C), [this, x, i, outi = nodes_.size()] {
    grad_of(x).at(i) += nodes_[outi].grad.at(0);
  });
}

Var Tape::stack(const std::vector<Var>& rows) {
  if (rows.empty()) throw DataError("stack: empty input list");
  std::size_t d = val_of(rows[0]).numel();
  for (Var v : rows)
    require_shape(val_of(v).rank() == 1 && val_of(v).numel() == d,
                  val_of(rows[0]), val_of(v), "stack");
  NDArray C = NDArray::zeros({rows.size(), d});
  for (std::size_t r = 0; r < rows.size(); ++r)
    std::copy(val_of(rows[r]).data.begin(), val_of(rows[r]).data.end(),
              C.data.begin() + r * d);
  return push(std::move(C), [this, rows, d, outi = nodes_.size()] {
    const NDArray& g = nodes_[outi].grad;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      NDArray& gx = grad_of(rows[r]);
      for (std::size_t j = 0; j < d; ++j) gx.at(j) += g.at(r, j);
    }
  });
}

Var Tape::sum(Var x) {
  const NDArray& X = val_of(x);
  double s = 0.0;
  for (double v : X.data) s += v;
  return push(NDArray::scalar(s), [this, x, outi = nodes_.size()] {
    double g = nodes_[outi].grad.at(0);
    NDArray& gx = grad_of(x);
    for (double& v : gx.data) v += g;
  });
}

Var Tape::dot(Var a, Var b) {
  const NDArray& A = val_of(a);
  const NDArray& B = val_of(b);
  require_shape(A.same_shape(B) && A.rank() == 1, A, B, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A.at(i) * B.at(i);
  return push(NDArray::scalar(s), [this, a, b, outi = nodes_.size()] {
    double g = nodes_[outi].grad.at(0);
    const NDArray& A2 = val_of(a);
    const NDArray& B2 = val_of(b);
    NDArray& ga = grad_of(a);
    NDArray& gb = grad_of(b);
    for (std::size_t i = 0; i < A2.numel(); ++i) {
      ga.at(i) += g * B2.at(i);
      gb.at(i) += g * A2.at(i);
    }
  });
}

Var Tape::binary_cross_entropy(Var pred, const std::vector<double>& labels) {
  const NDArray& P = val_of(pred);
  if (P.numel() != labels.size())
    throw DataError("binary_cross_entropy: " + std::to_string(P.numel()) +
                    " predictions vs " + std::to_string(labels.size()) +
                    " labels");
  std::size_t n = P.numel();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = std::clamp(P.at(i), kBceEps, 1.0 - kBceEps);
    loss -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  loss /= static_cast<double>(n);
  return push(NDArray::scalar(loss),
              [this, pred, labels, n, outi = nodes_.size()] {
                double g = nodes_[outi].grad.at(0);
                const NDArray& P2 = val_of(pred);
                NDArray& gp = grad_of(pred);
                for (std::size_t i = 0; i < n; ++i) {
                  double p = std::clamp(P2.at(i), kBceEps, 1.0 - kBceEps);
                  gp.at(i) += g * (p - labels[i]) /
                              (p * (1.0 - p) * static_cast<double>(n));
                }
              });
}

void Tape::backward(Var loss) {
  if (nodes_.empty())
    throw DataError("backward: no recorded forward pass");
  if (loss.idx >= nodes_.size())
    throw DataError("backward: loss is not a node of this tape");
  if (nodes_[loss.idx].value.numel() != 1)
    throw DataError("backward: loss must be a scalar, got " +
                    shape_str(nodes_[loss.idx].value.shape));
  nodes_[loss.idx].grad.at(0) = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;)
    if (nodes_[i].back) nodes_[i].back();
  for (auto& [p, idx] : bound_) {
    const NDArray& g = nodes_[idx].grad;
    for (std::size_t i = 0; i < g.numel(); ++i) p->grad.at(i) += g.at(i);
  }
  nodes_.clear();
  param_nodes_.clear();
  bound_.clear();
}

void sgd_step(const std::vector<Parameter*>& params, double lr) {
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.numel(); ++i)
      p->value.at(i) -= lr * p->grad.at(i);
    if (!p->value.all_finite())
      throw DataError("sgd_step: non-finite values in parameter " + p->name);
    p->zero_grad();
  }
}

double lr_schedule(int epoch, double initial, double decay) {
  return initial * std::pow(decay, epoch);
}

double grad_check(Parameter& p, const std::function<double()>& f, double h) {
  p.zero_grad();
  f();
  NDArray analytic = p.grad;
  p.zero_grad();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.value.numel(); ++i) {
    double orig = p.value.at(i);
    p.value.at(i) = orig + h;
    double fp = f();
    p.value.at(i) = orig - h;
    double fm = f();
    p.value.at(i) = orig;
    double numeric = (fp - fm) / (2.0 * h);
    double a = analytic.at(i);
    double rel =
        std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  p.zero_grad();
  return worst;
}

}  // namespace satire
