#include "core/autodiff.hpp"

#include <cmath>
#include <memory>

#include "core/common.hpp"

namespace hdmann {

Tape::Var Tape::push(Tensor value, std::function<void(Tape&)> backward_fn) {
  Node node;
  node.grad = Tensor(value.shape);
  node.value = std::move(value);
  node.backward = std::move(backward_fn);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Var Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

void Tape::backward(Var loss) {
  if (!loss.valid() || val(loss).size() != 1)
    throw ValidationError("backward: loss must be a scalar");
  grad_mut(loss).data[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    auto& node = nodes_[static_cast<size_t>(i)];
    if (node.backward) node.backward(*this);
  }
}

Var Tape::conv2d(Var x, Var w, Var b) {
  Tensor y;
  conv2d_forward(val(x), val(w), val(b), y);
  return push(std::move(y), [x, w, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    Tensor gx, gw, gb;
    conv2d_backward(t.val(x), t.val(w), t.grad({out}), gx, gw, gb);
    auto& gxa = t.grad_mut(x);
    for (size_t i = 0; i < gxa.data.size(); ++i) gxa.data[i] += gx.data[i];
    auto& gwa = t.grad_mut(w);
    for (size_t i = 0; i < gwa.data.size(); ++i) gwa.data[i] += gw.data[i];
    auto& gba = t.grad_mut(b);
    for (size_t i = 0; i < gba.data.size(); ++i) gba.data[i] += gb.data[i];
  });
}

Var Tape::relu(Var x) {
  Tensor y;
  relu_forward(val(x), y);
  return push(std::move(y), [x, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& xin = t.val(x);
    const Tensor& gy = t.grad({out});
    auto& gx = t.grad_mut(x);
    for (size_t i = 0; i < gx.data.size(); ++i)
      if (xin.data[i] > 0.0) gx.data[i] += gy.data[i];
  });
}

Var Tape::maxpool2(Var x) {
  Tensor y;
  auto argmax = std::make_shared<std::vector<int>>();
  maxpool2_forward(val(x), y, *argmax);
  return push(std::move(y), [x, argmax, out = static_cast<int>(nodes_.size())](Tape& t) {
    maxpool2_backward(*argmax, t.grad({out}), t.grad_mut(x));
  });
}

Var Tape::flatten(Var x) {
  const Tensor& xin = val(x);
  Tensor y({xin.dim(0), static_cast<int>(xin.size() / xin.dim(0))});
  y.data = xin.data;
  return push(std::move(y), [x, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& gy = t.grad({out});
    auto& gx = t.grad_mut(x);
    for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += gy.data[i];
  });
}

Var Tape::dense(Var x, Var w, Var b) {
  Tensor y;
  dense_forward(val(x), val(w), val(b), y);
  return push(std::move(y), [x, w, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    Tensor gx, gw, gb;
    dense_backward(t.val(x), t.val(w), t.grad({out}), gx, gw, gb);
    auto& gxa = t.grad_mut(x);
    for (size_t i = 0; i < gxa.data.size(); ++i) gxa.data[i] += gx.data[i];
    auto& gwa = t.grad_mut(w);
    for (size_t i = 0; i < gwa.data.size(); ++i) gwa.data[i] += gw.data[i];
    auto& gba = t.grad_mut(b);
    for (size_t i = 0; i < gba.data.size(); ++i) gba.data[i] += gb.data[i];
  });
}

Var Tape::slice_rows(Var x, int begin, int count) {
  const Tensor& xin = val(x);
  int cols = static_cast<int>(xin.size() / xin.dim(0));
  if (begin < 0 || begin + count > xin.dim(0)) throw ValidationError("slice_rows out of range");
  Tensor y({count, cols});
  std::copy(xin.data.begin() + static_cast<int64_t>(begin) * cols,
            xin.data.begin() + static_cast<int64_t>(begin + count) * cols, y.data.begin());
  return push(std::move(y), [x, begin, cols, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& gy = t.grad({out});
    auto& gx = t.grad_mut(x);
    for (size_t i = 0; i < gy.data.size(); ++i)
      gx.data[static_cast<size_t>(begin) * cols + i] += gy.data[i];
  });
}

Var Tape::cosine_rows(Var q, Var k) {
  const Tensor& qv = val(q);
  const Tensor& kv = val(k);
  if (qv.dim(1) != kv.dim(1)) throw ValidationError("cosine_rows: dimension mismatch");
  int b = qv.dim(0), r = kv.dim(0), d = qv.dim(1);
  auto qn = std::make_shared<std::vector<double>>(static_cast<size_t>(b));
  auto kn = std::make_shared<std::vector<double>>(static_cast<size_t>(r));
  for (int i = 0; i < b; ++i) {
    double s = 0.0;
    const double* row = qv.ptr() + static_cast<int64_t>(i) * d;
    for (int j = 0; j < d; ++j) s += row[j] * row[j];
    if (s == 0.0) throw DomainError("cosine_rows: zero-norm query");
    (*qn)[static_cast<size_t>(i)] = std::sqrt(s);
  }
  for (int i = 0; i < r; ++i) {
    double s = 0.0;
    const double* row = kv.ptr() + static_cast<int64_t>(i) * d;
    for (int j = 0; j < d; ++j) s += row[j] * row[j];
    if (s == 0.0) throw DomainError("cosine_rows: zero-norm key");
    (*kn)[static_cast<size_t>(i)] = std::sqrt(s);
  }
  Tensor a({b, r});
  gemm(false, true, b, r, d, 1.0, qv.ptr(), d, kv.ptr(), d, 0.0, a.ptr(), r);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < r; ++j)
      a.data[static_cast<size_t>(i * r + j)] /= (*qn)[static_cast<size_t>(i)] * (*kn)[static_cast<size_t>(j)];

  return push(std::move(a), [q, k, qn, kn, b, r, d, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& a_val = t.val({out});
    const Tensor& ga = t.grad({out});
    const Tensor& qv2 = t.val(q);
    const Tensor& kv2 = t.val(k);
    auto& gq = t.grad_mut(q);
    auto& gk = t.grad_mut(k);
    // d alpha_ij / d q_i = k_j / (|q_i||k_j|) - alpha_ij q_i / |q_i|^2
    for (int i = 0; i < b; ++i) {
      const double* qrow = qv2.ptr() + static_cast<int64_t>(i) * d;
      double* gqrow = gq.ptr() + static_cast<int64_t>(i) * d;
      double qnorm = (*qn)[static_cast<size_t>(i)];
      double self = 0.0;  // sum_j g_ij alpha_ij
      for (int j = 0; j < r; ++j) {
        double g = ga.data[static_cast<size_t>(i * r + j)];
        if (g == 0.0) continue;
        double alpha = a_val.data[static_cast<size_t>(i * r + j)];
        const double* krow = kv2.ptr() + static_cast<int64_t>(j) * d;
        double* gkrow = gk.ptr() + static_cast<int64_t>(j) * d;
        double knorm = (*kn)[static_cast<size_t>(j)];
        double inv = 1.0 / (qnorm * knorm);
        self += g * alpha;
        for (int x = 0; x < d; ++x) {
          gqrow[x] += g * krow[x] * inv;
          gkrow[x] += g * (qrow[x] * inv - alpha * krow[x] / (knorm * knorm));
        }
      }
      if (self != 0.0) {
        double scale = self / (qnorm * qnorm);
        for (int x = 0; x < d; ++x) gqrow[x] -= scale * qrow[x];
      }
    }
  });
}

Var Tape::sharpen_op(Var a, SharpeningSpec spec) {
  const Tensor& av = val(a);
  Tensor e(av.shape);
  for (size_t i = 0; i < av.data.size(); ++i) e.data[i] = sharpen(av.data[i], spec);
  return push(std::move(e), [a, spec, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& av2 = t.val(a);
    const Tensor& ge = t.grad({out});
    auto& ga = t.grad_mut(a);
    for (size_t i = 0; i < ga.data.size(); ++i)
      ga.data[i] += ge.data[i] * sharpen_derivative(av2.data[i], spec);
  });
}

Var Tape::normalize_rows(Var e) {
  const Tensor& ev = val(e);
  int b = ev.dim(0), r = ev.dim(1);
  Tensor w({b, r});
  std::vector<double> sums(static_cast<size_t>(b));
  for (int i = 0; i < b; ++i) {
    double s = 0.0;
    for (int j = 0; j < r; ++j) s += ev.data[static_cast<size_t>(i * r + j)];
    if (s == 0.0) throw DomainError("degenerate attention: sharpened scores sum to zero");
    sums[static_cast<size_t>(i)] = s;
    for (int j = 0; j < r; ++j)
      w.data[static_cast<size_t>(i * r + j)] = ev.data[static_cast<size_t>(i * r + j)] / s;
  }
  auto sums_keep = std::make_shared<std::vector<double>>(std::move(sums));
  return push(std::move(w), [e, b, r, sums_keep, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& w_val = t.val({out});
    const Tensor& gw = t.grad({out});
    auto& ge = t.grad_mut(e);
    for (int i = 0; i < b; ++i) {
      double dot = 0.0;
      for (int j = 0; j < r; ++j)
        dot += gw.data[static_cast<size_t>(i * r + j)] * w_val.data[static_cast<size_t>(i * r + j)];
      double inv = 1.0 / (*sums_keep)[static_cast<size_t>(i)];
      for (int j = 0; j < r; ++j)
        ge.data[static_cast<size_t>(i * r + j)] +=
            (gw.data[static_cast<size_t>(i * r + j)] - dot) * inv;
    }
  });
}

Var Tape::matmul_const(Var x, Tensor m) {
  const Tensor& xv = val(x);
  int b = xv.dim(0), r = xv.dim(1), c = m.dim(1);
  if (m.dim(0) != r) throw ValidationError("matmul_const: shape mismatch");
  Tensor y({b, c});
  gemm(false, false, b, c, r, 1.0, xv.ptr(), r, m.ptr(), c, 0.0, y.ptr(), c);
  auto m_keep = std::make_shared<Tensor>(std::move(m));
  return push(std::move(y), [x, m_keep, b, r, c, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& gy = t.grad({out});
    auto& gx = t.grad_mut(x);
    gemm(false, true, b, r, c, 1.0, gy.ptr(), c, m_keep->ptr(), c, 1.0, gx.ptr(), r);
  });
}

Var Tape::log_loss(Var p, Tensor y_onehot) {
  const Tensor& pv = val(p);
  if (!pv.same_shape(y_onehot)) throw ValidationError("log_loss: shape mismatch");
  int b = pv.dim(0), m = pv.dim(1);
  Tensor loss({b});
  for (int i = 0; i < b; ++i) {
    double l = 0.0;
    for (int j = 0; j < m; ++j) {
      double pij = pv.data[static_cast<size_t>(i * m + j)];
      double pc = std::min(std::max(pij, kProbClamp), 1.0 - kProbClamp);
      double y = y_onehot.data[static_cast<size_t>(i * m + j)];
      l -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
    }
    loss.data[static_cast<size_t>(i)] = l;
  }
  auto y_keep = std::make_shared<Tensor>(std::move(y_onehot));
  return push(std::move(loss), [p, y_keep, b, m, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& pv2 = t.val(p);
    const Tensor& gl = t.grad({out});
    auto& gp = t.grad_mut(p);
    for (int i = 0; i < b; ++i) {
      double g = gl.data[static_cast<size_t>(i)];
      if (g == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        double pij = pv2.data[static_cast<size_t>(i * m + j)];
        if (pij <= kProbClamp || pij >= 1.0 - kProbClamp) continue;  // clamped: zero slope
        double y = y_keep->data[static_cast<size_t>(i * m + j)];
        gp.data[static_cast<size_t>(i * m + j)] += g * (-y / pij + (1.0 - y) / (1.0 - pij));
      }
    }
  });
}

namespace {
double softstep(double x) { return 0.5 * std::tanh(x) + 0.5; }
}  // namespace

Var Tape::occupancy_penalty(Var k, double a) {
  const Tensor& kv = val(k);
  int rows = kv.dim(0), d = kv.dim(1);
  auto row_means = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += softstep(a * kv.data[static_cast<size_t>(i * d + j)]);
    double mean = s / d;
    (*row_means)[static_cast<size_t>(i)] = mean;
    total += (mean - 0.5) * (mean - 0.5);
  }
  Tensor y = Tensor::scalar(total / rows);
  return push(std::move(y), [k, a, rows, d, row_means, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& kv2 = t.val(k);
    double g = t.grad({out}).data[0];
    if (g == 0.0) return;
    auto& gk = t.grad_mut(k);
    for (int i = 0; i < rows; ++i) {
      double outer = g * 2.0 * ((*row_means)[static_cast<size_t>(i)] - 0.5) / (rows * static_cast<double>(d));
      for (int j = 0; j < d; ++j) {
        double th = std::tanh(a * kv2.data[static_cast<size_t>(i * d + j)]);
        gk.data[static_cast<size_t>(i * d + j)] += outer * 0.5 * a * (1.0 - th * th);
      }
    }
  });
}

Var Tape::aux_penalty(Var k, double a, double delta) {
  const Tensor& kv = val(k);
  int rows = kv.dim(0), d = kv.dim(1);
  double total = 0.0;
  for (size_t i = 0; i < kv.data.size(); ++i)
    total += softstep(a * (kv.data[i] + delta)) - softstep(a * (kv.data[i] - delta));
  Tensor y = Tensor::scalar(total / (static_cast<double>(rows) * d));
  return push(std::move(y), [k, a, delta, rows, d, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Tensor& kv2 = t.val(k);
    double g = t.grad({out}).data[0];
    if (g == 0.0) return;
    auto& gk = t.grad_mut(k);
    double scale = g * 0.5 * a / (static_cast<double>(rows) * d);
    for (size_t i = 0; i < kv2.data.size(); ++i) {
      double tp = std::tanh(a * (kv2.data[i] + delta));
      double tm = std::tanh(a * (kv2.data[i] - delta));
      gk.data[i] += scale * ((1.0 - tp * tp) - (1.0 - tm * tm));
    }
  });
}

Var Tape::scale_sum(Var x, double s) {
  const Tensor& xv = val(x);
  double total = 0.0;
  for (double v : xv.data) total += v;
  Tensor y = Tensor::scalar(total * s);
  return push(std::move(y), [x, s, out = static_cast<int>(nodes_.size())](Tape& t) {
    double g = t.grad({out}).data[0] * s;
    auto& gx = t.grad_mut(x);
    for (size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += g;
  });
}

Var Tape::add(Var a, Var b) { return add_scaled(a, b, 1.0); }

Var Tape::add_scaled(Var a, Var b, double s) {
  if (val(a).size() != 1 || val(b).size() != 1)
    throw ValidationError("add_scaled: scalars expected");
  Tensor y = Tensor::scalar(val(a).data[0] + s * val(b).data[0]);
  return push(std::move(y), [a, b, s, out = static_cast<int>(nodes_.size())](Tape& t) {
    double g = t.grad({out}).data[0];
    t.grad_mut(a).data[0] += g;
    t.grad_mut(b).data[0] += g * s;
  });
}

}  // namespace hdmann
