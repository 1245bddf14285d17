#pragma once

#include <functional>
#include <vector>

#include "core/attention.hpp"
#include "core/tensor.hpp"

namespace hdmann {

// Reverse-mode tape over whole tensors. Nodes are appended in evaluation
// order, so the tape is already a topological order and the backward sweep
// visits each node exactly once, back to front.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Var leaf(Tensor value);

  const Tensor& val(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
  const Tensor& grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].grad; }

  // Seeds d(loss)/d(loss) = 1 and propagates to every node. loss must be a
  // scalar ([1]).
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

  // --- network ops ---
  Var conv2d(Var x, Var w, Var b);
  Var relu(Var x);
  Var maxpool2(Var x);
  Var flatten(Var x);  // [B,C,H,W] -> [B,C*H*W]
  Var dense(Var x, Var w, Var b);

  // --- episode head ops ---
  Var slice_rows(Var x, int begin, int count);
  Var cosine_rows(Var q, Var k);                 // [b,d],[r,d] -> [b,r]
  Var sharpen_op(Var a, SharpeningSpec spec);    // elementwise
  Var normalize_rows(Var e);                     // rows scaled to sum 1
  Var matmul_const(Var x, Tensor m);             // [b,r] x [r,c] -> [b,c]
  Var log_loss(Var p, Tensor y_onehot);          // -> [b], clamps p to [1e-7, 1-1e-7]
  Var occupancy_penalty(Var k, double a);        // mean_i (mean_j softstep(a k_ij) - 1/2)^2
  Var aux_penalty(Var k, double a, double delta);  // mean_ij softstep bump around 0
  Var scale_sum(Var x, double s);                // s * sum(x) -> scalar
  Var add(Var a, Var b);                         // scalar + scalar
  Var add_scaled(Var a, Var b, double s);        // scalar + s * scalar

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> backward;
  };

  Var push(Tensor value, std::function<void(Tape&)> backward_fn);
  Tensor& grad_mut(Var v) { return nodes_[static_cast<size_t>(v.id)].grad; }

  std::vector<Node> nodes_;
};

using Var = Tape::Var;

// Probability clamp applied inside log_loss before the logarithms.
inline constexpr double kProbClamp = 1e-7;

}  // namespace hdmann
