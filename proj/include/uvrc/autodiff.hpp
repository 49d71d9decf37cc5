#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "uvrc/tensor.hpp"

namespace uvrc::ad {

// Reverse-mode tape over Tensor values. Ops execute eagerly and push a
// backward closure; Graph::backward replays the tape in reverse. Node ids
// are indices into the tape, so insertion order is a topological order.
class Graph {
 public:
  int leaf(Tensor t, bool needs_grad = false);

  const Tensor& val(int id) const { return nodes_[size_t(id)].val; }
  bool needs_grad(int id) const { return nodes_[size_t(id)].needs_grad; }

  // Gradient tensor, allocated (zeroed) on first access.
  Tensor& grad(int id);
  bool grad_ready(int id) const { return !nodes_[size_t(id)].grad.v.empty(); }

  // Internal: append an op result.
  int emit(Tensor val, bool needs_grad, std::function<void(Graph&)> backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be scalar.
  void backward(int loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Graph&)> backward;
  };
  std::vector<Node> nodes_;
};

// --- elementwise ---
int add(Graph& g, int a, int b);
int sub(Graph& g, int a, int b);
int mul(Graph& g, int a, int b);
int div(Graph& g, int a, int b);
int add_scalar(Graph& g, int a, double c);
int mul_scalar(Graph& g, int a, double c);
int silu(Graph& g, int a);
int tanh_(Graph& g, int a);
int softplus(Graph& g, int a);
int logistic(Graph& g, int a);
int normal_cdf(Graph& g, int a);
// log(max(x, floor)); gradient is zero where the floor is active.
int log_floor(Graph& g, int a, double floor);
// pow(max(x, floor), e) for constant e.
int pow_floor(Graph& g, int a, double e, double floor);

// --- reductions / shaping ---
int sum(Graph& g, int a);
int mean(Graph& g, int a);
int reshape(Graph& g, int a, int c, int h, int w);
int slice_c(Graph& g, int a, int c0, int c1);  // channels [c0, c1)

// --- structured ---
// x: (C,I,N), w: (C,O,I), b: (C,O,1) -> (C,O,N); independent per channel.
int channel_dense(Graph& g, int x, int w, int b);
// x: (C,O,N) * a: (C,O,1), broadcast over N.
int bmul(Graph& g, int x, int a);
// 2x2 average pool, stride 2; odd tail rows/cols are dropped.
int avg_pool2(Graph& g, int x);
// Separable valid convolution with a fixed 1-D kernel, per channel.
int blur_sep(Graph& g, int x, std::span<const double> kernel);

// --- convolution ---
// x: (Cin,H,W), w: (Cout,Cin,k*k), b: (Cout,1,1); zero padding k/2.
int conv2d(Graph& g, int x, int w, int b, int k, int stride);
// Transposed conv, kernel 4, stride 2, pad 1: (Cin,H,W) -> (Cout,2H,2W).
// w: (Cin,Cout,16), b: (Cout,1,1).
int deconv2d(Graph& g, int x, int w, int b);

// Windowed single-head self-attention with residual connection.
// wq/wk/wv/wo: (C,C,1). Window is 4 when both dims divide by 4, else 2
// when both are even, else 1.
int win_attention(Graph& g, int x, int wq, int wk, int wv, int wo);
int attention_window(int h, int w);

}  // namespace uvrc::ad
