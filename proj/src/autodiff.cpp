#include "uvrc/autodiff.hpp"

#include <cmath>

namespace uvrc::ad {

int Graph::leaf(Tensor t, bool needs_grad) {
  return emit(std::move(t), needs_grad, nullptr);
}

int Graph::emit(Tensor val, bool needs_grad, std::function<void(Graph&)> backward) {
  nodes_.push_back(Node{std::move(val), Tensor{}, needs_grad, std::move(backward)});
  return int(nodes_.size()) - 1;
}

Tensor& Graph::grad(int id) {
  Node& n = nodes_[size_t(id)];
  if (n.grad.v.empty()) n.grad = Tensor(n.val.c, n.val.h, n.val.w);
  return n.grad;
}

void Graph::backward(int loss) {
  if (val(loss).size() != 1) throw InvalidArgument("backward: loss must be scalar");
  grad(loss).v[0] = 1.0;
  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[size_t(id)];
    if (!n.needs_grad || !n.backward || n.grad.v.empty()) continue;
    n.backward(*this);
  }
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) throw InvalidArgument(std::string(op) + ": shape mismatch");
}

inline double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

int add(Graph& g, int a, int b) {
  check_same_shape(g.val(a), g.val(b), "add");
  Tensor out = g.val(a);
  const Tensor& vb = g.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += vb.v[i];
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    for (int p : {a, b}) {
      if (!gg.needs_grad(p)) continue;
      Tensor& gp = gg.grad(p);
      for (size_t i = 0; i < go.v.size(); ++i) gp.v[i] += go.v[i];
    }
  });
}

int sub(Graph& g, int a, int b) {
  check_same_shape(g.val(a), g.val(b), "sub");
  Tensor out = g.val(a);
  const Tensor& vb = g.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= vb.v[i];
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    if (gg.needs_grad(a)) {
      Tensor& ga = gg.grad(a);
      for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i];
    }
    if (gg.needs_grad(b)) {
      Tensor& gb = gg.grad(b);
      for (size_t i = 0; i < go.v.size(); ++i) gb.v[i] -= go.v[i];
    }
  });
}

int mul(Graph& g, int a, int b) {
  check_same_shape(g.val(a), g.val(b), "mul");
  Tensor out = g.val(a);
  const Tensor& vb = g.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= vb.v[i];
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    if (gg.needs_grad(a)) {
      Tensor& ga = gg.grad(a);
      const Tensor& bb = gg.val(b);
      for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] * bb.v[i];
    }
    if (gg.needs_grad(b)) {
      Tensor& gb = gg.grad(b);
      const Tensor& aa = gg.val(a);
      for (size_t i = 0; i < go.v.size(); ++i) gb.v[i] += go.v[i] * aa.v[i];
    }
  });
}

int div(Graph& g, int a, int b) {
  check_same_shape(g.val(a), g.val(b), "div");
  Tensor out = g.val(a);
  const Tensor& vb = g.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] /= vb.v[i];
  bool ng = g.needs_grad(a) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& bb = gg.val(b);
    if (gg.needs_grad(a)) {
      Tensor& ga = gg.grad(a);
      for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] / bb.v[i];
    }
    if (gg.needs_grad(b)) {
      Tensor& gb = gg.grad(b);
      const Tensor& y = gg.val(self);
      for (size_t i = 0; i < go.v.size(); ++i) gb.v[i] -= go.v[i] * y.v[i] / bb.v[i];
    }
  });
}

int add_scalar(Graph& g, int a, double c) {
  Tensor out = g.val(a);
  for (double& x : out.v) x += c;
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i];
  });
}

int mul_scalar(Graph& g, int a, double c) {
  Tensor out = g.val(a);
  for (double& x : out.v) x *= c;
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] * c;
  });
}

int silu(Graph& g, int a) {
  Tensor out = g.val(a);
  for (double& x : out.v) x *= sigmoid_d(x);
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& xa = gg.val(a);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) {
      double s = sigmoid_d(xa.v[i]);
      ga.v[i] += go.v[i] * (s + xa.v[i] * s * (1.0 - s));
    }
  });
}

int tanh_(Graph& g, int a) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = std::tanh(x);
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& y = gg.val(self);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] * (1.0 - y.v[i] * y.v[i]);
  });
}

int softplus(Graph& g, int a) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = x > 30.0 ? x : std::log1p(std::exp(x));
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& xa = gg.val(a);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] * sigmoid_d(xa.v[i]);
  });
}

int logistic(Graph& g, int a) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = sigmoid_d(x);
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& y = gg.val(self);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i] * y.v[i] * (1.0 - y.v[i]);
  });
}

int normal_cdf(Graph& g, int a) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = 0.5 * std::erfc(-x * kInvSqrt2);
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& xa = gg.val(a);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i)
      ga.v[i] += go.v[i] * kInvSqrt2Pi * std::exp(-0.5 * xa.v[i] * xa.v[i]);
  });
}

int log_floor(Graph& g, int a, double floor) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = std::log(std::max(x, floor));
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& xa = gg.val(a);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i)
      if (xa.v[i] > floor) ga.v[i] += go.v[i] / xa.v[i];
  });
}

int pow_floor(Graph& g, int a, double e, double floor) {
  Tensor out = g.val(a);
  for (double& x : out.v) x = std::pow(std::max(x, floor), e);
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    const Tensor& xa = gg.val(a);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i)
      if (xa.v[i] > floor) ga.v[i] += go.v[i] * e * std::pow(xa.v[i], e - 1.0);
  });
}

int sum(Graph& g, int a) {
  double s = 0;
  for (double x : g.val(a).v) s += x;
  int self = int(g.size());
  return g.emit(Tensor::scalar(s), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    double go = gg.grad(self).v[0];
    Tensor& ga = gg.grad(a);
    for (double& x : ga.v) x += go;
  });
}

int mean(Graph& g, int a) {
  const size_t n = g.val(a).size();
  double s = 0;
  for (double x : g.val(a).v) s += x;
  int self = int(g.size());
  return g.emit(Tensor::scalar(s / double(n)), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    double go = gg.grad(self).v[0] / double(n);
    Tensor& ga = gg.grad(a);
    for (double& x : ga.v) x += go;
  });
}

int reshape(Graph& g, int a, int c, int h, int w) {
  if (size_t(c) * h * w != g.val(a).size()) throw InvalidArgument("reshape: size mismatch");
  Tensor out = g.val(a);
  out.c = c;
  out.h = h;
  out.w = w;
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    Tensor& ga = gg.grad(a);
    for (size_t i = 0; i < go.v.size(); ++i) ga.v[i] += go.v[i];
  });
}

int slice_c(Graph& g, int a, int c0, int c1) {
  const Tensor& x = g.val(a);
  if (c0 < 0 || c1 > x.c || c0 >= c1) throw InvalidArgument("slice_c: bad channel range");
  Tensor out(c1 - c0, x.h, x.w);
  std::copy_n(x.plane(c0), out.size(), out.v.data());
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(a), [=](Graph& gg) {
    if (!gg.needs_grad(a)) return;
    const Tensor& go = gg.grad(self);
    Tensor& ga = gg.grad(a);
    double* dst = ga.plane(c0);
    for (size_t i = 0; i < go.v.size(); ++i) dst[i] += go.v[i];
  });
}

int bmul(Graph& g, int x, int a) {
  const Tensor& xv = g.val(x);
  const Tensor& av = g.val(a);
  if (av.c != xv.c || av.h != xv.h || av.w != 1) throw InvalidArgument("bmul: shape mismatch");
  Tensor out = xv;
  for (int c = 0; c < xv.c; ++c)
    for (int i = 0; i < xv.h; ++i) {
      double s = av.at(c, i, 0);
      double* row = out.plane(c) + size_t(i) * xv.w;
      for (int j = 0; j < xv.w; ++j) row[j] *= s;
    }
  bool ng = g.needs_grad(x) || g.needs_grad(a);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& xx = gg.val(x);
    const Tensor& aa = gg.val(a);
    if (gg.needs_grad(x)) {
      Tensor& gx = gg.grad(x);
      for (int c = 0; c < xx.c; ++c)
        for (int i = 0; i < xx.h; ++i) {
          double s = aa.at(c, i, 0);
          const double* grow = go.plane(c) + size_t(i) * xx.w;
          double* xrow = gx.plane(c) + size_t(i) * xx.w;
          for (int j = 0; j < xx.w; ++j) xrow[j] += grow[j] * s;
        }
    }
    if (gg.needs_grad(a)) {
      Tensor& ga = gg.grad(a);
      for (int c = 0; c < xx.c; ++c)
        for (int i = 0; i < xx.h; ++i) {
          const double* grow = go.plane(c) + size_t(i) * xx.w;
          const double* xrow = xx.plane(c) + size_t(i) * xx.w;
          double s = 0;
          for (int j = 0; j < xx.w; ++j) s += grow[j] * xrow[j];
          ga.at(c, i, 0) += s;
        }
    }
  });
}

int avg_pool2(Graph& g, int x) {
  const Tensor& xv = g.val(x);
  int ho = xv.h / 2, wo = xv.w / 2;
  if (ho < 1 || wo < 1) throw InvalidArgument("avg_pool2: input too small");
  Tensor out(xv.c, ho, wo);
  for (int c = 0; c < xv.c; ++c)
    for (int y = 0; y < ho; ++y)
      for (int xx = 0; xx < wo; ++xx)
        out.at(c, y, xx) = 0.25 * (xv.at(c, 2 * y, 2 * xx) + xv.at(c, 2 * y, 2 * xx + 1) +
                                   xv.at(c, 2 * y + 1, 2 * xx) + xv.at(c, 2 * y + 1, 2 * xx + 1));
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(x), [=](Graph& gg) {
    if (!gg.needs_grad(x)) return;
    const Tensor& go = gg.grad(self);
    Tensor& gx = gg.grad(x);
    for (int c = 0; c < go.c; ++c)
      for (int y = 0; y < go.h; ++y)
        for (int xx = 0; xx < go.w; ++xx) {
          double d = 0.25 * go.at(c, y, xx);
          gx.at(c, 2 * y, 2 * xx) += d;
          gx.at(c, 2 * y, 2 * xx + 1) += d;
          gx.at(c, 2 * y + 1, 2 * xx) += d;
          gx.at(c, 2 * y + 1, 2 * xx + 1) += d;
        }
  });
}

int blur_sep(Graph& g, int x, std::span<const double> kernel) {
  const Tensor& xv = g.val(x);
  const int L = int(kernel.size());
  if (xv.h < L || xv.w < L) throw InvalidArgument("blur_sep: input smaller than kernel");
  std::vector<double> k(kernel.begin(), kernel.end());
  const int th = xv.h, tw = xv.w - L + 1;
  const int oh = xv.h - L + 1, ow = tw;
  // horizontal then vertical, valid.
  Tensor tmp(xv.c, th, tw);
  for (int c = 0; c < xv.c; ++c)
    for (int y = 0; y < th; ++y)
      for (int ox = 0; ox < tw; ++ox) {
        double s = 0;
        for (int j = 0; j < L; ++j) s += k[size_t(j)] * xv.at(c, y, ox + j);
        tmp.at(c, y, ox) = s;
      }
  Tensor out(xv.c, oh, ow);
  for (int c = 0; c < xv.c; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double s = 0;
        for (int i = 0; i < L; ++i) s += k[size_t(i)] * tmp.at(c, oy + i, ox);
        out.at(c, oy, ox) = s;
      }
  int self = int(g.size());
  return g.emit(std::move(out), g.needs_grad(x), [=](Graph& gg) {
    if (!gg.needs_grad(x)) return;
    const Tensor& go = gg.grad(self);
    Tensor& gx = gg.grad(x);
    Tensor dtmp(gx.c, th, tw);
    for (int c = 0; c < go.c; ++c)
      for (int oy = 0; oy < go.h; ++oy)
        for (int ox = 0; ox < go.w; ++ox) {
          double d = go.at(c, oy, ox);
          for (int i = 0; i < int(k.size()); ++i) dtmp.at(c, oy + i, ox) += k[size_t(i)] * d;
        }
    for (int c = 0; c < gx.c; ++c)
      for (int y = 0; y < th; ++y)
        for (int ox = 0; ox < tw; ++ox) {
          double d = dtmp.at(c, y, ox);
          for (int j = 0; j < int(k.size()); ++j) gx.at(c, y, ox + j) += k[size_t(j)] * d;
        }
  });
}

int attention_window(int h, int w) {
  if (h % 4 == 0 && w % 4 == 0) return 4;
  if (h % 2 == 0 && w % 2 == 0) return 2;
  return 1;
}

}  // namespace uvrc::ad
