// Convolution, transposed convolution, per-channel dense stacks and
// windowed attention, all backed by im2col + Eigen GEMM.

#include <Eigen/Core>
#include <memory>

#include "uvrc/autodiff.hpp"

namespace uvrc::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;
using RowMap = Eigen::Map<RowMat>;
using CRowMap = Eigen::Map<const RowMat>;

// Gather receptive fields of `big` for a conv with geometry (k, s, p) whose
// output grid is ho x wo. Column n = oy*wo+ox, row r = (ci*k+ky)*k+kx.
ColMat im2col(const Tensor& big, int k, int s, int p, int ho, int wo) {
  ColMat col(big.c * k * k, ho * wo);
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      double* dst = col.col(oy * wo + ox).data();
      for (int ci = 0; ci < big.c; ++ci) {
        const double* plane = big.plane(ci);
        for (int ky = 0; ky < k; ++ky) {
          int iy = oy * s + ky - p;
          for (int kx = 0; kx < k; ++kx) {
            int ix = ox * s + kx - p;
            *dst++ = (iy >= 0 && iy < big.h && ix >= 0 && ix < big.w)
                         ? plane[size_t(iy) * big.w + ix]
                         : 0.0;
          }
        }
      }
    }
  return col;
}

// Transpose of im2col: scatter-add columns back into `big`.
void col2im_add(const ColMat& col, Tensor& big, int k, int s, int p, int ho, int wo) {
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      const double* src = col.col(oy * wo + ox).data();
      for (int ci = 0; ci < big.c; ++ci) {
        double* plane = big.plane(ci);
        for (int ky = 0; ky < k; ++ky) {
          int iy = oy * s + ky - p;
          for (int kx = 0; kx < k; ++kx) {
            int ix = ox * s + kx - p;
            if (iy >= 0 && iy < big.h && ix >= 0 && ix < big.w)
              plane[size_t(iy) * big.w + ix] += *src;
            ++src;
          }
        }
      }
    }
}

}  // namespace

int conv2d(Graph& g, int x, int w, int b, int k, int stride) {
  const Tensor& xv = g.val(x);
  const Tensor& wv = g.val(w);
  const Tensor& bv = g.val(b);
  const int pad = k / 2;
  if (wv.h != xv.c || wv.w != k * k) throw InvalidArgument("conv2d: weight shape mismatch");
  if (bv.c != wv.c || bv.h != 1 || bv.w != 1) throw InvalidArgument("conv2d: bias shape mismatch");
  const int cout = wv.c;
  const int ho = (xv.h + 2 * pad - k) / stride + 1;
  const int wo = (xv.w + 2 * pad - k) / stride + 1;
  if (ho < 1 || wo < 1) throw InvalidArgument("conv2d: input too small");

  auto col = std::make_shared<ColMat>(im2col(xv, k, stride, pad, ho, wo));
  Tensor out(cout, ho, wo);
  {
    CRowMap wm(wv.v.data(), cout, wv.h * wv.w);
    RowMap om(out.v.data(), cout, ho * wo);
    om.noalias() = wm * (*col);
    for (int c = 0; c < cout; ++c) om.row(c).array() += bv.v[size_t(c)];
  }
  bool ng = g.needs_grad(x) || g.needs_grad(w) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& wvv = gg.val(w);
    CRowMap dy(go.v.data(), wvv.c, size_t(go.h) * go.w);
    if (gg.needs_grad(w)) {
      Tensor& gw = gg.grad(w);
      RowMap dw(gw.v.data(), wvv.c, wvv.h * wvv.w);
      dw.noalias() += dy * col->transpose();
    }
    if (gg.needs_grad(b)) {
      Tensor& gb = gg.grad(b);
      for (int c = 0; c < wvv.c; ++c) gb.v[size_t(c)] += dy.row(c).sum();
    }
    if (gg.needs_grad(x)) {
      CRowMap wm(wvv.v.data(), wvv.c, wvv.h * wvv.w);
      ColMat dcol = wm.transpose() * dy;
      col2im_add(dcol, gg.grad(x), k, stride, pad, go.h, go.w);
    }
  });
}

int deconv2d(Graph& g, int x, int w, int b) {
  constexpr int k = 4, stride = 2, pad = 1;
  const Tensor& xv = g.val(x);
  const Tensor& wv = g.val(w);
  const Tensor& bv = g.val(b);
  if (wv.c != xv.c || wv.w != k * k) throw InvalidArgument("deconv2d: weight shape mismatch");
  const int cout = wv.h;
  if (bv.c != cout || bv.h != 1 || bv.w != 1) throw InvalidArgument("deconv2d: bias shape mismatch");
  const int ho = 2 * xv.h, wo = 2 * xv.w;

  Tensor out(cout, ho, wo);
  {
    CRowMap wm(wv.v.data(), xv.c, size_t(cout) * k * k);
    CRowMap xm(xv.v.data(), xv.c, size_t(xv.h) * xv.w);
    ColMat col = wm.transpose() * xm;
    col2im_add(col, out, k, stride, pad, xv.h, xv.w);
    RowMap om(out.v.data(), cout, size_t(ho) * wo);
    for (int c = 0; c < cout; ++c) om.row(c).array() += bv.v[size_t(c)];
  }
  bool ng = g.needs_grad(x) || g.needs_grad(w) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& xvv = gg.val(x);
    const Tensor& wvv = gg.val(w);
    ColMat dcol = im2col(go, k, stride, pad, xvv.h, xvv.w);
    if (gg.needs_grad(x)) {
      Tensor& gx = gg.grad(x);
      CRowMap wm(wvv.v.data(), xvv.c, size_t(wvv.h) * k * k);
      RowMap dx(gx.v.data(), xvv.c, size_t(xvv.h) * xvv.w);
      dx.noalias() += wm * dcol;
    }
    if (gg.needs_grad(w)) {
      Tensor& gw = gg.grad(w);
      CRowMap xm(xvv.v.data(), xvv.c, size_t(xvv.h) * xvv.w);
      RowMap dw(gw.v.data(), xvv.c, size_t(wvv.h) * k * k);
      dw.noalias() += xm * dcol.transpose();
    }
    if (gg.needs_grad(b)) {
      Tensor& gb = gg.grad(b);
      CRowMap dy(go.v.data(), go.c, size_t(go.h) * go.w);
      for (int c = 0; c < go.c; ++c) gb.v[size_t(c)] += dy.row(c).sum();
    }
  });
}

int channel_dense(Graph& g, int x, int w, int b) {
  const Tensor& xv = g.val(x);
  const Tensor& wv = g.val(w);
  const Tensor& bv = g.val(b);
  if (wv.c != xv.c || wv.w != xv.h) throw InvalidArgument("channel_dense: weight shape mismatch");
  if (bv.c != xv.c || bv.h != wv.h || bv.w != 1)
    throw InvalidArgument("channel_dense: bias shape mismatch");
  const int C = xv.c, O = wv.h, I = xv.h, N = xv.w;
  Tensor out(C, O, N);
  for (int c = 0; c < C; ++c) {
    CRowMap wm(wv.plane(c), O, I);
    CRowMap xm(xv.plane(c), I, N);
    RowMap om(out.plane(c), O, N);
    om.noalias() = wm * xm;
    for (int o = 0; o < O; ++o) om.row(o).array() += bv.plane(c)[o];
  }
  bool ng = g.needs_grad(x) || g.needs_grad(w) || g.needs_grad(b);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& xvv = gg.val(x);
    const Tensor& wvv = gg.val(w);
    const int Cc = xvv.c, Oo = wvv.h, Ii = xvv.h, Nn = xvv.w;
    for (int c = 0; c < Cc; ++c) {
      CRowMap dy(go.plane(c), Oo, Nn);
      if (gg.needs_grad(w)) {
        RowMap dw(gg.grad(w).plane(c), Oo, Ii);
        CRowMap xm(xvv.plane(c), Ii, Nn);
        dw.noalias() += dy * xm.transpose();
      }
      if (gg.needs_grad(b)) {
        double* db = gg.grad(b).plane(c);
        for (int o = 0; o < Oo; ++o) db[o] += dy.row(o).sum();
      }
      if (gg.needs_grad(x)) {
        CRowMap wm(wvv.plane(c), Oo, Ii);
        RowMap dx(gg.grad(x).plane(c), Ii, Nn);
        dx.noalias() += wm.transpose() * dy;
      }
    }
  });
}

namespace {

struct AttnPieces {
  ColMat X, Q, K, V, P, O;
};

// Gather a window into a T x C token matrix and run the attention forward.
AttnPieces attn_forward(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                        int win, int y0, int x0) {
  const int C = x.c, T = win * win;
  AttnPieces a;
  a.X.resize(T, C);
  for (int wy = 0; wy < win; ++wy)
    for (int wx = 0; wx < win; ++wx)
      for (int c = 0; c < C; ++c) a.X(wy * win + wx, c) = x.at(c, y0 + wy, x0 + wx);
  CRowMap qm(wq.v.data(), C, C), km(wk.v.data(), C, C), vm(wv.v.data(), C, C);
  a.Q.noalias() = a.X * qm.transpose();
  a.K.noalias() = a.X * km.transpose();
  a.V.noalias() = a.X * vm.transpose();
  ColMat A = a.Q * a.K.transpose() / std::sqrt(double(C));
  a.P.resize(T, T);
  for (int t = 0; t < T; ++t) {
    double mx = A.row(t).maxCoeff();
    double denom = 0;
    for (int u = 0; u < T; ++u) denom += std::exp(A(t, u) - mx);
    for (int u = 0; u < T; ++u) a.P(t, u) = std::exp(A(t, u) - mx) / denom;
  }
  a.O.noalias() = a.P * a.V;
  return a;
}

}  // namespace

int win_attention(Graph& g, int x, int wq, int wk, int wv, int wo) {
  const Tensor& xv = g.val(x);
  const int C = xv.c;
  for (int pid : {wq, wk, wv, wo}) {
    const Tensor& p = g.val(pid);
    if (p.c != C || p.h != C || p.w != 1)
      throw InvalidArgument("win_attention: projection shape mismatch");
  }
  const int win = attention_window(xv.h, xv.w);
  Tensor out = xv;  // residual base
  {
    CRowMap om(g.val(wo).v.data(), C, C);
    for (int y0 = 0; y0 < xv.h; y0 += win)
      for (int x0 = 0; x0 < xv.w; x0 += win) {
        AttnPieces a = attn_forward(xv, g.val(wq), g.val(wk), g.val(wv), win, y0, x0);
        ColMat Y = a.O * om.transpose();
        for (int wy = 0; wy < win; ++wy)
          for (int wx = 0; wx < win; ++wx)
            for (int c = 0; c < C; ++c) out.at(c, y0 + wy, x0 + wx) += Y(wy * win + wx, c);
      }
  }
  bool ng = g.needs_grad(x) || g.needs_grad(wq) || g.needs_grad(wk) || g.needs_grad(wv) ||
            g.needs_grad(wo);
  int self = int(g.size());
  return g.emit(std::move(out), ng, [=](Graph& gg) {
    const Tensor& go = gg.grad(self);
    const Tensor& xvv = gg.val(x);
    const int Cc = xvv.c, T = win * win;
    const double alpha = 1.0 / std::sqrt(double(Cc));
    CRowMap qm(gg.val(wq).v.data(), Cc, Cc), km(gg.val(wk).v.data(), Cc, Cc),
        vm(gg.val(wv).v.data(), Cc, Cc), om(gg.val(wo).v.data(), Cc, Cc);
    for (int y0 = 0; y0 < xvv.h; y0 += win)
      for (int x0 = 0; x0 < xvv.w; x0 += win) {
        AttnPieces a = attn_forward(xvv, gg.val(wq), gg.val(wk), gg.val(wv), win, y0, x0);
        ColMat dY(T, Cc);
        for (int wy = 0; wy < win; ++wy)
          for (int wx = 0; wx < win; ++wx)
            for (int c = 0; c < Cc; ++c) dY(wy * win + wx, c) = go.at(c, y0 + wy, x0 + wx);
        ColMat dO = dY * om;
        ColMat dP = dO * a.V.transpose();
        ColMat dV = a.P.transpose() * dO;
        ColMat dA(T, T);
        for (int t = 0; t < T; ++t) {
          double dot = 0;
          for (int u = 0; u < T; ++u) dot += dP(t, u) * a.P(t, u);
          for (int u = 0; u < T; ++u) dA(t, u) = a.P(t, u) * (dP(t, u) - dot);
        }
        ColMat dQ = alpha * (dA * a.K);
        ColMat dK = alpha * (dA.transpose() * a.Q);
        if (gg.needs_grad(wq)) RowMap(gg.grad(wq).v.data(), Cc, Cc).noalias() += dQ.transpose() * a.X;
        if (gg.needs_grad(wk)) RowMap(gg.grad(wk).v.data(), Cc, Cc).noalias() += dK.transpose() * a.X;
        if (gg.needs_grad(wv)) RowMap(gg.grad(wv).v.data(), Cc, Cc).noalias() += dV.transpose() * a.X;
        if (gg.needs_grad(wo)) RowMap(gg.grad(wo).v.data(), Cc, Cc).noalias() += dY.transpose() * a.O;
        if (gg.needs_grad(x)) {
          ColMat dX = dQ * qm + dK * km + dV * vm;
          Tensor& gx = gg.grad(x);
          for (int wy = 0; wy < win; ++wy)
            for (int wx = 0; wx < win; ++wx)
              for (int c = 0; c < Cc; ++c) {
                // attention path plus the residual connection
                gx.at(c, y0 + wy, x0 + wx) += dX(wy * win + wx, c) + go.at(c, y0 + wy, x0 + wx);
              }
        }
      }
  });
}

}  // namespace uvrc::ad
