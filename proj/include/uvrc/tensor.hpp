#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "uvrc/errors.hpp"

namespace uvrc {

// Dense C x H x W tensor, channel-major (each channel plane contiguous).
// Scalars are represented as 1x1x1.
struct Tensor {
  std::vector<double> v;
  int c = 0, h = 0, w = 0;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : v(size_t(c_) * h_ * w_, 0.0), c(c_), h(h_), w(w_) {
    if (c_ < 1 || h_ < 1 || w_ < 1) throw InvalidArgument("Tensor: non-positive shape");
  }

  static Tensor scalar(double x) {
    Tensor t(1, 1, 1);
    t.v[0] = x;
    return t;
  }

  size_t size() const { return v.size(); }
  int plane_size() const { return h * w; }

  double* plane(int ch) { return v.data() + size_t(ch) * h * w; }
  const double* plane(int ch) const { return v.data() + size_t(ch) * h * w; }

  double& at(int ch, int y, int x) { return v[(size_t(ch) * h + y) * w + x]; }
  double at(int ch, int y, int x) const { return v[(size_t(ch) * h + y) * w + x]; }

  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

}  // namespace uvrc
