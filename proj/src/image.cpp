#include "uvrc/image.hpp"

#include <algorithm>
#include <utility>

namespace uvrc {

ImageF::ImageF(Tensor t) : data(std::move(t)) {
  if (data.c != 3) throw InvalidArgument("ImageF: expected 3 channels");
}

ImageF to_imagef(const ImageU8& x) {
  ImageF out(x.h, x.w);
  for (int ch = 0; ch < 3; ++ch) {
    double* p = out.data.plane(ch);
    for (int y = 0; y < x.h; ++y)
      for (int xx = 0; xx < x.w; ++xx) p[y * x.w + xx] = x.at(y, xx, ch) / 255.0;
  }
  return out;
}

ImageU8 to_u8(const ImageF& x) { return rescale_to_u8(x, 1.0); }

ImageU8 rescale_to_u8(const ImageF& x, double inv_gain) {
  ImageU8 out(x.h(), x.w());
  for (int ch = 0; ch < 3; ++ch) {
    const double* p = x.data.plane(ch);
    for (int y = 0; y < x.h(); ++y)
      for (int xx = 0; xx < x.w(); ++xx) {
        double v = round_half_away(255.0 * p[y * x.w() + xx] * inv_gain);
        out.at(y, xx, ch) = uint8_t(std::clamp(v, 0.0, 255.0));
      }
  }
  return out;
}

ImageF scale_image(const ImageF& x, double s) {
  ImageF out = x;
  for (double& v : out.data.v) v = std::clamp(v * s, 0.0, 1.0);
  return out;
}

std::pair<ImageF, Extent> pad_to_stride(const ImageF& x, int stride) {
  if (stride < 1) throw InvalidArgument("pad_to_stride: stride must be >= 1");
  Extent orig{x.h(), x.w()};
  int ph = round_up(x.h(), stride), pw = round_up(x.w(), stride);
  if (ph == x.h() && pw == x.w()) return {x, orig};
  ImageF out(ph, pw);
  for (int ch = 0; ch < 3; ++ch) {
    const double* src = x.data.plane(ch);
    double* dst = out.data.plane(ch);
    for (int y = 0; y < ph; ++y) {
      int sy = std::min(y, x.h() - 1);
      for (int xx = 0; xx < pw; ++xx) {
        int sx = std::min(xx, x.w() - 1);
        dst[y * pw + xx] = src[sy * x.w() + sx];
      }
    }
  }
  return {out, orig};
}

ImageF unpad(const ImageF& x, Extent orig) {
  if (orig.h > x.h() || orig.w > x.w() || orig.h < 1 || orig.w < 1)
    throw InvalidArgument("unpad: requested extent exceeds input");
  if (orig.h == x.h() && orig.w == x.w()) return x;
  ImageF out(orig.h, orig.w);
  for (int ch = 0; ch < 3; ++ch) {
    const double* src = x.data.plane(ch);
    double* dst = out.data.plane(ch);
    for (int y = 0; y < orig.h; ++y)
      std::copy_n(src + size_t(y) * x.w(), orig.w, dst + size_t(y) * orig.w);
  }
  return out;
}

}  // namespace uvrc
