#pragma once

#include <cstdint>
#include <vector>

#include "uvrc/tensor.hpp"

namespace uvrc {

// Interleaved 8-bit RGB raster.
struct ImageU8 {
  std::vector<uint8_t> pix;  // h * w * 3, row-major, RGB interleaved
  int h = 0, w = 0;

  ImageU8() = default;
  ImageU8(int h_, int w_) : pix(size_t(h_) * w_ * 3, 0), h(h_), w(w_) {
    if (h_ < 1 || w_ < 1) throw InvalidArgument("ImageU8: non-positive dims");
  }

  uint8_t& at(int y, int x, int ch) { return pix[(size_t(y) * w + x) * 3 + ch]; }
  uint8_t at(int y, int x, int ch) const { return pix[(size_t(y) * w + x) * 3 + ch]; }
};

// Planar 3-channel image with values in [0, 1].
struct ImageF {
  Tensor data;  // c == 3

  ImageF() = default;
  ImageF(int h, int w) : data(3, h, w) {}
  explicit ImageF(Tensor t);  // validates c == 3

  int h() const { return data.h; }
  int w() const { return data.w; }
};

struct Extent {
  int h = 0, w = 0;
  bool operator==(const Extent&) const = default;
};

ImageF to_imagef(const ImageU8& x);                       // /255
ImageU8 to_u8(const ImageF& x);                           // round half away, clamp
ImageF scale_image(const ImageF& x, double s);            // clamped to [0,1]
ImageU8 rescale_to_u8(const ImageF& x, double inv_gain);  // clamp(round(255 * x * inv_gain))

// Edge-replication pad so both dims become the smallest multiples of
// `stride` that are >= the input dims. Returns the original extent so the
// operation can be undone exactly with unpad().
std::pair<ImageF, Extent> pad_to_stride(const ImageF& x, int stride);

// Top-left crop back to `orig`. Rejects extents larger than the input.
ImageF unpad(const ImageF& x, Extent orig);

inline int round_up(int n, int multiple) {
  return ((n + multiple - 1) / multiple) * multiple;
}

// Round half away from zero, as used for all latent quantization.
inline double round_half_away(double x) {
  return x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5);
}

}  // namespace uvrc
