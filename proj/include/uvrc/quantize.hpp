#pragma once

#include "uvrc/image.hpp"
#include "uvrc/rng.hpp"
#include "uvrc/tensor.hpp"

namespace uvrc {

enum class QuantizerMode { noise, round, mean_shift_round };

// Training-time relaxation: t + u with u ~ Uniform[-0.5, 0.5) i.i.d.,
// fully determined by the seed.
inline Tensor quantize_noise(const Tensor& t, uint64_t seed) {
  Tensor out = t;
  Rng rng(seed);
  for (double& v : out.v) v += rng.next_unit() - 0.5;
  return out;
}

// Element-wise round half away from zero.
inline Tensor quantize_round(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.v) v = round_half_away(v);
  return out;
}

// round(y - mu) + mu. The transmitted integer symbols are round(y - mu).
inline Tensor quantize_mean_shift(const Tensor& y, const Tensor& mu) {
  if (!y.same_shape(mu)) throw InvalidArgument("quantize_mean_shift: shape mismatch");
  Tensor out = y;
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = round_half_away(y.v[i] - mu.v[i]) + mu.v[i];
  return out;
}

}  // namespace uvrc
