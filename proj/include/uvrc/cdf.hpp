#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvrc/errors.hpp"

namespace uvrc {

// Integer cumulative-frequency table over a contiguous symbol support
// [min_sym, max_sym]. Frequencies always total exactly 2^16 and every
// in-support symbol gets a frequency of at least 1, so encode/decode are
// total on the support. With `has_escape`, one extra slot follows the
// support; out-of-range symbols are coded as the escape followed by the
// raw 32-bit value.
struct QuantizedCDF {
  static constexpr uint32_t kTotal = 1u << 16;

  int min_sym = 0;
  int max_sym = -1;
  bool has_escape = false;
  std::vector<uint32_t> cum;  // size = slots() + 1, cum[0] = 0, cum.back() = kTotal

  int support_count() const { return max_sym - min_sym + 1; }
  int slots() const { return support_count() + (has_escape ? 1 : 0); }
  int escape_index() const { return support_count(); }

  bool in_support(int sym) const { return sym >= min_sym && sym <= max_sym; }
  int index_of(int sym) const { return sym - min_sym; }

  uint32_t freq(int index) const { return cum[index + 1] - cum[index]; }
  uint32_t cum_at(int index) const { return cum[index]; }

  // Largest index with cum[index] <= scaled < cum[index+1].
  int find(uint32_t scaled) const;
};

// Quantize a PMF over [min_sym, min_sym + pmf.size()) to a 16-bit table.
// Every slot receives frequency >= 1, and the total is renormalized to
// exactly 2^16 by adjusting the largest entries. With escape = true an
// extra escape slot is appended with a minimal frequency.
QuantizedCDF build_cdf_table(std::span<const double> pmf, int min_sym, bool escape = false);

}  // namespace uvrc
