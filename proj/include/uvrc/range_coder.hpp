#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvrc/cdf.hpp"

namespace uvrc {

// Carry-less range coder (Subbotin style) with 64-bit state, emitting the
// most significant byte of `low` on renormalization. Frequencies use the
// fixed 16-bit total of QuantizedCDF. The payload wire format is
//
//   [coder bytes][crc32 of coder bytes, u32 little-endian]
//
// and is documented in docs/FORMATS.md. The CRC tail is what turns random
// single-byte corruption into a detectable error instead of silently
// decoding garbage.
class RangeEncoder {
 public:
  void encode(uint32_t cum, uint32_t freq, uint32_t total);
  // Flushes the state and appends the CRC tail; the encoder is spent.
  std::vector<uint8_t> finish();

 private:
  uint64_t low_ = 0;
  uint64_t range_ = ~0ull;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  // Validates the CRC tail up front; throws CorruptStream on mismatch or
  // if the payload is too short to contain the coder flush.
  explicit RangeDecoder(std::span<const uint8_t> payload);

  uint32_t decode_freq(uint32_t total);
  void decode_update(uint32_t cum, uint32_t freq);

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  size_t limit_ = 0;  // coder bytes only (excludes CRC tail)
  uint64_t low_ = 0;
  uint64_t range_ = ~0ull;
  uint64_t code_ = 0;
};

// Encode `symbols` where symbol i uses table *tables[i]. Symbols outside a
// table's support require has_escape and are coded as escape + raw value.
std::vector<uint8_t> range_encode(std::span<const int32_t> symbols,
                                  std::span<const QuantizedCDF* const> tables);
std::vector<uint8_t> range_encode(std::span<const int32_t> symbols, const QuantizedCDF& table);

std::vector<int32_t> range_decode(std::span<const uint8_t> payload,
                                  std::span<const QuantizedCDF* const> tables, size_t n);
std::vector<int32_t> range_decode(std::span<const uint8_t> payload, const QuantizedCDF& table,
                                  size_t n);

}  // namespace uvrc
