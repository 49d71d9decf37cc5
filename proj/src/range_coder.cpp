#include "uvrc/range_coder.hpp"

#include <zlib.h>

#include <limits>

namespace uvrc {

namespace {

constexpr uint64_t kTop = 1ull << 56;
constexpr uint64_t kBot = 1ull << 32;

uint32_t crc32_of(std::span<const uint8_t> bytes) {
  return uint32_t(::crc32(0L, bytes.data(), uInt(bytes.size())));
}

// Shared uniform byte table for escape payloads.
const QuantizedCDF& byte_table() {
  static const QuantizedCDF t = [] {
    std::vector<double> pmf(256, 1.0 / 256.0);
    return build_cdf_table(pmf, 0);
  }();
  return t;
}

}  // namespace

void RangeEncoder::encode(uint32_t cum, uint32_t freq, uint32_t total) {
  range_ /= total;
  low_ += cum * range_;
  range_ *= freq;
  while (true) {
    if ((low_ ^ (low_ + range_)) >= kTop) {
      if (range_ >= kBot) break;
      range_ = (0 - low_) & (kBot - 1);
    }
    out_.push_back(uint8_t(low_ >> 56));
    low_ <<= 8;
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 8; ++i) {
    out_.push_back(uint8_t(low_ >> 56));
    low_ <<= 8;
  }
  uint32_t crc = crc32_of(out_);
  for (int i = 0; i < 4; ++i) out_.push_back(uint8_t(crc >> (8 * i)));
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> payload) : bytes_(payload) {
  if (payload.size() < 12) throw CorruptStream("payload truncated: shorter than coder tail");
  limit_ = payload.size() - 4;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= uint32_t(payload[limit_ + i]) << (8 * i);
  uint32_t actual = crc32_of(payload.subspan(0, limit_));
  if (stored != actual) throw CorruptStream("payload checksum mismatch");
  for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  // Reads past the coder bytes yield zeros; the flush guarantees the
  // decoder never needs them to resolve a symbol.
  return pos_ < limit_ ? bytes_[pos_++] : 0;
}

uint32_t RangeDecoder::decode_freq(uint32_t total) {
  range_ /= total;
  uint64_t v = (code_ - low_) / range_;
  return uint32_t(v < total ? v : total - 1);
}

void RangeDecoder::decode_update(uint32_t cum, uint32_t freq) {
  low_ += cum * range_;
  range_ *= freq;
  while (true) {
    if ((low_ ^ (low_ + range_)) >= kTop) {
      if (range_ >= kBot) break;
      range_ = (0 - low_) & (kBot - 1);
    }
    code_ = (code_ << 8) | next_byte();
    low_ <<= 8;
    range_ <<= 8;
  }
}

namespace {

void encode_one(RangeEncoder& enc, int32_t sym, const QuantizedCDF& t) {
  if (t.in_support(sym)) {
    int idx = t.index_of(sym);
    enc.encode(t.cum_at(idx), t.freq(idx), QuantizedCDF::kTotal);
    return;
  }
  if (!t.has_escape)
    throw InvalidArgument("range_encode: symbol outside table support and escapes disabled");
  int esc = t.escape_index();
  enc.encode(t.cum_at(esc), t.freq(esc), QuantizedCDF::kTotal);
  const QuantizedCDF& bt = byte_table();
  uint32_t raw = uint32_t(sym);
  for (int i = 0; i < 4; ++i) {
    int b = int((raw >> (8 * i)) & 0xff);
    enc.encode(bt.cum_at(b), bt.freq(b), QuantizedCDF::kTotal);
  }
}

int32_t decode_one(RangeDecoder& dec, const QuantizedCDF& t) {
  uint32_t scaled = dec.decode_freq(QuantizedCDF::kTotal);
  int idx = t.find(scaled);
  dec.decode_update(t.cum_at(idx), t.freq(idx));
  if (t.has_escape && idx == t.escape_index()) {
    const QuantizedCDF& bt = byte_table();
    uint32_t raw = 0;
    for (int i = 0; i < 4; ++i) {
      uint32_t s = dec.decode_freq(QuantizedCDF::kTotal);
      int b = bt.find(s);
      dec.decode_update(bt.cum_at(b), bt.freq(b));
      raw |= uint32_t(b) << (8 * i);
    }
    return int32_t(raw);
  }
  return t.min_sym + idx;
}

}  // namespace

std::vector<uint8_t> range_encode(std::span<const int32_t> symbols,
                                  std::span<const QuantizedCDF* const> tables) {
  if (tables.size() != symbols.size())
    throw InvalidArgument("range_encode: one table required per symbol");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) encode_one(enc, symbols[i], *tables[i]);
  return enc.finish();
}

std::vector<uint8_t> range_encode(std::span<const int32_t> symbols, const QuantizedCDF& table) {
  RangeEncoder enc;
  for (int32_t s : symbols) encode_one(enc, s, table);
  return enc.finish();
}

std::vector<int32_t> range_decode(std::span<const uint8_t> payload,
                                  std::span<const QuantizedCDF* const> tables, size_t n) {
  if (tables.size() != n) throw InvalidArgument("range_decode: one table required per symbol");
  RangeDecoder dec(payload);
  std::vector<int32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = decode_one(dec, *tables[i]);
  return out;
}

std::vector<int32_t> range_decode(std::span<const uint8_t> payload, const QuantizedCDF& table,
                                  size_t n) {
  RangeDecoder dec(payload);
  std::vector<int32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = decode_one(dec, table);
  return out;
}

}  // namespace uvrc
