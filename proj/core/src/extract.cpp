#include "vqrng/extract.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "vqrng/error.hpp"

namespace vqrng::extract {
namespace {

constexpr std::size_t kNibbleValues = 16;

// Accumulate table rows for every input nibble; W output words.
template <std::size_t W>
void xor_kernel(const std::uint64_t* table, const std::uint8_t* in, std::size_t in_bytes, std::uint64_t* acc) {
  std::uint64_t local[W] = {};
  for (std::size_t b = 0; b < in_bytes; ++b) {
    const std::uint8_t byte = in[b];
    const std::uint64_t* hi = table + ((2 * b) * kNibbleValues + (byte >> 4)) * W;
    const std::uint64_t* lo = table + ((2 * b + 1) * kNibbleValues + (byte & 0x0f)) * W;
    for (std::size_t w = 0; w < W; ++w) local[w] ^= hi[w] ^ lo[w];
  }
  std::memcpy(acc, local, sizeof(local));
}

void xor_kernel_dynamic(const std::uint64_t* table, const std::uint8_t* in, std::size_t in_bytes,
                        std::size_t words, std::uint64_t* acc) {
  std::fill(acc, acc + words, 0);
  for (std::size_t b = 0; b < in_bytes; ++b) {
    const std::uint8_t byte = in[b];
    const std::uint64_t* hi = table + ((2 * b) * kNibbleValues + (byte >> 4)) * words;
    const std::uint64_t* lo = table + ((2 * b + 1) * kNibbleValues + (byte & 0x0f)) * words;
    for (std::size_t w = 0; w < words; ++w) acc[w] ^= hi[w] ^ lo[w];
  }
}

void check_params(const ToeplitzSeed& seed, const entropy::ExtractorParams& p) {
  if (p.k != seed.input_bits() || p.l != seed.output_bits()) {
    throw LengthError("extractor params (k=" + std::to_string(p.k) + ", l=" + std::to_string(p.l) +
                      ") do not match the seed (k=" + std::to_string(seed.input_bits()) +
                      ", l=" + std::to_string(seed.output_bits()) + ")");
  }
  if (p.k % 8 != 0 || p.l % 8 != 0) throw LengthError("k and l must be multiples of 8 for streaming");
  if (p.n_bits < 1 || p.n_bits > 16) throw DomainError("sample resolution must lie in [1, 16]");
  if (p.k % p.n_bits != 0) {
    throw LengthError("k = " + std::to_string(p.k) + " is not divisible by n = " + std::to_string(p.n_bits));
  }
}

const ToeplitzSeed& checked(const ToeplitzSeed& seed, const entropy::ExtractorParams& params) {
  check_params(seed, params);
  return seed;
}

}  // namespace

BitBlock BitBlock::from_bits(std::span<const std::uint8_t> bits) {
  BitBlock block(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw DomainError("bit values must be 0 or 1");
    if (bits[i]) block.set(i, true);
  }
  return block;
}

BitBlock BitBlock::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  BitBlock block(bit_count);
  if (bytes.size() < block.bytes_.size()) {
    throw LengthError("need " + std::to_string(block.bytes_.size()) + " bytes for " + std::to_string(bit_count) +
                      " bits, got " + std::to_string(bytes.size()));
  }
  std::copy_n(bytes.begin(), block.bytes_.size(), block.bytes_.begin());
  if (const auto tail = bit_count & 7; tail != 0) {
    block.bytes_.back() &= static_cast<std::uint8_t>(0xff00u >> tail);
  }
  return block;
}

void BitBlock::set(std::size_t i, bool value) {
  const auto mask = static_cast<std::uint8_t>(0x80u >> (i & 7));
  if (value) {
    bytes_[i >> 3] |= mask;
  } else {
    bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }
}

std::size_t BitBlock::count_ones() const {
  std::size_t n = 0;
  for (auto b : bytes_) n += static_cast<std::size_t>(std::popcount(b));
  return n;
}

BitBlock& BitBlock::operator^=(const BitBlock& other) {
  if (other.bits_ != bits_) throw LengthError("xor of bit blocks with different lengths");
  for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= other.bytes_[i];
  return *this;
}

ToeplitzSeed::ToeplitzSeed(int input_bits, int output_bits, BitBlock bits)
    : k_(input_bits), l_(output_bits), bits_(std::move(bits)) {
  if (k_ < 1 || l_ < 1) throw LengthError("Toeplitz dimensions must be positive");
  const auto expected = static_cast<std::size_t>(k_) + static_cast<std::size_t>(l_) - 1;
  if (bits_.size() != expected) {
    throw LengthError("Toeplitz seed needs k + l - 1 = " + std::to_string(expected) + " bits, got " +
                      std::to_string(bits_.size()));
  }
}

ToeplitzSeed ToeplitzSeed::from_column_and_row(const BitBlock& first_column, const BitBlock& first_row) {
  if (first_column.size() == 0 || first_row.size() == 0) throw LengthError("empty Toeplitz row or column");
  if (first_column.bit(0) != first_row.bit(0)) throw LengthError("first row and column disagree at (0, 0)");
  const std::size_t l = first_column.size();
  const std::size_t k = first_row.size();
  BitBlock bits(k + l - 1);
  for (std::size_t i = 1; i < l; ++i) bits.set(l - 1 - i, first_column.bit(i));
  for (std::size_t j = 0; j < k; ++j) bits.set(l - 1 + j, first_row.bit(j));
  return {static_cast<int>(k), static_cast<int>(l), std::move(bits)};
}

ToeplitzExtractor::ToeplitzExtractor(const ToeplitzSeed& seed)
    : k_(seed.input_bits()),
      l_(seed.output_bits()),
      in_bytes_((static_cast<std::size_t>(k_) + 7) / 8),
      out_bytes_((static_cast<std::size_t>(l_) + 7) / 8),
      out_words_((static_cast<std::size_t>(l_) + 63) / 64) {
  const std::size_t nibbles = 2 * in_bytes_;
  table_.assign(nibbles * kNibbleValues * out_words_, 0);

  // columns[b] is column 4p + b of T, packed MSB-first over the l output rows.
  std::vector<std::uint64_t> columns(4 * out_words_);
  for (std::size_t p = 0; p < nibbles; ++p) {
    std::fill(columns.begin(), columns.end(), 0);
    for (int b = 0; b < 4; ++b) {
      const auto j = static_cast<int>(4 * p) + b;
      if (j >= k_) break;
      for (int i = 0; i < l_; ++i) {
        if (seed.entry(i, j)) {
          columns[static_cast<std::size_t>(b) * out_words_ + static_cast<std::size_t>(i) / 64] |= 1ull << (63 - i % 64);
        }
      }
    }
    // Nibble value bit t (LSB = 0) corresponds to input bit b = 3 - t.
    std::uint64_t* group = table_.data() + p * kNibbleValues * out_words_;
    for (std::size_t v = 1; v < kNibbleValues; ++v) {
      const auto t = static_cast<std::size_t>(std::countr_zero(v));
      const std::uint64_t* rest = group + (v & (v - 1)) * out_words_;
      const std::uint64_t* col = columns.data() + (3 - t) * out_words_;
      for (std::size_t w = 0; w < out_words_; ++w) group[v * out_words_ + w] = rest[w] ^ col[w];
    }
  }
}

void ToeplitzExtractor::extract(std::span<const std::uint8_t> input, std::span<std::uint8_t> output) const {
  if (input.size() != in_bytes_ || output.size() != out_bytes_) throw LengthError("Toeplitz block size mismatch");
  std::uint64_t acc[8];
  std::vector<std::uint64_t> wide;
  std::uint64_t* words = acc;
  switch (out_words_) {
    case 1: xor_kernel<1>(table_.data(), input.data(), in_bytes_, acc); break;
    case 2: xor_kernel<2>(table_.data(), input.data(), in_bytes_, acc); break;
    case 4: xor_kernel<4>(table_.data(), input.data(), in_bytes_, acc); break;
    case 8: xor_kernel<8>(table_.data(), input.data(), in_bytes_, acc); break;
    default:
      wide.resize(out_words_);
      words = wide.data();
      xor_kernel_dynamic(table_.data(), input.data(), in_bytes_, out_words_, words);
  }
  for (std::size_t i = 0; i < out_bytes_; ++i) {
    output[i] = static_cast<std::uint8_t>(words[i / 8] >> (56 - 8 * (i % 8)));
  }
}

BitBlock ToeplitzExtractor::extract(const BitBlock& input) const {
  if (input.size() != static_cast<std::size_t>(k_)) {
    throw LengthError("input block has " + std::to_string(input.size()) + " bits, extractor expects k = " +
                      std::to_string(k_));
  }
  std::vector<std::uint8_t> out(out_bytes_);
  extract(input.bytes(), out);
  return BitBlock::from_bytes(out, static_cast<std::size_t>(l_));
}

BitBlock extract_block(const ToeplitzSeed& seed, const BitBlock& input) {
  return ToeplitzExtractor(seed).extract(input);
}

StreamExtractor::StreamExtractor(const ToeplitzSeed& seed, const entropy::ExtractorParams& params)
    : engine_(checked(seed, params)),
      n_bits_(params.n_bits),
      samples_per_block_(static_cast<std::size_t>(params.k / params.n_bits)),
      block_(engine_.input_bytes(), 0) {}

void StreamExtractor::push(std::span<const std::uint16_t> codes, std::vector<std::uint8_t>& sink) {
  const auto limit = static_cast<std::uint32_t>((1u << n_bits_) - 1u);
  if (n_bits_ == 8) {
    for (auto code : codes) {
      if (code > limit) throw DomainError("ADC code " + std::to_string(code) + " exceeds 8 bits");
      block_[pending_] = static_cast<std::uint8_t>(code);
      if (++pending_ == samples_per_block_) flush_block(sink);
    }
    return;
  }
  for (auto code : codes) {
    if (code > limit) throw DomainError("ADC code " + std::to_string(code) + " exceeds n bits");
    const std::size_t first = pending_ * static_cast<std::size_t>(n_bits_);
    for (int b = 0; b < n_bits_; ++b) {
      if ((code >> (n_bits_ - 1 - b)) & 1u) {
        const std::size_t pos = first + static_cast<std::size_t>(b);
        block_[pos >> 3] |= static_cast<std::uint8_t>(0x80u >> (pos & 7));
      }
    }
    if (++pending_ == samples_per_block_) flush_block(sink);
  }
}

void StreamExtractor::flush_block(std::vector<std::uint8_t>& sink) {
  const std::size_t offset = sink.size();
  sink.resize(offset + engine_.output_bytes());
  engine_.extract(block_, std::span<std::uint8_t>(sink).subspan(offset));
  if (n_bits_ != 8) std::fill(block_.begin(), block_.end(), 0);
  pending_ = 0;
  ++blocks_;
}

StreamOutput extract_stream(const ToeplitzSeed& seed, std::span<const std::uint16_t> codes,
                            const entropy::ExtractorParams& params) {
  StreamExtractor stream(seed, params);
  StreamOutput out;
  out.bytes.reserve(codes.size() / stream.samples_per_block() * static_cast<std::size_t>(params.l / 8));
  stream.push(codes, out.bytes);
  out.blocks = stream.blocks();
  out.bit_count = out.blocks * static_cast<std::size_t>(params.l);
  out.discarded_samples = stream.pending_samples();
  if (out.blocks == 0) {
    out.warning = "stream of " + std::to_string(codes.size()) + " samples is shorter than one block (" +
                  std::to_string(stream.samples_per_block()) + " samples); no output produced";
  }
  return out;
}

ToeplitzSeed seed_from_entropy(std::span<const std::uint8_t> material, int k, int l) {
  if (k < 1 || l < 1) throw LengthError("Toeplitz dimensions must be positive");
  const std::size_t bits = static_cast<std::size_t>(k) + static_cast<std::size_t>(l) - 1;
  if (material.size() < (bits + 7) / 8) {
    throw LengthError("seed material has " + std::to_string(material.size()) + " bytes, need " +
                      std::to_string((bits + 7) / 8));
  }
  return {k, l, BitBlock::from_bytes(material, bits)};
}

std::size_t expected_output_bits(std::size_t samples, int n_bits, int k, int l) {
  return samples * static_cast<std::size_t>(n_bits) / static_cast<std::size_t>(k) * static_cast<std::size_t>(l);
}

}  // namespace vqrng::extract
