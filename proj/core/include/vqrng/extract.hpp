#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqrng/entropy.hpp"

namespace vqrng::extract {

/// Fixed-length bit string packed 8 per byte, most significant bit first.
/// Padding bits in the final byte are always zero.
class BitBlock {
 public:
  BitBlock() = default;
  explicit BitBlock(std::size_t bit_count) : bytes_((bit_count + 7) / 8, 0), bits_(bit_count) {}

  /// One element per bit, each 0 or 1.
  static BitBlock from_bits(std::span<const std::uint8_t> bits);
  /// Takes the first `bit_count` bits of `bytes`; throws LengthError if short.
  static BitBlock from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count);

  std::size_t size() const { return bits_; }
  bool bit(std::size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u; }
  void set(std::size_t i, bool value);
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::size_t count_ones() const;

  BitBlock& operator^=(const BitBlock& other);
  friend BitBlock operator^(BitBlock a, const BitBlock& b) { return a ^= b; }
  bool operator==(const BitBlock&) const = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

/// k + l - 1 bits defining an l x k binary Toeplitz matrix. Entry (i, j) is
/// seed bit j - i + l - 1: the first row is bits [l-1, k+l-1), the first
/// column read downwards is bits l-1, l-2, ..., 0.
class ToeplitzSeed {
 public:
  ToeplitzSeed(int input_bits, int output_bits, BitBlock bits);

  /// first_column has l bits, first_row k bits; they must agree at (0, 0).
  static ToeplitzSeed from_column_and_row(const BitBlock& first_column, const BitBlock& first_row);

  int input_bits() const { return k_; }
  int output_bits() const { return l_; }
  const BitBlock& bits() const { return bits_; }
  bool entry(int row, int col) const { return bits_.bit(static_cast<std::size_t>(col - row + l_ - 1)); }

 private:
  int k_;
  int l_;
  BitBlock bits_;
};

/// Word-sliced GF(2) evaluation of y = T x. Columns of T are folded into
/// per-nibble lookup tables, so each input nibble costs one table row XOR.
class ToeplitzExtractor {
 public:
  explicit ToeplitzExtractor(const ToeplitzSeed& seed);

  int input_bits() const { return k_; }
  int output_bits() const { return l_; }
  std::size_t input_bytes() const { return in_bytes_; }
  std::size_t output_bytes() const { return out_bytes_; }

  /// `input` holds input_bytes() MSB-first bytes with zero padding; writes
  /// output_bytes() bytes.
  void extract(std::span<const std::uint8_t> input, std::span<std::uint8_t> output) const;
  BitBlock extract(const BitBlock& input) const;

 private:
  int k_;
  int l_;
  std::size_t in_bytes_;
  std::size_t out_bytes_;
  std::size_t out_words_;
  std::vector<std::uint64_t> table_;  // [nibble][value 0..15][out_words_]
};

/// y = T x over GF(2). Throws LengthError if x does not have k bits.
BitBlock extract_block(const ToeplitzSeed& seed, const BitBlock& input);

struct StreamOutput {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;
  std::size_t blocks = 0;
  std::size_t discarded_samples = 0;
  std::optional<std::string> warning;
};

/// Incremental block assembler: samples enter MSB first, oldest first; every
/// k/n samples form one k-bit block whose l-bit image is appended to the sink.
class StreamExtractor {
 public:
  StreamExtractor(const ToeplitzSeed& seed, const entropy::ExtractorParams& params);

  std::size_t samples_per_block() const { return samples_per_block_; }
  std::size_t blocks() const { return blocks_; }
  std::size_t pending_samples() const { return pending_; }

  /// Throws DomainError for codes wider than n bits.
  void push(std::span<const std::uint16_t> codes, std::vector<std::uint8_t>& sink);

 private:
  void flush_block(std::vector<std::uint8_t>& sink);

  ToeplitzExtractor engine_;
  int n_bits_;
  std::size_t samples_per_block_;
  std::vector<std::uint8_t> block_;
  std::size_t pending_ = 0;
  std::size_t blocks_ = 0;
};

/// Whole-buffer convenience over StreamExtractor. The trailing partial block
/// is discarded; a stream shorter than one block yields no output and a warning.
StreamOutput extract_stream(const ToeplitzSeed& seed, std::span<const std::uint16_t> codes,
                            const entropy::ExtractorParams& params);

/// The seed is the first k + l - 1 bits of `material`, MSB first.
/// Throws LengthError when fewer than ceil((k + l - 1) / 8) bytes are given.
ToeplitzSeed seed_from_entropy(std::span<const std::uint8_t> material, int k, int l);

/// floor(samples * n / k) * l
std::size_t expected_output_bits(std::size_t samples, int n_bits, int k, int l);

}  // namespace vqrng::extract
