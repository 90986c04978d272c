#pragma once

// On-disk formats shared by the tools:
//   voltage trace   headerless float64 little-endian
//   code trace      headerless uint8 (n <= 8) or uint16 little-endian
//   sidecar         "<trace>.meta", one "key = value" per line
//   Toeplitz seed   text line "TOEPLITZ k=<k> l=<l>\n" then ceil((k+l-1)/8) packed bytes
//   bitstream       raw packed bytes, MSB first

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vqrng/extract.hpp"

namespace vqrng::io {

enum class SampleFormat { f64, u8, u16 };

const char* to_string(SampleFormat f);
SampleFormat parse_sample_format(const std::string& text);
/// u8 for n <= 8, u16 otherwise.
SampleFormat code_format_for(int n_bits);

/// Ordered key/value document; '#' starts a comment, blank lines ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

std::filesystem::path sidecar_path(const std::filesystem::path& trace);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_voltage_trace(const std::filesystem::path& path, std::span<const double> samples);
std::vector<double> read_voltage_trace(const std::filesystem::path& path);

void write_code_trace(const std::filesystem::path& path, std::span<const std::uint16_t> codes, SampleFormat format);
std::vector<std::uint16_t> read_code_trace(const std::filesystem::path& path, SampleFormat format);

void write_seed_file(const std::filesystem::path& path, const extract::ToeplitzSeed& seed);
extract::ToeplitzSeed read_seed_file(const std::filesystem::path& path);

/// Serialized form of write_seed_file, for hashing and tests.
std::vector<std::uint8_t> encode_seed(const extract::ToeplitzSeed& seed);
extract::ToeplitzSeed decode_seed(std::span<const std::uint8_t> data);

/// 64-bit FNV-1a, used for golden checksums of output files.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data);

}  // namespace vqrng::io
