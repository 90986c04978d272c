#include "vqrng/trace_io.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "vqrng/error.hpp"

namespace vqrng::io {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_header_int(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) throw IoError("seed header lacks '" + key + "='");
  try {
    return std::stoi(header.substr(pos + key.size() + 1));
  } catch (const std::exception&) {
    throw IoError("seed header has a malformed '" + key + "' value");
  }
}

}  // namespace

const char* to_string(SampleFormat f) {
  switch (f) {
    case SampleFormat::f64: return "f64";
    case SampleFormat::u8: return "u8";
    case SampleFormat::u16: return "u16";
  }
  return "?";
}

SampleFormat parse_sample_format(const std::string& text) {
  if (text == "f64") return SampleFormat::f64;
  if (text == "u8") return SampleFormat::u8;
  if (text == "u16") return SampleFormat::u16;
  throw IoError("unknown sample format '" + text + "' (expected f64, u8 or u16)");
}

SampleFormat code_format_for(int n_bits) { return n_bits <= 8 ? SampleFormat::u8 : SampleFormat::u16; }

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("line " + std::to_string(line_no) + ": expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw IoError("line " + std::to_string(line_no) + ": empty key");
    kv[std::move(key)] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return parse_key_values(std::string(bytes.begin(), bytes.end()));
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  const auto text = format_key_values(kv);
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::filesystem::path sidecar_path(const std::filesystem::path& trace) {
  auto p = trace;
  p += ".meta";
  return p;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_voltage_trace(const std::filesystem::path& path, std::span<const double> samples) {
  std::vector<std::uint8_t> bytes(samples.size() * 8);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(samples[i]);
    for (int b = 0; b < 8; ++b) bytes[8 * i + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  write_bytes(path, bytes);
}

std::vector<double> read_voltage_trace(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() % 8 != 0) throw IoError("'" + path.string() + "' is not a whole number of float64 samples");
  std::vector<double> samples(bytes.size() / 8);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[8 * i + static_cast<std::size_t>(b)]} << (8 * b);
    samples[i] = std::bit_cast<double>(bits);
  }
  return samples;
}

void write_code_trace(const std::filesystem::path& path, std::span<const std::uint16_t> codes, SampleFormat format) {
  std::vector<std::uint8_t> bytes;
  if (format == SampleFormat::u8) {
    bytes.reserve(codes.size());
    for (auto c : codes) {
      if (c > 0xff) throw IoError("code " + std::to_string(c) + " does not fit a u8 trace");
      bytes.push_back(static_cast<std::uint8_t>(c));
    }
  } else if (format == SampleFormat::u16) {
    bytes.reserve(2 * codes.size());
    for (auto c : codes) {
      bytes.push_back(static_cast<std::uint8_t>(c & 0xff));
      bytes.push_back(static_cast<std::uint8_t>(c >> 8));
    }
  } else {
    throw IoError("code traces are stored as u8 or u16");
  }
  write_bytes(path, bytes);
}

std::vector<std::uint16_t> read_code_trace(const std::filesystem::path& path, SampleFormat format) {
  const auto bytes = read_bytes(path);
  if (format == SampleFormat::u8) return {bytes.begin(), bytes.end()};
  if (format != SampleFormat::u16) throw IoError("code traces are stored as u8 or u16");
  if (bytes.size() % 2 != 0) throw IoError("'" + path.string() + "' is not a whole number of u16 samples");
  std::vector<std::uint16_t> codes(bytes.size() / 2);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    codes[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  return codes;
}

std::vector<std::uint8_t> encode_seed(const extract::ToeplitzSeed& seed) {
  const std::string header =
      "TOEPLITZ k=" + std::to_string(seed.input_bits()) + " l=" + std::to_string(seed.output_bits()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto body = seed.bits().bytes();
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

extract::ToeplitzSeed decode_seed(std::span<const std::uint8_t> data) {
  const auto newline = std::find(data.begin(), data.end(), std::uint8_t{'\n'});
  if (newline == data.end()) throw IoError("seed file lacks its header line");
  const std::string header(data.begin(), newline);
  if (header.rfind("TOEPLITZ ", 0) != 0) throw IoError("seed header must start with 'TOEPLITZ'");
  const int k = parse_header_int(header, "k");
  const int l = parse_header_int(header, "l");
  if (k < 1 || l < 1) throw IoError("seed header declares non-positive k or l");
  const auto body = data.subspan(static_cast<std::size_t>(newline - data.begin()) + 1);
  const std::size_t bits = static_cast<std::size_t>(k) + static_cast<std::size_t>(l) - 1;
  if (body.size() != (bits + 7) / 8) {
    throw IoError("seed body has " + std::to_string(body.size()) + " bytes, header implies " +
                  std::to_string((bits + 7) / 8));
  }
  return {k, l, extract::BitBlock::from_bytes(body, bits)};
}

void write_seed_file(const std::filesystem::path& path, const extract::ToeplitzSeed& seed) {
  write_bytes(path, encode_seed(seed));
}

extract::ToeplitzSeed read_seed_file(const std::filesystem::path& path) { return decode_seed(read_bytes(path)); }

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace vqrng::io
