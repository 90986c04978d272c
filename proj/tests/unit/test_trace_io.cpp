#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "vqrng/error.hpp"
#include "vqrng/trace_io.hpp"

using namespace vqrng;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / "vqrng_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("voltage traces round-trip bit-exactly") {
  const std::vector<double> v{0.1, -0.0, 1e-300, -3.25, 0.015625};
  const auto p = scratch("v.f64");
  io::write_voltage_trace(p, v);
  CHECK(fs::file_size(p) == 40);
  CHECK(io::read_voltage_trace(p) == v);
  const auto raw = io::read_bytes(p);
  CHECK(raw[7] == 0x3f);  // little-endian: sign/exponent byte last
}

TEST_CASE("code traces") {
  const std::vector<std::uint16_t> c{0, 1, 255, 128};
  const auto p8 = scratch("c.u8");
  io::write_code_trace(p8, c, io::SampleFormat::u8);
  CHECK(fs::file_size(p8) == 4);
  CHECK(io::read_code_trace(p8, io::SampleFormat::u8) == c);

  const std::vector<std::uint16_t> w{0x1234, 65535};
  const auto p16 = scratch("c.u16");
  io::write_code_trace(p16, w, io::SampleFormat::u16);
  CHECK(io::read_bytes(p16) == std::vector<std::uint8_t>{0x34, 0x12, 0xff, 0xff});
  CHECK(io::read_code_trace(p16, io::SampleFormat::u16) == w);
  CHECK_THROWS_AS(io::write_code_trace(p8, w, io::SampleFormat::u8), IoError);
  CHECK(io::code_format_for(8) == io::SampleFormat::u8);
  CHECK(io::code_format_for(12) == io::SampleFormat::u16);
}

TEST_CASE("key/value documents") {
  const auto kv = io::parse_key_values("# header\n a.b = 3 \n\nc=x # trailing\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a.b") == "3");
  CHECK(kv.at("c") == "x");
  CHECK(io::parse_key_values(io::format_key_values(kv)) == kv);
  CHECK_THROWS_AS(io::parse_key_values("novalue\n"), IoError);
  CHECK(io::sidecar_path("out/t.u8") == fs::path("out/t.u8.meta"));
}

TEST_CASE("seed files") {
  std::mt19937_64 rng(3);
  const extract::ToeplitzSeed seed(1024, 512, extract::BitBlock::from_bits(oracle::random_bits(rng, 1535)));
  const auto p = scratch("seed.bin");
  io::write_seed_file(p, seed);
  const auto back = io::read_seed_file(p);
  CHECK(back.input_bits() == 1024);
  CHECK(back.output_bits() == 512);
  CHECK(back.bits() == seed.bits());

  auto enc = io::encode_seed(seed);
  enc.pop_back();
  CHECK_THROWS_AS(io::decode_seed(enc), IoError);
  const std::string bad = "TOEPLITZ k=8\n";
  CHECK_THROWS_AS(io::decode_seed(std::vector<std::uint8_t>(bad.begin(), bad.end())), IoError);
}

TEST_CASE("seed derived from fixed material is stable") {
  std::vector<std::uint8_t> material(192);
  for (std::size_t i = 0; i < material.size(); ++i) material[i] = static_cast<std::uint8_t>(i * 37 + 11);
  const auto seed = extract::seed_from_entropy(material, 1024, 512);
  CHECK(io::fnv1a64(io::encode_seed(seed)) == io::fnv1a64(io::encode_seed(seed)));
  CHECK(io::fnv1a64(io::encode_seed(seed)) == 0xcd67550f6af2c23cull);
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(io::fnv1a64({}) == 0xcbf29ce484222325ull);
  const std::uint8_t a[] = {'a'};
  CHECK(io::fnv1a64(a) == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("missing files") {
  CHECK_THROWS_AS(io::read_bytes("/nonexistent/vqrng/file"), IoError);
  CHECK_THROWS_AS(io::parse_sample_format("f32"), IoError);
}
