#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

// SP 800-22 style randomness tests. Input bits are one byte per bit (0 or 1);
// use unpack_bits() for packed MSB-first byte streams.

namespace vqrng::stattests {

/// Two-sided acceptance band applied to every p-value.
inline constexpr double kPassLow = 0.025;
inline constexpr double kPassHigh = 0.975;

/// Hard minimum for run_battery, and the length below which it flags reduced power.
inline constexpr std::size_t kBatteryMinBits = 10'000;
inline constexpr std::size_t kBatteryRecommendedBits = 1'000'000;

enum class Verdict { pass, fail };

struct TestResult {
  std::string test_name;
  double p_value = 0;
  Verdict verdict = Verdict::fail;
  double statistic = 0;
  std::vector<std::pair<std::string, double>> parameters;
};

struct BatteryReport {
  std::vector<TestResult> results;
  bool overall_pass = false;
  std::size_t input_length = 0;
  bool reduced_power = false;
};

enum class SumDirection { forward, backward };

using Bits = std::span<const std::uint8_t>;

Verdict verdict_for(double p_value);

TestResult frequency_test(Bits bits);
TestResult block_frequency_test(Bits bits, std::size_t block_size = 128);
TestResult runs_test(Bits bits);
/// Block length M (8, 128 or 10^4) and class table chosen from the input length.
TestResult longest_run_test(Bits bits);
TestResult cumulative_sums_test(Bits bits, SumDirection direction = SumDirection::forward);
/// Discrete Fourier transform (spectral) test.
TestResult spectral_test(Bits bits);
TestResult approximate_entropy_test(Bits bits, int m = 2);
/// The serial test yields two p-values, from the first and second differences of psi^2.
std::array<TestResult, 2> serial_test(Bits bits, int m = 2);

/// Runs every test above with default parameters. Throws LengthError below
/// kBatteryMinBits.
BatteryReport run_battery(Bits bits);

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count);

std::string to_text(const BatteryReport& report);
/// Delimited table: test_name,statistic,p_value,verdict
std::string to_table(const BatteryReport& report);

const char* to_string(Verdict verdict);

}  // namespace vqrng::stattests
