#include "vqrng/stattests.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vqrng/error.hpp"
#include "vqrng/format.hpp"
#include "vqrng/special_functions.hpp"

namespace vqrng::stattests {
namespace {

constexpr std::size_t kMinBits = 100;

void require_length(Bits bits, std::size_t minimum, const char* test) {
  if (bits.size() < minimum) {
    throw LengthError(std::string(test) + " needs at least " + std::to_string(minimum) + " bits, got " +
                      std::to_string(bits.size()));
  }
}

TestResult make_result(std::string name, double p, double statistic,
                       std::vector<std::pair<std::string, double>> parameters) {
  p = std::clamp(p, 0.0, 1.0);
  return {std::move(name), p, verdict_for(p), statistic, std::move(parameters)};
}

// Overlapping m-bit pattern counts with wrap-around, pattern read MSB first.
std::vector<std::uint64_t> pattern_counts(Bits bits, int m) {
  const std::size_t n = bits.size();
  const std::size_t mask = (std::size_t{1} << m) - 1;
  std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
  std::size_t idx = 0;
  for (int j = 0; j < m - 1; ++j) idx = (idx << 1) | bits[static_cast<std::size_t>(j) % n];
  for (std::size_t i = 0; i < n; ++i) {
    idx = ((idx << 1) | bits[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    ++counts[idx];
  }
  return counts;
}

double psi_squared(Bits bits, int m) {
  if (m <= 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  long double sum = 0;
  for (auto c : counts) sum += static_cast<long double>(c) * static_cast<long double>(c);
  const auto n = static_cast<long double>(bits.size());
  return static_cast<double>(std::ldexp(sum, m) / n - n);
}

double phi(Bits bits, int m) {
  if (m == 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  const auto n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double pi = static_cast<double>(c) / n;
    sum += pi * std::log(pi);
  }
  return sum;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// |S_j| for j = 0 .. n/2 - 1 where S is the DFT of the +-1 sequence.
std::vector<double> dft_magnitudes(Bits bits) {
  const std::size_t n = bits.size();
  std::unique_ptr<double, FftwDeleter> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwDeleter> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  if (!in || !out) throw std::bad_alloc();

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = bits[i] ? 1.0 : -1.0;
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> mags(n / 2);
  for (std::size_t j = 0; j < mags.size(); ++j) mags[j] = std::hypot(out.get()[j][0], out.get()[j][1]);
  return mags;
}

}  // namespace

Verdict verdict_for(double p) { return (p >= kPassLow && p <= kPassHigh) ? Verdict::pass : Verdict::fail; }

const char* to_string(Verdict v) { return v == Verdict::pass ? "PASS" : "FAIL"; }

TestResult frequency_test(Bits bits) {
  require_length(bits, kMinBits, "frequency test");
  long long sum = 0;
  for (auto b : bits) sum += b ? 1 : -1;
  const auto n = static_cast<double>(bits.size());
  const double s_obs = std::fabs(static_cast<double>(sum)) / std::sqrt(n);
  return make_result("Frequency", special::erfc(s_obs / std::numbers::sqrt2), s_obs, {{"n", n}});
}

TestResult block_frequency_test(Bits bits, std::size_t block_size) {
  require_length(bits, kMinBits, "block frequency test");
  if (block_size == 0 || block_size > bits.size()) throw DomainError("block size must lie in [1, n]");
  const std::size_t blocks = bits.size() / block_size;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < block_size; ++i) ones += bits[b * block_size + i];
    const double dev = static_cast<double>(ones) / static_cast<double>(block_size) - 0.5;
    chi2 += dev * dev;
  }
  chi2 *= 4.0 * static_cast<double>(block_size);
  const double p = special::gamma_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
  return make_result("BlockFrequency", p, chi2,
                     {{"block_size", static_cast<double>(block_size)}, {"blocks", static_cast<double>(blocks)}});
}

TestResult runs_test(Bits bits) {
  require_length(bits, kMinBits, "runs test");
  const auto n = static_cast<double>(bits.size());
  std::size_t ones = 0;
  for (auto b : bits) ones += b;
  const double pi = static_cast<double>(ones) / n;
  const double tau = 2.0 / std::sqrt(n);
  if (std::fabs(pi - 0.5) >= tau) {
    // Frequency prerequisite failed; the runs statistic is not meaningful.
    return make_result("Runs", 0.0, 0.0, {{"pi", pi}, {"tau", tau}});
  }
  std::size_t runs = 1;
  for (std::size_t i = 1; i < bits.size(); ++i) runs += bits[i] != bits[i - 1];
  const double v = static_cast<double>(runs);
  const double q = pi * (1.0 - pi);
  const double p = special::erfc(std::fabs(v - 2.0 * n * q) / (2.0 * std::sqrt(2.0 * n) * q));
  return make_result("Runs", p, v, {{"pi", pi}, {"tau", tau}});
}

TestResult longest_run_test(Bits bits) {
  require_length(bits, 128, "longest run test");
  struct Table {
    std::size_t block;
    int lowest;  // runs <= lowest share class 0
    std::vector<double> probs;
  };
  static const Table kSmall{8, 1, {0.2148, 0.3672, 0.2305, 0.1875}};
  static const Table kMedium{128, 4, {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124}};
  static const Table kLarge{10000, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
  const Table& t = bits.size() < 6272 ? kSmall : (bits.size() < 750000 ? kMedium : kLarge);

  const int classes = static_cast<int>(t.probs.size());
  const std::size_t blocks = bits.size() / t.block;
  std::vector<double> observed(t.probs.size(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    int run = 0;
    int longest = 0;
    for (std::size_t i = 0; i < t.block; ++i) {
      run = bits[b * t.block + i] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    observed[static_cast<std::size_t>(std::clamp(longest - t.lowest, 0, classes - 1))] += 1.0;
  }
  double chi2 = 0.0;
  const auto nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = nb * t.probs[i];
    chi2 += (observed[i] - expected) * (observed[i] - expected) / expected;
  }
  const double p = special::gamma_q(static_cast<double>(classes - 1) / 2.0, chi2 / 2.0);
  return make_result("LongestRun", p, chi2,
                     {{"block_size", static_cast<double>(t.block)}, {"blocks", nb}});
}

TestResult cumulative_sums_test(Bits bits, SumDirection direction) {
  require_length(bits, kMinBits, "cumulative sums test");
  const auto n = static_cast<long long>(bits.size());
  long long partial = 0;
  long long z = 0;
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(direction == SumDirection::forward ? i : n - 1 - i);
    partial += bits[idx] ? 1 : -1;
    z = std::max(z, partial < 0 ? -partial : partial);
  }
  // Summation limits follow the reference implementation's integer division.
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double zd = static_cast<double>(z);
  const long long ratio = n / z;
  double sum1 = 0.0;
  for (long long k = (-ratio + 1) / 4; k <= (ratio - 1) / 4; ++k) {
    sum1 += special::normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n);
    sum1 -= special::normal_cdf(static_cast<double>(4 * k - 1) * zd / sqrt_n);
  }
  double sum2 = 0.0;
  for (long long k = (-ratio - 3) / 4; k <= (ratio - 1) / 4; ++k) {
    sum2 += special::normal_cdf(static_cast<double>(4 * k + 3) * zd / sqrt_n);
    sum2 -= special::normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n);
  }
  const char* name = direction == SumDirection::forward ? "CumulativeSums(forward)" : "CumulativeSums(backward)";
  return make_result(name, 1.0 - sum1 + sum2, zd, {{"n", static_cast<double>(n)}});
}

TestResult spectral_test(Bits bits) {
  require_length(bits, kMinBits, "spectral test");
  const auto n = static_cast<double>(bits.size());
  const auto mags = dft_magnitudes(bits);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * n);
  const double expected = 0.95 * n / 2.0;
  const auto below = static_cast<double>(std::count_if(mags.begin(), mags.end(), [&](double m) { return m < threshold; }));
  const double d = (below - expected) / std::sqrt(n * 0.95 * 0.05 / 4.0);
  return make_result("FFT", special::erfc(std::fabs(d) / std::numbers::sqrt2), d,
                     {{"threshold", threshold}, {"peaks_below", below}});
}

TestResult approximate_entropy_test(Bits bits, int m) {
  require_length(bits, kMinBits, "approximate entropy test");
  if (m < 1 || m > 24) throw DomainError("approximate entropy block length m must lie in [1, 24]");
  const auto n = static_cast<double>(bits.size());
  const double apen = phi(bits, m) - phi(bits, m + 1);
  const double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
  const double p = special::gamma_q(std::ldexp(1.0, m - 1), chi2 / 2.0);
  return make_result("ApproximateEntropy", p, chi2, {{"m", static_cast<double>(m)}, {"apen", apen}});
}

std::array<TestResult, 2> serial_test(Bits bits, int m) {
  require_length(bits, kMinBits, "serial test");
  if (m < 2 || m > 24) throw DomainError("serial block length m must lie in [2, 24]");
  const double psi_m = psi_squared(bits, m);
  const double psi_m1 = psi_squared(bits, m - 1);
  const double psi_m2 = psi_squared(bits, m - 2);
  const double del1 = psi_m - psi_m1;
  const double del2 = psi_m - 2.0 * psi_m1 + psi_m2;
  const double md = m;
  return {make_result("Serial(first)", special::gamma_q(std::ldexp(1.0, m - 2), del1 / 2.0), del1, {{"m", md}}),
          make_result("Serial(second)", special::gamma_q(std::ldexp(1.0, m - 3), del2 / 2.0), del2, {{"m", md}})};
}

BatteryReport run_battery(Bits bits) {
  if (bits.size() < kBatteryMinBits) {
    throw LengthError("battery needs at least " + std::to_string(kBatteryMinBits) + " bits, got " +
                      std::to_string(bits.size()));
  }
  BatteryReport report;
  report.input_length = bits.size();
  report.reduced_power = bits.size() < kBatteryRecommendedBits;
  auto& r = report.results;
  r.push_back(frequency_test(bits));
  r.push_back(block_frequency_test(bits));
  r.push_back(cumulative_sums_test(bits, SumDirection::forward));
  r.push_back(cumulative_sums_test(bits, SumDirection::backward));
  r.push_back(runs_test(bits));
  r.push_back(longest_run_test(bits));
  r.push_back(spectral_test(bits));
  r.push_back(approximate_entropy_test(bits));
  for (auto& s : serial_test(bits)) r.push_back(std::move(s));
  report.overall_pass = std::all_of(r.begin(), r.end(), [](const TestResult& t) { return t.verdict == Verdict::pass; });
  return report;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  if (bit_count > bytes.size() * 8) throw LengthError("bit count exceeds the packed input");
  std::vector<std::uint8_t> bits(bit_count);
  for (std::size_t i = 0; i < bit_count; ++i) bits[i] = (bytes[i >> 3] >> (7 - (i & 7))) & 1u;
  return bits;
}

std::string to_text(const BatteryReport& report) {
  std::ostringstream out;
  out << "input_length_bits: " << report.input_length << '\n';
  if (report.reduced_power) {
    out << "note: reduced power, fewer than " << kBatteryRecommendedBits << " bits\n";
  }
  out << "pass_band: [" << format_double(kPassLow) << ", " << format_double(kPassHigh) << "]\n";
  for (const auto& t : report.results) {
    out << t.test_name << ": p_value=" << format_double(t.p_value) << " statistic=" << format_double(t.statistic)
        << " verdict=" << to_string(t.verdict) << '\n';
  }
  out << "overall: " << (report.overall_pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

std::string to_table(const BatteryReport& report) {
  std::ostringstream out;
  out << "test_name,statistic,p_value,verdict\n";
  for (const auto& t : report.results) {
    out << t.test_name << ',' << format_double(t.statistic) << ',' << format_double(t.p_value) << ','
        << to_string(t.verdict) << '\n';
  }
  return out.str();
}

}  // namespace vqrng::stattests
