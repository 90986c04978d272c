#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace vqrng::signal {

/// Gaussian voltage model of the balanced-detector output:
/// total variance sigma_q2 + sigma_e2 around the DC offset delta_dc.
struct NoiseModel {
  double sigma_q2 = 0;  ///< quantum (vacuum) variance, V^2
  double sigma_e2 = 0;  ///< classical electronic variance, V^2
  double kappa = 0;     ///< quantum variance per LO power, V^2/mW
  double delta_dc = 0;  ///< DC offset, V

  /// sigma_q2 = kappa * lo_power_mw.
  static NoiseModel from_lo_power(double kappa, double lo_power_mw, double sigma_e2, double delta_dc = 0.0);

  double total_variance() const { return sigma_q2 + sigma_e2; }
  void validate() const;

  bool operator==(const NoiseModel&) const = default;
};

struct AdcConfig {
  int n_bits = 8;
  double r_half = 0.2;  ///< half of the input voltage range, V
  double sample_rate = 100e6;

  /// delta = R / 2^(n-1)
  double bin_width() const;
  std::uint32_t max_code() const { return (1u << n_bits) - 1u; }
  void validate() const;

  bool operator==(const AdcConfig&) const = default;
};

struct TraceMetadata {
  NoiseModel noise;
  double mean_offset = 0;  ///< extra mean on top of noise.delta_dc, V
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

struct VoltageTrace {
  std::vector<double> samples;
  TraceMetadata meta;
};

struct ClipReport {
  std::size_t low = 0;   ///< samples below -R
  std::size_t high = 0;  ///< samples at or above +R
  std::size_t total() const { return low + high; }
};

struct CodeTrace {
  std::vector<std::uint16_t> codes;
  AdcConfig adc;
  ClipReport clip;
};

struct SampleMoments {
  double mean = 0;
  double variance = 0;  ///< unbiased (n - 1) estimator
  std::size_t count = 0;
};

struct VariancePoint {
  double lo_power_mw;
  double variance;
};

/// Reproducible standard-normal generator: mt19937_64 feeding Box-Muller, so
/// the stream is bit-identical across standard libraries for a given seed.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double operator()();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0;
  bool has_spare_ = false;
};

/// Independent draws of delta_dc + mean_offset + q + e with q ~ N(0, sigma_q2)
/// and e ~ N(0, sigma_e2). Throws DomainError for count == 0.
VoltageTrace simulate_trace(const NoiseModel& noise, std::size_t count, std::uint64_t seed, double mean_offset = 0.0);

/// Mid-rise quantizer: code = floor((V + R) / delta) clamped to [0, 2^n - 1].
CodeTrace quantize(std::span<const double> volts, const AdcConfig& adc);
std::uint16_t quantize_sample(double volts, const AdcConfig& adc);

/// Centre voltage of an ADC bin.
double code_midpoint(std::uint32_t code, const AdcConfig& adc);

SampleMoments moments(std::span<const double> samples);

/// sigma_e2 = var(lo_off), sigma_q2 = var(lo_on) - sigma_e2, delta_dc = mean(lo_on).
/// kappa is filled in when lo_power_mw > 0.
/// Throws CalibrationError for traces shorter than kMinCalibrationSamples or
/// when var(lo_on) < var(lo_off).
NoiseModel calibrate_noise(std::span<const double> lo_on, std::span<const double> lo_off, double lo_power_mw = 0.0);

inline constexpr std::size_t kMinCalibrationSamples = 1000;

/// 10 log10(sigma_q2 / sigma_e2), dB.
double qcnr_db(const NoiseModel& noise);

/// sigma_m^2(P) = kappa P + sigma_e2 for each LO power.
std::vector<VariancePoint> variance_vs_power(double kappa, double sigma_e2, std::span<const double> powers_mw);

}  // namespace vqrng::signal
