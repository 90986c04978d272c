#include "vqrng/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vqrng/error.hpp"

namespace vqrng::signal {

NoiseModel NoiseModel::from_lo_power(double kappa, double lo_power_mw, double sigma_e2, double delta_dc) {
  if (!(lo_power_mw >= 0.0)) throw ValidationError("noise.lo_power_mw", "must be >= 0");
  return {kappa * lo_power_mw, sigma_e2, kappa, delta_dc};
}

void NoiseModel::validate() const {
  if (!(sigma_q2 >= 0.0)) throw ValidationError("noise.sigma_q2", "must be >= 0");
  if (!(sigma_e2 >= 0.0)) throw ValidationError("noise.sigma_e2", "must be >= 0");
  if (!(kappa >= 0.0)) throw ValidationError("noise.kappa", "must be >= 0");
  if (!std::isfinite(delta_dc)) throw ValidationError("noise.delta_dc", "must be finite");
}

double AdcConfig::bin_width() const { return r_half / static_cast<double>(1u << (n_bits - 1)); }

void AdcConfig::validate() const {
  if (n_bits < 1 || n_bits > 16) throw ValidationError("adc.n_bits", "must lie in [1, 16]");
  if (!(r_half > 0.0) || !std::isfinite(r_half)) throw ValidationError("adc.r_half", "must be > 0");
  if (!(sample_rate > 0.0)) throw ValidationError("adc.sample_rate", "must be > 0");
}

double GaussianSource::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double kScale = 0x1.0p-53;
  const double u1 = 1.0 - static_cast<double>(engine_() >> 11) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;        // [0, 1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

VoltageTrace simulate_trace(const NoiseModel& noise, std::size_t count, std::uint64_t seed, double mean_offset) {
  noise.validate();
  if (count == 0) throw DomainError("sample count must be >= 1");

  const double sigma_q = std::sqrt(noise.sigma_q2);
  const double sigma_e = std::sqrt(noise.sigma_e2);
  const double mean = noise.delta_dc + mean_offset;

  VoltageTrace trace;
  trace.meta = {noise, mean_offset, seed, count};
  trace.samples.resize(count);
  GaussianSource gauss(seed);
  for (auto& v : trace.samples) {
    const double quantum = sigma_q * gauss();
    const double classical = sigma_e * gauss();
    v = mean + quantum + classical;
  }
  return trace;
}

std::uint16_t quantize_sample(double volts, const AdcConfig& adc) {
  const double x = (volts + adc.r_half) / adc.bin_width();
  if (!(x >= 0.0)) return 0;
  const double top = static_cast<double>(adc.max_code());
  if (x >= top + 1.0) return static_cast<std::uint16_t>(adc.max_code());
  return static_cast<std::uint16_t>(std::floor(x));
}

CodeTrace quantize(std::span<const double> volts, const AdcConfig& adc) {
  adc.validate();
  CodeTrace out;
  out.adc = adc;
  out.codes.reserve(volts.size());
  const double delta = adc.bin_width();
  const double top = static_cast<double>(adc.max_code()) + 1.0;
  for (double v : volts) {
    const double x = (v + adc.r_half) / delta;
    if (!(x >= 0.0)) {
      ++out.clip.low;
      out.codes.push_back(0);
    } else if (x >= top) {
      ++out.clip.high;
      out.codes.push_back(static_cast<std::uint16_t>(adc.max_code()));
    } else {
      out.codes.push_back(static_cast<std::uint16_t>(std::floor(x)));
    }
  }
  return out;
}

double code_midpoint(std::uint32_t code, const AdcConfig& adc) {
  return -adc.r_half + (static_cast<double>(code) + 0.5) * adc.bin_width();
}

SampleMoments moments(std::span<const double> samples) {
  SampleMoments m;
  m.count = samples.size();
  if (samples.empty()) return m;
  double sum = 0.0;
  for (double v : samples) sum += v;
  m.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return m;
  double ss = 0.0;
  double comp = 0.0;
  for (double v : samples) {
    const double d = v - m.mean;
    ss += d * d;
    comp += d;
  }
  const auto n = static_cast<double>(samples.size());
  m.variance = (ss - comp * comp / n) / (n - 1.0);
  return m;
}

NoiseModel calibrate_noise(std::span<const double> lo_on, std::span<const double> lo_off, double lo_power_mw) {
  if (lo_on.size() < kMinCalibrationSamples || lo_off.size() < kMinCalibrationSamples) {
    throw CalibrationError("calibration needs at least " + std::to_string(kMinCalibrationSamples) +
                           " samples per trace");
  }
  const auto on = moments(lo_on);
  const auto off = moments(lo_off);
  if (on.variance < off.variance) {
    throw CalibrationError("inconsistent calibration: LO-on variance " + std::to_string(on.variance) +
                           " V^2 is below LO-off variance " + std::to_string(off.variance) + " V^2");
  }
  NoiseModel model;
  model.sigma_e2 = off.variance;
  model.sigma_q2 = on.variance - off.variance;
  model.delta_dc = on.mean;
  model.kappa = lo_power_mw > 0.0 ? model.sigma_q2 / lo_power_mw : 0.0;
  return model;
}

double qcnr_db(const NoiseModel& noise) {
  if (!(noise.sigma_q2 > 0.0) || !(noise.sigma_e2 > 0.0)) {
    throw DomainError("QCNR needs strictly positive quantum and classical variances");
  }
  return 10.0 * std::log10(noise.sigma_q2 / noise.sigma_e2);
}

std::vector<VariancePoint> variance_vs_power(double kappa, double sigma_e2, std::span<const double> powers_mw) {
  std::vector<VariancePoint> points;
  points.reserve(powers_mw.size());
  for (double p : powers_mw) {
    if (!(p >= 0.0)) throw DomainError("LO power must be >= 0");
    points.push_back({p, kappa * p + sigma_e2});
  }
  return points;
}

}  // namespace vqrng::signal
