#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "vqrng/entropy.hpp"
#include "vqrng/optics.hpp"
#include "vqrng/signal.hpp"
#include "vqrng/trace_io.hpp"

namespace vqrng::cli {

/// Closed-loop drift fixture for the rebalance command. Drift is applied per
/// correction interval; the controller sees one window mean per interval.
struct RebalanceScenario {
  std::size_t steps = 100;
  std::size_t window = 100'000;               ///< samples averaged per measurement
  double offset_drift_v = 0.0;                ///< additive DC walk per interval, V
  double s2_drift = 0.0;                      ///< relative carrier-arm sensitivity drift per interval
  double deadband_sigmas = 5.0;               ///< no correction while |mean| is inside this many standard errors
  bool operator==(const RebalanceScenario&) const = default;
};

struct RunConfig {
  optics::ModulatorConfig modulator;
  /// "modulator.m = auto": operate at the balance solution instead of modulator.modulation_index.
  bool auto_index = true;
  optics::DetectionConfig detection;
  double volts_per_quadrature = 0.05;  ///< detector gain mapping x0 to output mean, V

  double kappa = 2.51275e-5;  ///< V^2/mW
  double lo_power_mw = 40.0;
  double sigma_e2 = 5.49e-5;  ///< V^2
  double delta_dc = 0.0;      ///< V

  signal::AdcConfig adc;
  entropy::ExtractorParams extractor;
  double excursion_multiplier = 5.0;

  std::uint64_t seed = 1;
  std::size_t sample_count = 1'000'000;
  RebalanceScenario rebalance;

  signal::NoiseModel noise() const;
  /// Module invariants plus cross-module checks; throws ValidationError.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Every key, in file order, with its current value.
io::KeyValues to_key_values(const RunConfig& cfg);
/// Starts from `base` and applies `kv`. Unknown keys and malformed values
/// throw ValidationError naming the key. Does not call validate().
RunConfig apply_key_values(RunConfig base, const io::KeyValues& kv);

std::string serialize(const RunConfig& cfg);
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Applies one "key=value" override.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace vqrng::cli
