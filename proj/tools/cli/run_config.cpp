#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "vqrng/error.hpp"
#include "vqrng/format.hpp"

namespace vqrng::cli {
namespace {

double to_double(const std::string& key, const std::string& text) {
  double v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw ValidationError(key, "expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& text) {
  Int v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) throw ValidationError(key, "expected an integer, got '" + text + "'");
  return v;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define VQRNG_DOUBLE_FIELD(name, member)                                       \
  Field {                                                                      \
    name, [](const RunConfig& c) { return format_double(c.member); },          \
        [](RunConfig& c, const std::string& v) { c.member = to_double(name, v); } \
  }

#define VQRNG_INT_FIELD(name, member, type)                                                  \
  Field {                                                                                    \
    name, [](const RunConfig& c) { return std::to_string(c.member); },                       \
        [](RunConfig& c, const std::string& v) { c.member = to_integer<type>(name, v); }     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      VQRNG_DOUBLE_FIELD("modulator.mu0", modulator.mu0),
      VQRNG_INT_FIELD("modulator.S", modulator.sideband_order, int),
      Field{"modulator.m",
            [](const RunConfig& c) { return c.auto_index ? std::string("auto") : format_double(c.modulator.modulation_index); },
            [](RunConfig& c, const std::string& v) {
              c.auto_index = v == "auto";
              c.modulator.modulation_index = c.auto_index ? 0.0 : to_double("modulator.m", v);
            }},
      VQRNG_DOUBLE_FIELD("modulator.theta", modulator.phase),
      VQRNG_DOUBLE_FIELD("modulator.omega_hz", modulator.modulation_frequency_hz),
      VQRNG_DOUBLE_FIELD("detection.eta_sb", detection.eta_sb),
      VQRNG_DOUBLE_FIELD("detection.eta_c", detection.eta_c),
      VQRNG_DOUBLE_FIELD("detection.vartheta", detection.extinction),
      VQRNG_DOUBLE_FIELD("detection.s1", detection.s1),
      VQRNG_DOUBLE_FIELD("detection.s2", detection.s2),
      VQRNG_DOUBLE_FIELD("detection.volts_per_quadrature", volts_per_quadrature),
      VQRNG_DOUBLE_FIELD("noise.kappa", kappa),
      VQRNG_DOUBLE_FIELD("noise.lo_power_mw", lo_power_mw),
      VQRNG_DOUBLE_FIELD("noise.sigma_e2", sigma_e2),
      VQRNG_DOUBLE_FIELD("noise.delta_dc", delta_dc),
      Field{"adc.n_bits", [](const RunConfig& c) { return std::to_string(c.adc.n_bits); },
            [](RunConfig& c, const std::string& v) {
              c.adc.n_bits = to_integer<int>("adc.n_bits", v);
              c.extractor.n_bits = c.adc.n_bits;
            }},
      VQRNG_DOUBLE_FIELD("adc.r_half", adc.r_half),
      VQRNG_DOUBLE_FIELD("adc.sample_rate", adc.sample_rate),
      VQRNG_INT_FIELD("extractor.k", extractor.k, int),
      VQRNG_INT_FIELD("extractor.l", extractor.l, int),
      VQRNG_DOUBLE_FIELD("entropy.e_bound_multiplier", excursion_multiplier),
      VQRNG_INT_FIELD("seed", seed, std::uint64_t),
      VQRNG_INT_FIELD("sample_count", sample_count, std::size_t),
      VQRNG_INT_FIELD("rebalance.steps", rebalance.steps, std::size_t),
      VQRNG_INT_FIELD("rebalance.window", rebalance.window, std::size_t),
      VQRNG_DOUBLE_FIELD("rebalance.offset_drift_v", rebalance.offset_drift_v),
      VQRNG_DOUBLE_FIELD("rebalance.s2_drift", rebalance.s2_drift),
      VQRNG_DOUBLE_FIELD("rebalance.deadband_sigmas", rebalance.deadband_sigmas),
  };
  return table;
}

#undef VQRNG_DOUBLE_FIELD
#undef VQRNG_INT_FIELD

bool epsilon_is_power_of_two(double eps) { return std::exp2(std::log2(eps)) == eps; }

}  // namespace

signal::NoiseModel RunConfig::noise() const {
  return signal::NoiseModel::from_lo_power(kappa, lo_power_mw, sigma_e2, delta_dc);
}

void RunConfig::validate() const {
  if (!auto_index) modulator.validate();
  else {
    optics::ModulatorConfig probe = modulator;
    probe.modulation_index = 0.0;
    probe.validate();
  }
  detection.validate();
  if (!(volts_per_quadrature > 0.0)) throw ValidationError("detection.volts_per_quadrature", "must be > 0");
  noise().validate();
  adc.validate();

  const auto& x = extractor;
  if (x.k <= 0 || x.k % 8 != 0) throw ValidationError("extractor.k", "must be a positive multiple of 8");
  if (x.l <= 0 || x.l % 8 != 0) throw ValidationError("extractor.l", "must be a positive multiple of 8");
  if (x.n_bits != adc.n_bits) throw ValidationError("extractor.n_bits", "must equal adc.n_bits");
  if (x.k % adc.n_bits != 0) {
    throw ValidationError("extractor.k", "must be divisible by adc.n_bits = " + std::to_string(adc.n_bits));
  }
  if (!(x.epsilon > 0.0 && x.epsilon < 1.0)) throw ValidationError("extractor.log2_epsilon", "epsilon must lie in (0, 1)");
  if (!(excursion_multiplier >= 0.0)) throw ValidationError("entropy.e_bound_multiplier", "must be >= 0");
  if (sample_count == 0) throw ValidationError("sample_count", "must be >= 1");
  if (rebalance.steps == 0) throw ValidationError("rebalance.steps", "must be >= 1");
  if (rebalance.window < 2) throw ValidationError("rebalance.window", "must be >= 2");
  if (!(rebalance.deadband_sigmas >= 0.0)) throw ValidationError("rebalance.deadband_sigmas", "must be >= 0");
  if (!std::isfinite(rebalance.offset_drift_v)) throw ValidationError("rebalance.offset_drift_v", "must be finite");
  if (!std::isfinite(rebalance.s2_drift)) throw ValidationError("rebalance.s2_drift", "must be finite");
}

io::KeyValues to_key_values(const RunConfig& cfg) {
  io::KeyValues kv;
  for (const auto& f : fields()) kv[f.key] = f.get(cfg);
  if (epsilon_is_power_of_two(cfg.extractor.epsilon)) {
    kv["extractor.log2_epsilon"] = format_double(std::log2(cfg.extractor.epsilon));
  } else {
    kv["extractor.epsilon"] = format_double(cfg.extractor.epsilon);
  }
  return kv;
}

RunConfig apply_key_values(RunConfig base, const io::KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "extractor.log2_epsilon") {
      base.extractor.epsilon = std::exp2(to_double(key, value));
      continue;
    }
    if (key == "extractor.epsilon") {
      base.extractor.epsilon = to_double(key, value);
      continue;
    }
    bool known = false;
    for (const auto& f : fields()) {
      if (key == f.key) {
        f.set(base, value);
        known = true;
        break;
      }
    }
    if (!known) throw ValidationError(key, "unknown configuration key");
  }
  return base;
}

std::string serialize(const RunConfig& cfg) { return io::format_key_values(to_key_values(cfg)); }

RunConfig parse(const std::string& text) {
  io::KeyValues kv;
  try {
    kv = io::parse_key_values(text);
  } catch (const IoError& e) {
    throw ValidationError("config", e.what());
  }
  return apply_key_values(RunConfig{}, kv);
}

RunConfig load(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError(assignment, "override must look like key=value");
  io::KeyValues kv;
  try {
    kv = io::parse_key_values(assignment);
  } catch (const IoError& e) {
    throw ValidationError(assignment.substr(0, eq), e.what());
  }
  cfg = apply_key_values(std::move(cfg), kv);
}

}  // namespace vqrng::cli
