#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "vqrng/format.hpp"
#include "vqrng/trace_io.hpp"

namespace vqrng::cli {
namespace {

// Independent sub-streams derived from the single configured seed.
constexpr std::uint64_t kLoOffStream = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kSeedStream = 0xd1b54a32d192ed03ull;
constexpr std::uint64_t kRebalanceStream = 0x94d049bb133111ebull;

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

io::KeyValues trace_meta(const RunConfig& cfg, io::SampleFormat format, std::size_t count, std::uint64_t seed) {
  return {
      {"format", io::to_string(format)},
      {"count", std::to_string(count)},
      {"seed", std::to_string(seed)},
      {"adc.n_bits", std::to_string(cfg.adc.n_bits)},
      {"adc.r_half", format_double(cfg.adc.r_half)},
      {"adc.sample_rate", format_double(cfg.adc.sample_rate)},
  };
}

entropy::EntropyInputs configured_entropy_inputs(const RunConfig& cfg) {
  return entropy::EntropyInputs::from_noise(cfg.noise(), cfg.adc, cfg.excursion_multiplier);
}

std::string refusal_message(const RunConfig& cfg, double h_min) {
  const auto& x = cfg.extractor;
  const double bound = entropy::leftover_hash_bound(h_min, x.n_bits, x.k, x.epsilon);
  std::ostringstream msg;
  msg << "refusing to extract: l = " << x.l << " is not below k*h_min/n - 2*log2(1/eps) = " << x.k << "*"
      << format_double(h_min) << "/" << x.n_bits << " - 2*" << format_double(std::log2(1.0 / x.epsilon)) << " = "
      << format_double(bound) << " (pass --override to extract anyway)";
  return msg.str();
}

// Output mean of the detector for a given index, additive offset and carrier-arm sensitivity.
double model_offset(const RunConfig& cfg, double index, double static_offset, double s2) {
  auto mod = cfg.modulator;
  mod.modulation_index = index;
  const auto arms = optics::arm_photon_numbers(mod, cfg.detection);
  return static_offset +
         cfg.volts_per_quadrature * optics::quadrature_mean(arms, cfg.detection.s1, s2, cfg.modulator.mu0);
}

}  // namespace

OperatingPoint operating_point(const RunConfig& cfg) {
  OperatingPoint op;
  op.balance = optics::balance_solve(cfg.detection, cfg.modulator.sideband_order, cfg.modulator.mu0);
  op.modulation_index = cfg.auto_index ? op.balance.modulation_index : cfg.modulator.modulation_index;
  auto mod = cfg.modulator;
  mod.modulation_index = op.modulation_index;
  op.arms = optics::arm_photon_numbers(mod, cfg.detection);
  op.quadrature = optics::quadrature_mean(op.arms, cfg.detection.s1, cfg.detection.s2, cfg.modulator.mu0);
  op.mean_offset_v = cfg.volts_per_quadrature * op.quadrature;
  return op;
}

SimulateOutputs cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  SimulateOutputs out;
  out.op = operating_point(cfg);

  const auto noise = cfg.noise();
  auto off_noise = noise;
  off_noise.sigma_q2 = 0.0;
  const std::uint64_t off_seed = cfg.seed ^ kLoOffStream;
  const auto on = signal::simulate_trace(noise, cfg.sample_count, cfg.seed, out.op.mean_offset_v);
  const auto off = signal::simulate_trace(off_noise, cfg.sample_count, off_seed);
  const auto codes = signal::quantize(on.samples, cfg.adc);
  out.clip = codes.clip;

  fs::create_directories(out_dir);
  const auto code_format = io::code_format_for(cfg.adc.n_bits);
  out.lo_on_volts = out_dir / "lo_on.f64";
  out.lo_on_codes = out_dir / (std::string("lo_on.") + io::to_string(code_format));
  out.lo_off_volts = out_dir / "lo_off.f64";
  out.config = out_dir / "run.conf";

  io::write_voltage_trace(out.lo_on_volts, on.samples);
  auto meta = trace_meta(cfg, io::SampleFormat::f64, cfg.sample_count, cfg.seed);
  meta["mean_offset_v"] = format_double(out.op.mean_offset_v);
  meta["modulation_index"] = format_double(out.op.modulation_index);
  io::write_key_values(io::sidecar_path(out.lo_on_volts), meta);

  io::write_code_trace(out.lo_on_codes, codes.codes, code_format);
  meta["format"] = io::to_string(code_format);
  meta["clip_low"] = std::to_string(codes.clip.low);
  meta["clip_high"] = std::to_string(codes.clip.high);
  io::write_key_values(io::sidecar_path(out.lo_on_codes), meta);

  io::write_voltage_trace(out.lo_off_volts, off.samples);
  io::write_key_values(io::sidecar_path(out.lo_off_volts),
                       trace_meta(cfg, io::SampleFormat::f64, cfg.sample_count, off_seed));

  write_text(out.config, serialize(cfg));
  return out;
}

AnalyzeResult analyze_traces(const RunConfig& cfg, std::span<const double> lo_on, std::span<const double> lo_off) {
  AnalyzeResult r;
  r.noise = signal::calibrate_noise(lo_on, lo_off, cfg.lo_power_mw);
  r.entropy = entropy::min_entropy(entropy::EntropyInputs::from_noise(r.noise, cfg.adc, cfg.excursion_multiplier));
  r.qcnr_db = signal::qcnr_db(r.noise);
  return r;
}

AnalyzeResult cmd_analyze(const RunConfig& cfg, const fs::path& lo_on, const fs::path& lo_off) {
  if (lo_on.empty() || lo_off.empty()) throw UsageError("analyze needs both an LO-on and an LO-off trace");
  cfg.adc.validate();
  const auto on = io::read_voltage_trace(lo_on);
  const auto off = io::read_voltage_trace(lo_off);
  return analyze_traces(cfg, on, off);
}

std::string to_text(const AnalyzeResult& r) {
  std::ostringstream out;
  out << "sigma_q2_v2: " << format_double(r.noise.sigma_q2) << '\n'
      << "sigma_e2_v2: " << format_double(r.noise.sigma_e2) << '\n'
      << "delta_dc_v: " << format_double(r.noise.delta_dc) << '\n'
      << "kappa_v2_per_mw: " << format_double(r.noise.kappa) << '\n'
      << "qcnr_db: " << format_double(r.qcnr_db) << '\n'
      << entropy::to_text(r.entropy);
  return out.str();
}

double read_h_min(const fs::path& report) {
  const auto bytes = io::read_bytes(report);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  const std::string key = "h_min_bits:";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key, 0) == 0) {
      try {
        return std::stod(line.substr(key.size()));
      } catch (const std::exception&) {
        break;
      }
    }
  }
  throw IoError("'" + report.string() + "' has no readable h_min_bits line");
}

extract::ToeplitzSeed derive_seed(const RunConfig& cfg) {
  const auto& x = cfg.extractor;
  const std::size_t bytes = (static_cast<std::size_t>(x.k + x.l - 1) + 7) / 8;
  std::mt19937_64 rng(cfg.seed ^ kSeedStream);
  std::vector<std::uint8_t> material(bytes);
  for (std::size_t i = 0; i < bytes; i += 8) {
    const auto word = rng();
    for (std::size_t b = 0; b < 8 && i + b < bytes; ++b) material[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  return extract::seed_from_entropy(material, x.k, x.l);
}

ExtractResult cmd_extract(const RunConfig& cfg, const ExtractRequest& req) {
  cfg.validate();
  if (req.trace.empty() || req.output.empty()) throw UsageError("extract needs a trace and an output path");

  auto format = io::code_format_for(cfg.adc.n_bits);
  if (const auto meta_path = io::sidecar_path(req.trace); fs::exists(meta_path)) {
    const auto meta = io::read_key_values(meta_path);
    if (auto it = meta.find("format"); it != meta.end()) format = io::parse_sample_format(it->second);
    if (auto it = meta.find("adc.n_bits"); it != meta.end() && it->second != std::to_string(cfg.adc.n_bits)) {
      throw ValidationError("adc.n_bits", "trace was recorded at n = " + it->second);
    }
  }
  if (format == io::SampleFormat::f64) throw UsageError("extract needs an ADC code trace, got float64 voltages");

  ExtractResult r;
  r.h_min = req.h_min ? *req.h_min : entropy::min_entropy(configured_entropy_inputs(cfg)).h_min;
  const auto& x = cfg.extractor;
  r.bound = entropy::leftover_hash_bound(r.h_min, x.n_bits, x.k, x.epsilon);
  if (!entropy::admissible(x, r.h_min)) {
    if (!req.override_bound) throw ExtractionRefused(refusal_message(cfg, r.h_min));
    r.overridden = true;
  }

  const auto codes = io::read_code_trace(req.trace, format);
  r.input_samples = codes.size();

  std::optional<extract::ToeplitzSeed> seed;
  if (req.seed_file.empty()) {
    seed = derive_seed(cfg);
    r.seed_file = req.output;
    r.seed_file += ".seed";
    io::write_seed_file(r.seed_file, *seed);
  } else {
    seed = io::read_seed_file(req.seed_file);
    r.seed_file = req.seed_file;
    if (seed->input_bits() != x.k || seed->output_bits() != x.l) {
      throw ValidationError("extractor.k", "seed file is for k = " + std::to_string(seed->input_bits()) +
                                               ", l = " + std::to_string(seed->output_bits()));
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const auto out = extract::extract_stream(*seed, codes, x);
  r.seconds = elapsed_seconds(start);
  r.output_bits = out.bit_count;
  r.mbit_per_s = r.seconds > 0 ? static_cast<double>(r.output_bits) / r.seconds / 1e6 : 0.0;
  r.warning = out.warning;
  io::write_bytes(req.output, out.bytes);
  return r;
}

std::string to_text(const ExtractResult& r) {
  std::ostringstream out;
  out << "input_samples: " << r.input_samples << '\n'
      << "output_bits: " << r.output_bits << '\n'
      << "h_min_bits: " << format_double(r.h_min) << '\n'
      << "leftover_hash_bound: " << format_double(r.bound) << '\n'
      << "override: " << (r.overridden ? "yes" : "no") << '\n'
      << "seed_file: " << r.seed_file.string() << '\n'
      << "seconds: " << format_double(r.seconds) << '\n'
      << "throughput_mbit_per_s: " << format_double(r.mbit_per_s) << '\n';
  if (r.warning) out << "warning: " << *r.warning << '\n';
  return out.str();
}

BenchmarkResult benchmark_extract(const RunConfig& cfg, std::size_t samples, int repeats) {
  cfg.validate();
  const auto seed = derive_seed(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::uint16_t> codes(samples);
  const auto mask = static_cast<std::uint64_t>(cfg.adc.max_code());
  for (auto& c : codes) c = static_cast<std::uint16_t>(rng() & mask);

  BenchmarkResult best;
  for (int i = 0; i < std::max(repeats, 1); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto out = extract::extract_stream(seed, codes, cfg.extractor);
    const double s = elapsed_seconds(start);
    if (i == 0 || s < best.seconds) best = {out.bit_count, s, 0.0};
  }
  best.mbit_per_s = best.seconds > 0 ? static_cast<double>(best.output_bits) / best.seconds / 1e6 : 0.0;
  return best;
}

stattests::BatteryReport cmd_test(const fs::path& bitstream, const fs::path& out_prefix,
                                  std::optional<std::size_t> bit_count) {
  const auto bytes = io::read_bytes(bitstream);
  const std::size_t n = bit_count.value_or(bytes.size() * 8);
  const auto bits = stattests::unpack_bits(bytes, n);
  const auto report = stattests::run_battery(bits);
  if (!out_prefix.empty()) {
    auto txt = out_prefix;
    txt += ".txt";
    auto csv = out_prefix;
    csv += ".csv";
    write_text(txt, stattests::to_text(report));
    write_text(csv, stattests::to_table(report));
  }
  return report;
}

RebalanceLog cmd_rebalance(const RunConfig& cfg) {
  cfg.validate();
  const auto& sc = cfg.rebalance;
  const auto& det = cfg.detection;
  const double mu0 = cfg.modulator.mu0;
  const int order = cfg.modulator.sideband_order;

  RebalanceLog log;
  log.tolerance_v = entropy::delta_tolerance(configured_entropy_inputs(cfg));
  auto noise = cfg.noise();
  noise.delta_dc = 0.0;  // the additive offset enters through the model mean
  log.deadband_v = sc.deadband_sigmas * std::sqrt(noise.total_variance() / static_cast<double>(sc.window));

  double index = optics::balance_solve(det, order, mu0).modulation_index;
  log.initial_index = index;
  log.solves = 1;

  for (std::size_t step = 1; step <= sc.steps; ++step) {
    RebalanceEntry e;
    e.step = step;
    e.static_offset_v = cfg.delta_dc + sc.offset_drift_v * static_cast<double>(step);
    e.s2 = det.s2 * (1.0 + sc.s2_drift * static_cast<double>(step));

    const double true_mean = model_offset(cfg, index, e.static_offset_v, e.s2);
    const auto window = signal::simulate_trace(noise, sc.window, (cfg.seed ^ kRebalanceStream) + step, true_mean);
    e.measured_mean_v = signal::moments(window.samples).mean;

    if (std::abs(e.measured_mean_v) > log.deadband_v) {
      // Attribute the whole measured offset to the carrier arm and re-balance for it.
      auto mod = cfg.modulator;
      mod.modulation_index = index;
      const auto arms = optics::arm_photon_numbers(mod, det);
      const double s2_est =
          (det.s1 * arms.n1 - 2.0 * std::sqrt(mu0) * e.measured_mean_v / cfg.volts_per_quadrature) / arms.n2;
      auto fail = [&](const std::string& why) {
        std::ostringstream msg;
        msg << "balance unreachable at step " << step << ": " << why << "; last good modulation index "
            << format_double(index) << " after step " << step - 1;
        return RebalanceFailure(msg.str(), log);
      };
      if (!(s2_est > 0.0) || !std::isfinite(s2_est)) throw fail("estimated s2 = " + format_double(s2_est));
      auto drifted = det;
      drifted.s2 = s2_est;
      try {
        index = optics::balance_solve(drifted, order, mu0).modulation_index;
      } catch (const NoSolutionError& ex) {
        throw fail(ex.what());
      }
      ++log.solves;
      ++log.corrections;
      e.corrected = true;
    }
    e.modulation_index = index;
    e.offset_after_v = model_offset(cfg, index, e.static_offset_v, e.s2);
    if (e.corrected && !(std::abs(e.offset_after_v) < log.tolerance_v)) log.within_band = false;
    log.entries.push_back(e);
  }
  return log;
}

std::string to_csv(const RebalanceLog& log) {
  std::ostringstream out;
  out << "step,static_offset_v,s2,measured_mean_v,corrected,modulation_index,offset_after_v,tolerance_v\n";
  for (const auto& e : log.entries) {
    out << e.step << ',' << format_double(e.static_offset_v) << ',' << format_double(e.s2) << ','
        << format_double(e.measured_mean_v) << ',' << (e.corrected ? 1 : 0) << ',' << format_double(e.modulation_index)
        << ',' << format_double(e.offset_after_v) << ',' << format_double(log.tolerance_v) << '\n';
  }
  return out.str();
}

std::string summary(const RebalanceLog& log) {
  double worst = 0;
  for (const auto& e : log.entries)
    if (e.corrected) worst = std::max(worst, std::abs(e.offset_after_v));
  std::ostringstream out;
  out << "initial_modulation_index: " << format_double(log.initial_index) << '\n'
      << "intervals: " << log.entries.size() << '\n'
      << "solves: " << log.solves << '\n'
      << "corrections: " << log.corrections << '\n'
      << "deadband_v: " << format_double(log.deadband_v) << '\n'
      << "delta_tolerance_v: " << format_double(log.tolerance_v) << '\n'
      << "max_offset_after_correction_v: " << format_double(worst) << '\n'
      << "within_band: " << (log.within_band ? "yes" : "no") << '\n';
  return out.str();
}

PipelineReport cmd_report(const RunConfig& cfg, const ReportOptions& opts) {
  cfg.validate();
  PipelineReport r;
  r.balance = operating_point(cfg);

  const auto noise = cfg.noise();
  auto off_noise = noise;
  off_noise.sigma_q2 = 0.0;
  const auto on = signal::simulate_trace(noise, cfg.sample_count, cfg.seed, r.balance->mean_offset_v);
  const auto off = signal::simulate_trace(off_noise, cfg.sample_count, cfg.seed ^ kLoOffStream);
  r.analysis = analyze_traces(cfg, on.samples, off.samples);

  const double h = r.analysis->entropy.h_min;
  const auto& x = cfg.extractor;
  r.extractor = x;
  r.admissible = entropy::admissible(x, h);
  try {
    r.largest_admissible = entropy::size_extractor(h, x.n_bits, x.k, x.epsilon);
  } catch (const InsufficientEntropyError& e) {
    r.notes.emplace_back(e.what());
  }
  if (!*r.admissible) {
    r.notes.push_back(refusal_message(cfg, h));
    return r;
  }

  const auto codes = signal::quantize(on.samples, cfg.adc);
  const auto seed = derive_seed(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto out = extract::extract_stream(seed, codes.codes, x);
  const double seconds = elapsed_seconds(start);
  if (seconds > 0) r.throughput_bits_per_s = static_cast<double>(out.bit_count) / seconds;
  if (out.warning) r.notes.push_back(*out.warning);

  if (opts.battery) {
    if (out.bit_count >= stattests::kBatteryMinBits) {
      r.battery = stattests::run_battery(stattests::unpack_bits(out.bytes, out.bit_count));
    } else {
      r.notes.push_back("battery skipped: " + std::to_string(out.bit_count) + " extracted bits, need " +
                        std::to_string(stattests::kBatteryMinBits));
    }
  }
  return r;
}

std::string to_text(const PipelineReport& r) {
  std::ostringstream out;
  if (r.balance) {
    const auto& b = *r.balance;
    out << "[balance]\n"
        << "balanced_modulation_index: " << format_double(b.balance.modulation_index) << '\n'
        << "residual: " << format_double(b.balance.residual) << '\n'
        << "operating_modulation_index: " << format_double(b.modulation_index) << '\n'
        << "n1: " << format_double(b.arms.n1) << '\n'
        << "n2: " << format_double(b.arms.n2) << '\n'
        << "quadrature_mean: " << format_double(b.quadrature) << '\n'
        << "mean_offset_v: " << format_double(b.mean_offset_v) << "\n\n";
  }
  if (r.analysis) out << "[entropy]\n" << to_text(*r.analysis) << '\n';
  if (r.extractor) {
    const auto& x = *r.extractor;
    out << "[extractor]\n"
        << "k: " << x.k << '\n'
        << "l: " << x.l << '\n'
        << "log2_epsilon: " << format_double(std::log2(x.epsilon)) << '\n'
        << "n_bits: " << x.n_bits << '\n';
    if (r.admissible) out << "admissible: " << (*r.admissible ? "yes" : "no") << '\n';
    if (r.largest_admissible) out << "l_max: " << r.largest_admissible->l << '\n';
    out << '\n';
  }
  if (r.throughput_bits_per_s) {
    out << "[throughput]\n"
        << "extract_mbit_per_s: " << format_double(*r.throughput_bits_per_s / 1e6) << "\n\n";
  }
  if (r.battery) out << "[battery]\n" << stattests::to_text(*r.battery) << '\n';
  for (const auto& n : r.notes) out << "note: " << n << '\n';
  return out.str();
}

}  // namespace vqrng::cli
