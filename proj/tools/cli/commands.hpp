#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "vqrng/error.hpp"
#include "vqrng/extract.hpp"
#include "vqrng/stattests.hpp"

namespace vqrng::cli {

namespace fs = std::filesystem;

/// Missing or contradictory command-line inputs (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// The requested extractor violates the leftover-hash bound (exit code 3).
class ExtractionRefused : public Error {
 public:
  using Error::Error;
};

/// Modulation index in use, the arms it produces and the resulting output mean.
struct OperatingPoint {
  optics::BalancePoint balance;
  double modulation_index = 0;
  optics::ArmPhotonNumbers arms;
  double quadrature = 0;
  double mean_offset_v = 0;  ///< volts_per_quadrature * quadrature
};

OperatingPoint operating_point(const RunConfig& cfg);

struct SimulateOutputs {
  fs::path lo_on_volts;
  fs::path lo_on_codes;
  fs::path lo_off_volts;
  fs::path config;
  OperatingPoint op;
  signal::ClipReport clip;
};

/// Balance, simulate LO-on and LO-off traces, quantize; writes
/// lo_on.f64, lo_on.u8|u16, lo_off.f64 (each with a .meta sidecar) and run.conf.
SimulateOutputs cmd_simulate(const RunConfig& cfg, const fs::path& out_dir);

struct AnalyzeResult {
  signal::NoiseModel noise;
  double qcnr_db = 0;
  entropy::EntropyReport entropy;
};

AnalyzeResult analyze_traces(const RunConfig& cfg, std::span<const double> lo_on, std::span<const double> lo_off);
AnalyzeResult cmd_analyze(const RunConfig& cfg, const fs::path& lo_on, const fs::path& lo_off);
std::string to_text(const AnalyzeResult& r);

/// h_min_bits from a report written by `analyze`.
double read_h_min(const fs::path& report);

struct ExtractRequest {
  fs::path trace;      ///< ADC code trace
  fs::path seed_file;  ///< empty: derive from cfg.seed and write <output>.seed
  fs::path output;
  std::optional<double> h_min;  ///< empty: evaluate from the configured noise model
  bool override_bound = false;
};

struct ExtractResult {
  std::size_t input_samples = 0;
  std::size_t output_bits = 0;
  double seconds = 0;
  double mbit_per_s = 0;
  double h_min = 0;
  double bound = 0;  ///< k h_min / n - 2 log2(1/eps)
  bool overridden = false;
  std::optional<std::string> warning;
  fs::path seed_file;
};

/// Refuses with ExtractionRefused, writing nothing, unless l < bound or the
/// override is set.
ExtractResult cmd_extract(const RunConfig& cfg, const ExtractRequest& req);
std::string to_text(const ExtractResult& r);

struct BenchmarkResult {
  std::size_t output_bits = 0;
  double seconds = 0;
  double mbit_per_s = 0;
};

/// In-memory extract_stream throughput on `samples` uniform codes; best of `repeats`.
BenchmarkResult benchmark_extract(const RunConfig& cfg, std::size_t samples, int repeats);

/// Toeplitz seed expanded from cfg.seed with a dedicated mt19937_64 stream.
extract::ToeplitzSeed derive_seed(const RunConfig& cfg);

/// Runs the battery over the first `bit_count` bits (all when empty) and
/// writes <out_prefix>.txt and <out_prefix>.csv.
stattests::BatteryReport cmd_test(const fs::path& bitstream, const fs::path& out_prefix,
                                  std::optional<std::size_t> bit_count);

struct RebalanceEntry {
  std::size_t step = 0;
  double static_offset_v = 0;  ///< drifted additive offset
  double s2 = 0;               ///< drifted carrier-arm sensitivity
  double measured_mean_v = 0;
  bool corrected = false;
  double modulation_index = 0;
  double offset_after_v = 0;   ///< model output mean at the index in force after this step
};

struct RebalanceLog {
  std::vector<RebalanceEntry> entries;
  double initial_index = 0;
  double tolerance_v = 0;
  double deadband_v = 0;
  std::size_t solves = 0;        ///< balance solves, including the initial one
  std::size_t corrections = 0;
  bool within_band = true;       ///< |offset_after| < tolerance after every correction
};

/// Balance is unreachable for the drifted detector; carries the log up to the
/// last good step.
class RebalanceFailure : public Error {
 public:
  RebalanceFailure(const std::string& what, RebalanceLog log) : Error(what), log_(std::move(log)) {}
  const RebalanceLog& log() const { return log_; }

 private:
  RebalanceLog log_;
};

RebalanceLog cmd_rebalance(const RunConfig& cfg);
/// CSV with one row per interval.
std::string to_csv(const RebalanceLog& log);
std::string summary(const RebalanceLog& log);

struct ReportOptions {
  bool battery = true;
};

struct PipelineReport {
  std::optional<OperatingPoint> balance;
  std::optional<AnalyzeResult> analysis;
  std::optional<entropy::ExtractorParams> extractor;
  std::optional<bool> admissible;
  std::optional<entropy::ExtractorParams> largest_admissible;
  std::optional<stattests::BatteryReport> battery;
  std::optional<double> throughput_bits_per_s;
  std::vector<std::string> notes;
};

/// In-memory simulate, analyze, extract and test with one configuration.
PipelineReport cmd_report(const RunConfig& cfg, const ReportOptions& opts = {});
std::string to_text(const PipelineReport& r);

}  // namespace vqrng::cli
