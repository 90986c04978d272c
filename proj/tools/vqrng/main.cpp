#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "vqrng/format.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kRefused = 3 };

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  vqrng::io::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace vqrng;
  using namespace vqrng::cli;

  CLI::App app{"Vacuum-fluctuation QRNG pipeline: simulate, analyze, extract, rebalance, test, report"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override one key, e.g. --set adc.n_bits=12")->take_all();
  bool dump_config = false;
  app.add_flag("--print-config", dump_config, "print the effective configuration to stderr");

  auto* sim = app.add_subcommand("simulate", "balance, simulate LO-on/off traces and quantize");
  std::string sim_out = "traces";
  std::optional<std::size_t> sim_count;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("-o,--out", sim_out, "output directory")->capture_default_str();
  sim->add_option("-n,--count", sim_count, "samples per trace");
  sim->add_option("--seed", sim_seed, "simulation seed");

  auto* ana = app.add_subcommand("analyze", "calibrate noise and audit min-entropy from LO-on/off voltage traces");
  std::string lo_on, lo_off, ana_out;
  ana->add_option("--lo-on", lo_on, "LO-on float64 trace")->required()->check(CLI::ExistingFile);
  ana->add_option("--lo-off", lo_off, "LO-off float64 trace")->required()->check(CLI::ExistingFile);
  ana->add_option("-o,--out", ana_out, "report file (default stdout)");

  auto* ext = app.add_subcommand("extract", "Toeplitz-hash an ADC code trace into a bitstream");
  ExtractRequest req;
  std::string trace, seed_file, out_path, entropy_report;
  std::optional<double> h_min;
  bool bench = false;
  std::size_t bench_samples = std::size_t{1} << 24;
  int bench_repeats = 5;
  ext->add_option("-t,--trace", trace, "ADC code trace (u8 or u16)");
  ext->add_option("--seed-file", seed_file, "Toeplitz seed file (default: derived from the config seed)");
  ext->add_option("-o,--out", out_path, "output bitstream");
  auto* hmin_opt = ext->add_option("--h-min", h_min, "min-entropy per sample, bits");
  ext->add_option("--entropy-report", entropy_report, "take h_min from an analyze report")->excludes(hmin_opt);
  ext->add_flag("--override", req.override_bound, "extract even if the leftover-hash bound is violated");
  ext->add_flag("--benchmark", bench, "measure in-memory throughput instead of processing a file");
  ext->add_option("--bench-samples", bench_samples, "samples per benchmark pass")->capture_default_str();
  ext->add_option("--bench-repeats", bench_repeats, "benchmark passes (best is reported)")->capture_default_str();

  auto* reb = app.add_subcommand("rebalance", "closed-loop modulation-index feedback under a drift scenario");
  std::string reb_log;
  reb->add_option("--log", reb_log, "CSV log of every interval");

  auto* tst = app.add_subcommand("test", "run the statistical battery on a packed bitstream");
  std::string tst_in, tst_out;
  std::optional<std::size_t> tst_bits;
  tst->add_option("-i,--input", tst_in, "packed MSB-first bitstream")->required()->check(CLI::ExistingFile);
  tst->add_option("-o,--out", tst_out, "report prefix; writes <prefix>.txt and <prefix>.csv");
  tst->add_option("--bits", tst_bits, "use only the first N bits");

  auto* rep = app.add_subcommand("report", "run the whole pipeline in memory and print a sectioned report");
  std::string rep_out;
  bool no_battery = false;
  rep->add_option("-o,--out", rep_out, "report file (default stdout)");
  rep->add_flag("--no-battery", no_battery, "skip the statistical battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (sim_count) cfg.sample_count = *sim_count;
    if (sim_seed) cfg.seed = *sim_seed;
    if (dump_config) std::cerr << serialize(cfg);

    if (*sim) {
      const auto out = cmd_simulate(cfg, sim_out);
      std::cout << "modulation_index: " << format_double(out.op.modulation_index) << '\n'
                << "balance_residual: " << format_double(out.op.balance.residual) << '\n'
                << "mean_offset_v: " << format_double(out.op.mean_offset_v) << '\n'
                << "clipped_samples: " << out.clip.total() << '\n'
                << "lo_on_volts: " << out.lo_on_volts.string() << '\n'
                << "lo_on_codes: " << out.lo_on_codes.string() << '\n'
                << "lo_off_volts: " << out.lo_off_volts.string() << '\n';
    } else if (*ana) {
      emit(to_text(cmd_analyze(cfg, lo_on, lo_off)), ana_out);
    } else if (*ext) {
      if (bench) {
        const auto b = benchmark_extract(cfg, bench_samples, bench_repeats);
        std::cout << "output_bits: " << b.output_bits << '\n'
                  << "seconds: " << format_double(b.seconds) << '\n'
                  << "throughput_mbit_per_s: " << format_double(b.mbit_per_s) << '\n';
      } else {
        if (trace.empty() || out_path.empty()) throw UsageError("extract needs --trace and --out");
        req.trace = trace;
        req.seed_file = seed_file;
        req.output = out_path;
        req.h_min = entropy_report.empty() ? h_min : std::optional<double>(read_h_min(entropy_report));
        const auto r = cmd_extract(cfg, req);
        if (r.overridden) std::cerr << "warning: leftover-hash bound overridden\n";
        std::cout << to_text(r);
      }
    } else if (*reb) {
      try {
        const auto log = cmd_rebalance(cfg);
        if (!reb_log.empty()) emit(to_csv(log), reb_log);
        std::cout << summary(log);
        if (!log.within_band) {
          std::cerr << "error: offset left the delta-tolerance band after a correction\n";
          return kRuntime;
        }
      } catch (const RebalanceFailure& f) {
        if (!reb_log.empty()) emit(to_csv(f.log()), reb_log);
        std::cout << summary(f.log());
        throw;
      }
    } else if (*tst) {
      const auto r = cmd_test(tst_in, tst_out, tst_bits);
      std::cout << stattests::to_text(r);
    } else if (*rep) {
      emit(to_text(cmd_report(cfg, {.battery = !no_battery})), rep_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kValidation;
  } catch (const ExtractionRefused& e) {
    std::cerr << e.what() << '\n';
    return kRefused;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
