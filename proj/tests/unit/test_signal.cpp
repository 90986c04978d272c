#include <doctest.h>

#include <cmath>
#include <vector>

#include "vqrng/error.hpp"
#include "vqrng/signal.hpp"

using namespace vqrng;
using namespace vqrng::signal;

namespace {
constexpr double kSigmaQ2 = 1.0051e-3;
constexpr double kSigmaE2 = 5.49e-5;
}  // namespace

TEST_CASE("zero-variance trace is the offset") {
  NoiseModel nm;
  nm.delta_dc = 0.1;
  const auto t = simulate_trace(nm, 5, 42);
  REQUIRE(t.samples.size() == 5);
  for (double v : t.samples) CHECK(v == 0.1);
  CHECK_THROWS_AS(simulate_trace(nm, 0, 1), DomainError);
}

TEST_CASE("simulated variance matches the model") {
  NoiseModel nm;
  nm.sigma_q2 = kSigmaQ2;
  nm.sigma_e2 = kSigmaE2;
  const auto on = simulate_trace(nm, 1'000'000, 7);
  CHECK(std::abs(moments(on.samples).variance / 1.06e-3 - 1.0) < 0.01);

  nm.sigma_q2 = 0;
  const auto off = simulate_trace(nm, 1'000'000, 8);
  CHECK(std::abs(moments(off.samples).variance / kSigmaE2 - 1.0) < 0.01);
}

TEST_CASE("simulation is deterministic in the seed") {
  NoiseModel nm;
  nm.sigma_q2 = kSigmaQ2;
  nm.sigma_e2 = kSigmaE2;
  CHECK(simulate_trace(nm, 1000, 3).samples == simulate_trace(nm, 1000, 3).samples);
  CHECK(simulate_trace(nm, 1000, 3).samples != simulate_trace(nm, 1000, 4).samples);
}

TEST_CASE("quantizer rails and midpoint") {
  const AdcConfig adc;
  CHECK(adc.bin_width() == doctest::Approx(0.0015625));
  CHECK(quantize_sample(-0.2, adc) == 0);
  CHECK(quantize_sample(0.0, adc) == 128);
  CHECK(quantize_sample(-1.0, adc) == 0);
  const std::vector<double> v{-0.2, 0.0, 1.2, -5.0, 0.1999};
  const auto ct = quantize(v, adc);
  CHECK(ct.codes == std::vector<std::uint16_t>{0, 128, 255, 0, 255});
  CHECK(ct.clip.high == 1);
  CHECK(ct.clip.low == 1);
  CHECK(quantize_sample(code_midpoint(77, adc), adc) == 77);
}

TEST_CASE("quantizer at 16 bits") {
  AdcConfig adc;
  adc.n_bits = 16;
  CHECK(quantize_sample(0.0, adc) == 32768);
  CHECK(quantize_sample(10.0, adc) == 65535);
}

TEST_CASE("calibrate_noise") {
  NoiseModel nm;
  nm.sigma_q2 = kSigmaQ2;
  nm.sigma_e2 = kSigmaE2;
  const auto on = simulate_trace(nm, 1'000'000, 11);
  nm.sigma_q2 = 0;
  const auto off = simulate_trace(nm, 1'000'000, 12);
  const auto cal = calibrate_noise(on.samples, off.samples, 40.0);
  CHECK(std::abs(cal.sigma_q2 / kSigmaQ2 - 1.0) < 0.03);
  CHECK(std::abs(cal.sigma_e2 / kSigmaE2 - 1.0) < 0.03);
  CHECK(cal.kappa == doctest::Approx(cal.sigma_q2 / 40.0));

  const auto same = calibrate_noise(on.samples, on.samples);
  CHECK(same.sigma_q2 == 0.0);
  CHECK(same.delta_dc == doctest::Approx(moments(on.samples).mean));

  CHECK_THROWS_AS(calibrate_noise(off.samples, on.samples), CalibrationError);
  const std::vector<double> short_trace(10, 0.0);
  CHECK_THROWS_AS(calibrate_noise(short_trace, short_trace), CalibrationError);
}

TEST_CASE("qcnr") {
  NoiseModel nm;
  nm.sigma_q2 = nm.sigma_e2 = 2e-4;
  CHECK(qcnr_db(nm) == doctest::Approx(0.0));
  nm.sigma_q2 = 10 * nm.sigma_e2;
  CHECK(qcnr_db(nm) == doctest::Approx(10.0));
  nm.sigma_q2 = kSigmaQ2;
  nm.sigma_e2 = kSigmaE2;
  CHECK(std::abs(qcnr_db(nm) - 12.63) < 0.005);
}

TEST_CASE("variance_vs_power") {
  const std::vector<double> p{0.0, 40.0};
  const auto pts = variance_vs_power(2.513e-5, kSigmaE2, p);
  CHECK(pts[0].variance == doctest::Approx(kSigmaE2));
  CHECK(pts[1].variance == doctest::Approx(1.06e-3).epsilon(1e-3));
}

TEST_CASE("config validation") {
  AdcConfig adc;
  adc.n_bits = 0;
  CHECK_THROWS_AS(adc.validate(), ValidationError);
  adc = {};
  adc.r_half = -1;
  CHECK_THROWS_AS(adc.validate(), ValidationError);
  NoiseModel nm;
  nm.sigma_e2 = -1;
  CHECK_THROWS_AS(nm.validate(), ValidationError);
}
