#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vqrng/error.hpp"
#include "vqrng/entropy.hpp"

using namespace vqrng;
using namespace vqrng::entropy;

namespace {

EntropyInputs reference_inputs() {
  EntropyInputs in;
  in.sigma_q = 0.03170;
  in.sigma_e = 0.0074095;
  return in;
}

}  // namespace

TEST_CASE("min_entropy on the reference detector") {
  const auto in = reference_inputs();
  const auto r = min_entropy(in);
  const auto [a, b] = oracle::entropy_terms(in.e_max(), in.adc.r_half, in.adc.bin_width(), in.sigma_q);
  CHECK(r.dominant == DominantTerm::b_term);
  CHECK(r.b_term == doctest::Approx(0.019662).epsilon(1e-4));
  CHECK(std::abs(r.a_term - a) <= 1e-12 * a);
  CHECK(std::abs(r.b_term - b) <= 1e-12 * b);
  CHECK(std::abs(r.h_min - oracle::h_min(in.e_max(), in.adc.r_half, in.adc.bin_width(), in.sigma_q)) < 1e-9);
  CHECK(r.h_min == doctest::Approx(5.67).epsilon(0.002));
}

TEST_CASE("classical excursion covering the range drives h_min to zero") {
  auto in = reference_inputs();
  in.sigma_e = 0.1;  // e_max = 0.5 V > R
  const auto r = min_entropy(in);
  CHECK(r.dominant == DominantTerm::a_term);
  CHECK(r.a_term > 0.999);
  CHECK(r.h_min < 0.01);
  CHECK(delta_tolerance(in) == 0.0);
}

TEST_CASE("B follows its small-argument asymptote") {
  const double sigma_q = 0.0317;
  for (double delta : {1e-3, 1e-4, 1e-5}) {
    const auto t = min_entropy_terms(0.0, 100.0, delta, sigma_q);
    const double asym = delta / (std::sqrt(2 * std::numbers::pi) * sigma_q);
    CHECK(std::abs(t.b / asym - 1.0) < 0.01);
  }
}

TEST_CASE("h_min decreases as the classical excursion grows") {
  const auto in = reference_inputs();
  double prev = 1e9;
  for (double e = 0.0; e < 0.3; e += 0.01) {
    const auto t = min_entropy_terms(e, in.adc.r_half, in.adc.bin_width(), in.sigma_q);
    const double h = -std::log2(std::max(t.a, t.b));
    CHECK(h <= prev + 1e-15);
    prev = h;
  }
}

TEST_CASE("h_min grows with the range at fixed bin width") {
  const auto in = reference_inputs();
  double prev = -1;
  for (double r = 0.1; r < 0.5; r += 0.02) {
    const auto t = min_entropy_terms(in.e_max(), r, in.adc.bin_width(), in.sigma_q);
    const double h = -std::log2(std::max(t.a, t.b));
    CHECK(h >= prev - 1e-15);
    prev = h;
  }
}

TEST_CASE("delta_tolerance agrees with a bisection oracle") {
  const auto in = reference_inputs();
  const double delta = in.adc.bin_width();
  auto f = [&](double off) {
    const auto [a, b] = oracle::entropy_terms(5 * in.sigma_e + off, in.adc.r_half, delta, in.sigma_q);
    return a - b;
  };
  const double ref = oracle::bisect(f, 0.0, in.adc.r_half);
  const double got = delta_tolerance(in);
  CHECK(std::abs(got - ref) < 1e-6);
  CHECK(got == doctest::Approx(0.095).epsilon(0.01));
}

TEST_CASE("delta_tolerance closed form without classical noise") {
  auto in = reference_inputs();
  in.sigma_e = 0;
  const double delta = in.adc.bin_width();
  const double b = std::erf(delta / (2 * std::numbers::sqrt2 * in.sigma_q));
  const double closed = in.adc.r_half - 1.5 * delta +
                        std::numbers::sqrt2 * in.sigma_q * boost::math::erf_inv(2 * b - 1);
  CHECK(delta_tolerance(in) == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("min_entropy input checks") {
  auto in = reference_inputs();
  in.sigma_q = 0;
  CHECK_THROWS_AS(min_entropy(in), DomainError);
}

TEST_CASE("extractor sizing") {
  constexpr double eps = 0x1.0p-100;
  CHECK(leftover_hash_bound(5.85, 8, 1024, eps) == doctest::Approx(548.8));
  CHECK(admissible({1024, 512, eps, 8}, 5.85));
  CHECK_FALSE(admissible({1024, 552, eps, 8}, 5.85));
  CHECK(size_extractor(5.85, 8, 1024, eps).l == 544);
  CHECK(size_extractor(8.0, 8, 1024, eps).l == 816);
  CHECK_THROWS_AS(size_extractor(0.1, 8, 1024, eps), InsufficientEntropyError);

  const double h = min_entropy(reference_inputs()).h_min;
  CHECK(admissible({1024, 512, eps, 8}, h));
  const auto p = size_extractor(h, 8, 1024, eps);
  CHECK(admissible(p, h));
  CHECK_FALSE(admissible({p.k, p.l + 8, eps, 8}, h));
}

TEST_CASE("report text") {
  const auto txt = to_text(min_entropy(reference_inputs()));
  CHECK(txt.find("h_min_bits: ") != std::string::npos);
  CHECK(txt.find("dominant: B") != std::string::npos);
}
