#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "vqrng/special_functions.hpp"

using namespace vqrng;

TEST_CASE("erf and erfc against 50-digit references") {
  for (double x = -6.0; x <= 6.0; x += 0.0625) {
    const double ref = static_cast<double>(oracle::erf_hp(x));
    CHECK(std::abs(special::erf(x) - ref) <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ref), 1e-300));
    const double refc = static_cast<double>(oracle::erfc_hp(x));
    CHECK(std::abs(special::erfc(x) - refc) <= 1e-14 * refc);
  }
  for (double x : {8.0, 12.0, 20.0, 26.0}) {
    const double refc = static_cast<double>(oracle::erfc_hp(x));
    CHECK(std::abs(special::erfc(x) - refc) <= 1e-13 * refc);
  }
  CHECK(special::erf(0.0) == 0.0);
}

TEST_CASE("erfinv inverts erf") {
  for (double y = -0.999999; y < 1.0; y += 0.0173) {
    CHECK(special::erfinv(y) == doctest::Approx(boost::math::erf_inv(y)).epsilon(1e-13));
  }
  CHECK(std::isinf(special::erfinv(1.0)));
  CHECK(std::isinf(special::erfinv(-1.0)));
}

TEST_CASE("regularized incomplete gamma") {
  for (double a : {0.5, 1.0, 2.5, 5.0, 40.0, 512.0}) {
    for (double x : {0.01, 0.5, 1.0, 3.6, 10.0, 50.0, 600.0}) {
      const double q = oracle::igamc(a, x);
      CHECK(special::gamma_q(a, x) == doctest::Approx(q).epsilon(1e-11).scale(0));
      CHECK(std::abs(special::gamma_p(a, x) + special::gamma_q(a, x) - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("normal cdf") {
  CHECK(special::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(special::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
}
