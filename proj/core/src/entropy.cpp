#include "vqrng/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "vqrng/error.hpp"
#include "vqrng/format.hpp"
#include "vqrng/special_functions.hpp"

namespace vqrng::entropy {
namespace {

void check_inputs(const EntropyInputs& in) {
  if (!(in.sigma_q > 0.0)) throw DomainError("sigma_q must be > 0 for a min-entropy bound");
  if (!(in.sigma_e >= 0.0)) throw DomainError("sigma_e must be >= 0");
  if (!(in.excursion_multiplier >= 0.0)) throw DomainError("excursion multiplier must be >= 0");
  in.adc.validate();
}

TermPair terms_at_offset(const EntropyInputs& in, double abs_offset) {
  const double e_max = in.excursion_multiplier * in.sigma_e + abs_offset;
  return min_entropy_terms(e_max, in.adc.r_half, in.adc.bin_width(), in.sigma_q);
}

}  // namespace

EntropyInputs EntropyInputs::from_noise(const signal::NoiseModel& noise, const signal::AdcConfig& adc,
                                        double excursion_multiplier) {
  return {std::sqrt(noise.sigma_q2), std::sqrt(noise.sigma_e2), noise.delta_dc, adc, excursion_multiplier};
}

double EntropyInputs::e_max() const { return excursion_multiplier * sigma_e + std::fabs(delta_dc); }

TermPair min_entropy_terms(double e_max, double r_half, double bin_width, double sigma_q) {
  const double scale = std::numbers::sqrt2 * sigma_q;
  const double z = (e_max - r_half + 1.5 * bin_width) / scale;
  return {0.5 * special::erfc(-z), special::erf(bin_width / (2.0 * scale))};
}

EntropyReport min_entropy(const EntropyInputs& inputs) {
  check_inputs(inputs);
  const auto t = terms_at_offset(inputs, std::fabs(inputs.delta_dc));

  EntropyReport report;
  report.a_term = t.a;
  report.b_term = t.b;
  report.dominant = t.a > t.b ? DominantTerm::a_term : DominantTerm::b_term;
  const double guess = std::max(t.a, t.b);
  const double n = inputs.adc.n_bits;
  report.h_min = guess > 0.0 ? std::clamp(-std::log2(guess), 0.0, n) : n;
  report.delta_tolerance = delta_tolerance(inputs);
  report.e_max = inputs.e_max();
  report.bin_width = inputs.adc.bin_width();
  report.n_bits = inputs.adc.n_bits;
  return report;
}

double delta_tolerance(const EntropyInputs& inputs) {
  check_inputs(inputs);
  // A grows monotonically with the offset while B does not depend on it.
  auto excess = [&](double offset) {
    const auto t = terms_at_offset(inputs, offset);
    return t.a - t.b;
  };
  if (excess(0.0) >= 0.0) return 0.0;

  double lo = 0.0;
  double hi = std::max(inputs.adc.r_half, 1e-6);
  int doublings = 0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 2000 || !std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double leftover_hash_bound(double h_min, int n_bits, int k, double epsilon) {
  return static_cast<double>(k) * h_min / static_cast<double>(n_bits) - 2.0 * std::log2(1.0 / epsilon);
}

bool admissible(const ExtractorParams& p, double h_min) {
  if (p.l <= 0 || p.k <= 0 || p.n_bits <= 0) return false;
  return static_cast<double>(p.l) < leftover_hash_bound(h_min, p.n_bits, p.k, p.epsilon);
}

ExtractorParams size_extractor(double h_min, int n_bits, int k, double epsilon) {
  if (n_bits < 1) throw DomainError("n_bits must be >= 1");
  if (!(h_min > 0.0 && h_min <= n_bits)) throw DomainError("h_min must lie in (0, n_bits]");
  if (k <= 0 || k % 8 != 0) throw DomainError("k must be a positive multiple of 8");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");

  const double bound = leftover_hash_bound(h_min, n_bits, k, epsilon);
  if (!(bound > 0.0)) {
    std::ostringstream msg;
    msg << "insufficient entropy: k*h_min/n - 2*log2(1/eps) = " << format_double(bound) << " <= 0";
    throw InsufficientEntropyError(msg.str());
  }
  ExtractorParams params{k, 8 * static_cast<int>(std::ceil(bound / 8.0)) - 8, epsilon, n_bits};
  while (params.l > 0 && !admissible(params, h_min)) params.l -= 8;
  if (params.l <= 0) {
    throw InsufficientEntropyError("insufficient entropy: bound " + format_double(bound) +
                                   " leaves no positive multiple of 8");
  }
  return params;
}

const char* to_string(DominantTerm term) { return term == DominantTerm::a_term ? "A" : "B"; }

std::string to_text(const EntropyReport& r) {
  std::ostringstream out;
  out << "h_min_bits: " << format_double(r.h_min) << '\n'
      << "a_term: " << format_double(r.a_term) << '\n'
      << "b_term: " << format_double(r.b_term) << '\n'
      << "dominant: " << to_string(r.dominant) << '\n'
      << "delta_tolerance_v: " << format_double(r.delta_tolerance) << '\n'
      << "e_max_v: " << format_double(r.e_max) << '\n'
      << "bin_width_v: " << format_double(r.bin_width) << '\n'
      << "n_bits: " << r.n_bits << '\n';
  return out.str();
}

}  // namespace vqrng::entropy
