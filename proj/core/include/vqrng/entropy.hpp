#pragma once

#include <string>

#include "vqrng/signal.hpp"

namespace vqrng::entropy {

/// Inputs to the worst-case min-entropy bound of a digitized Gaussian signal
/// whose classical part is treated as adversarial.
struct EntropyInputs {
  double sigma_q = 0;   ///< quantum standard deviation, V
  double sigma_e = 0;   ///< classical standard deviation, V
  double delta_dc = 0;  ///< DC offset, V
  signal::AdcConfig adc;
  double excursion_multiplier = 5.0;  ///< classical noise bounded by +-multiplier*sigma_e

  static EntropyInputs from_noise(const signal::NoiseModel& noise, const signal::AdcConfig& adc,
                                  double excursion_multiplier = 5.0);

  /// e_max = multiplier * sigma_e + |delta_dc|
  double e_max() const;
};

enum class DominantTerm {
  a_term,  ///< edge bin swallowed by the classical excursion
  b_term,  ///< central bin of width delta
};

/// The two candidates of the guessing-probability bound.
struct TermPair {
  double a = 0;
  double b = 0;
};

struct EntropyReport {
  double h_min = 0;  ///< bits per sample, clamped to [0, n_bits]
  double a_term = 0;
  double b_term = 0;
  DominantTerm dominant = DominantTerm::b_term;
  double delta_tolerance = 0;  ///< |Delta| at which A overtakes B, V
  double e_max = 0;
  double bin_width = 0;
  int n_bits = 0;
};

/// Leftover-hash-lemma sizing of a k-bit to l-bit 2-universal hash.
struct ExtractorParams {
  int k = 1024;
  int l = 512;
  double epsilon = 0x1.0p-100;
  int n_bits = 8;

  bool operator==(const ExtractorParams&) const = default;
};

/// A = (erf[(e_max - R + 3 delta/2) / (sqrt2 sigma_q)] + 1) / 2
/// B = erf(delta / (2 sqrt2 sigma_q))
/// A is evaluated as erfc(-z)/2, which is algebraically identical and keeps
/// relative accuracy deep in the tail.
TermPair min_entropy_terms(double e_max, double r_half, double bin_width, double sigma_q);

/// h_min = -log2(max(A, B)), with the delta tolerance of the same inputs.
/// Throws DomainError when sigma_q <= 0.
EntropyReport min_entropy(const EntropyInputs& inputs);

/// |Delta| at which A = B (inputs.delta_dc is ignored). Returns 0 when A >= B
/// already at zero offset.
double delta_tolerance(const EntropyInputs& inputs);

/// k h_min / n - 2 log2(1/epsilon); any admissible l must lie strictly below.
double leftover_hash_bound(double h_min, int n_bits, int k, double epsilon);

bool admissible(const ExtractorParams& params, double h_min);

/// Largest l (a multiple of 8) strictly below the leftover-hash bound.
/// Throws InsufficientEntropyError when no positive l fits.
ExtractorParams size_extractor(double h_min, int n_bits, int k, double epsilon);

/// "key: value" lines.
std::string to_text(const EntropyReport& report);

const char* to_string(DominantTerm term);

}  // namespace vqrng::entropy
