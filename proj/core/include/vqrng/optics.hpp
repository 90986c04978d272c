#pragma once

#include <complex>
#include <vector>

namespace vqrng::optics {

/// Electro-optic phase modulator driving the carrier into 2S+1 sideband modes.
struct ModulatorConfig {
  double mu0 = 1e6;             ///< mean carrier photons per measurement window
  int sideband_order = 3;       ///< S, modes k run over [-S, S]
  double modulation_index = 0;  ///< m
  double phase = 0;             ///< theta (rad)
  double modulation_frequency_hz = 4.2e9;  ///< Omega, metadata only

  /// Throws ValidationError naming the offending "modulator.*" key.
  void validate() const;
  bool operator==(const ModulatorConfig&) const = default;
};

/// Two-arm detection module after the carrier-rejection filter.
struct DetectionConfig {
  double eta_sb = 0.5248074602497725;  ///< sideband-path transmittance, 10^-0.28
  double eta_c = 0.4677351412871982;   ///< carrier-path transmittance, 10^-0.33
  double extinction = 1e-4;            ///< vartheta, carrier fraction leaking into arm 1
  double s1 = 0.87;                    ///< sensitivity of the sideband-arm photodiode
  double s2 = 0.88;                    ///< sensitivity of the carrier-arm photodiode

  void validate() const;
  /// Single-s form used where one sensitivity is reported: (s1 + s2) / 2.
  double effective_sensitivity() const { return 0.5 * (s1 + s2); }
  bool operator==(const DetectionConfig&) const = default;
};

/// Coherent amplitudes alpha_k for k in [-S, S], stored at index k + S.
struct SidebandState {
  int order = 0;
  std::vector<std::complex<double>> amplitudes;

  std::complex<double> at(int k) const { return amplitudes.at(static_cast<std::size_t>(k + order)); }
  double total_photons() const;
};

struct ArmPhotonNumbers {
  double n1 = 0;  ///< sideband arm
  double n2 = 0;  ///< carrier arm
};

struct BalancePoint {
  double modulation_index = 0;
  double beta = 0;
  double target_d00_squared = 0;  ///< |d^S_00(beta)|^2 that balances the arms
  double residual = 0;            ///< |s1 n1 - s2 n2| / (s1 n1)
  ArmPhotonNumbers arms;
};

/// Wigner small-d element d^S_{0k}(beta), standard (Varshalovich) phase
/// convention. Evaluated by downward three-term recurrence in k from the
/// closed-form edge k = S, normalised so that sum_k d^2 = 1.
double wigner_d(int order, int k, double beta);

/// All d^S_{0k}(beta), k = -S..S, at index k + S.
std::vector<double> wigner_d_row(int order, double beta);

/// cos(beta) = 1 - (m / (S + 1/2))^2 / 2.
double beta_from_index(double modulation_index, int order);

/// Inverse of beta_from_index: m = 2 (S + 1/2) sin(beta / 2).
double index_from_beta(double beta, int order);

SidebandState sideband_state(const ModulatorConfig& cfg);

/// Closed-form arm photon numbers
///   n1 = mu0 eta_sb (1 - (1 - vartheta) |d00|^2),  n2 = mu0 eta_c (1 - vartheta) |d00|^2.
ArmPhotonNumbers arm_photon_numbers(const ModulatorConfig& cfg, const DetectionConfig& det);
ArmPhotonNumbers arm_photon_numbers(double mu0, double d00, const DetectionConfig& det);

/// Smallest modulation index m* >= 0 with s1 n1 = s2 n2. Searches beta on
/// [0, first zero of d00] where |d00|^2 decreases monotonically.
/// Throws NoSolutionError if the required |d00|^2 exceeds 1.
BalancePoint balance_solve(const DetectionConfig& det, int order, double mu0);

/// x0 = (n1 - n2) s / (2 sqrt(mu0)).
double quadrature_mean(const ArmPhotonNumbers& n, double sensitivity, double mu0);

/// Per-arm photocurrent form x0 = (s1 n1 - s2 n2) / (2 sqrt(mu0)); reduces to
/// the single-s form when s1 == s2 and vanishes at the balance point.
double quadrature_mean(const ArmPhotonNumbers& n, double s1, double s2, double mu0);

}  // namespace vqrng::optics
