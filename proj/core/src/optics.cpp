#include "vqrng/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vqrng/error.hpp"

namespace vqrng::optics {
namespace {

constexpr double kRescaleThreshold = 1e250;

void check_order(int order) {
  if (order < 1) throw DomainError("sideband order S must be >= 1, got " + std::to_string(order));
}

double max_index(int order) { return 2.0 * (order + 0.5); }

double d00(int order, double beta) { return wigner_d_row(order, beta)[static_cast<std::size_t>(order)]; }

// Smallest beta > 0 with d^S_00(beta) = 0, i.e. arccos of the largest root of P_S.
double first_zero_of_d00(int order) {
  const double step = std::numbers::pi / (8.0 * (order + 1));
  double lo = 0.0;
  double hi = step;
  while (d00(order, hi) > 0.0) {
    lo = hi;
    hi += step;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (d00(order, mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

void ModulatorConfig::validate() const {
  if (!(mu0 > 0.0)) throw ValidationError("modulator.mu0", "must be > 0");
  if (sideband_order < 1) throw ValidationError("modulator.S", "must be >= 1");
  if (!(modulation_index >= 0.0)) throw ValidationError("modulator.m", "must be >= 0");
  if (modulation_index > max_index(sideband_order)) {
    throw ValidationError("modulator.m", "exceeds 2(S + 0.5) = " + std::to_string(max_index(sideband_order)) +
                                             "; no real beta exists");
  }
  if (!std::isfinite(phase)) throw ValidationError("modulator.theta", "must be finite");
}

void DetectionConfig::validate() const {
  if (!(eta_sb > 0.0 && eta_sb <= 1.0)) throw ValidationError("detection.eta_sb", "must lie in (0, 1]");
  if (!(eta_c > 0.0 && eta_c <= 1.0)) throw ValidationError("detection.eta_c", "must lie in (0, 1]");
  if (!(extinction >= 0.0 && extinction < 1.0)) throw ValidationError("detection.vartheta", "must lie in [0, 1)");
  if (!(s1 > 0.0)) throw ValidationError("detection.s1", "must be > 0");
  if (!(s2 > 0.0)) throw ValidationError("detection.s2", "must be > 0");
}

double SidebandState::total_photons() const {
  double sum = 0.0;
  for (const auto& a : amplitudes) sum += std::norm(a);
  return sum;
}

std::vector<double> wigner_d_row(int order, double beta) {
  check_order(order);
  if (!(beta >= 0.0 && beta <= std::numbers::pi)) throw DomainError("beta must lie in [0, pi]");

  const auto S = static_cast<std::size_t>(order);
  std::vector<double> row(2 * S + 1, 0.0);
  const double s = std::sin(beta);
  if (s == 0.0) {
    // d_{0k}(0) = delta_k0, d_{0k}(pi) = (-1)^S delta_k0
    row[S] = (beta < 1.0 || order % 2 == 0) ? 1.0 : -1.0;
    return row;
  }
  const double cot = std::cos(beta) / s;

  // d[j] holds d_{0j} for j = 0..S (up to a positive scale), d[S + 1] = 0.
  std::vector<double> d(S + 2, 0.0);
  d[S] = 1.0;
  for (int k = order; k >= 1; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const double upper = std::sqrt(static_cast<double>(order - k) * (order + k + 1));
    const double lower = std::sqrt(static_cast<double>(order + k) * (order - k + 1));
    d[ku - 1] = (2.0 * k * cot * d[ku] - upper * d[ku + 1]) / lower;
    if (std::fabs(d[ku - 1]) > kRescaleThreshold) {
      for (std::size_t j = ku - 1; j <= S; ++j) d[j] /= kRescaleThreshold;
    }
  }

  double peak = 0.0;
  for (std::size_t j = 0; j <= S; ++j) peak = std::max(peak, std::fabs(d[j]));
  double norm = 0.0;
  for (std::size_t j = 0; j <= S; ++j) {
    d[j] /= peak;
    norm += (j == 0 ? 1.0 : 2.0) * d[j] * d[j];
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (std::size_t j = 0; j <= S; ++j) {
    const double v = d[j] * scale;
    row[S + j] = v;
    row[S - j] = (j % 2 == 0) ? v : -v;  // d_{0,-k} = (-1)^k d_{0k}
  }
  return row;
}

double wigner_d(int order, int k, double beta) {
  check_order(order);
  if (k < -order || k > order) {
    throw DomainError("|k| = " + std::to_string(std::abs(k)) + " exceeds order S = " + std::to_string(order));
  }
  return wigner_d_row(order, beta)[static_cast<std::size_t>(k + order)];
}

double beta_from_index(double modulation_index, int order) {
  check_order(order);
  if (!(modulation_index >= 0.0 && modulation_index <= max_index(order))) {
    throw DomainError("modulation index outside [0, 2(S + 0.5)]; no real beta");
  }
  const double ratio = modulation_index / (order + 0.5);
  const double c = std::clamp(1.0 - 0.5 * ratio * ratio, -1.0, 1.0);
  return std::acos(c);
}

double index_from_beta(double beta, int order) {
  check_order(order);
  if (!(beta >= 0.0 && beta <= std::numbers::pi)) throw DomainError("beta must lie in [0, pi]");
  return max_index(order) * std::sin(0.5 * beta);
}

SidebandState sideband_state(const ModulatorConfig& cfg) {
  cfg.validate();
  const double beta = beta_from_index(cfg.modulation_index, cfg.sideband_order);
  const auto row = wigner_d_row(cfg.sideband_order, beta);
  const double amplitude = std::sqrt(cfg.mu0);

  SidebandState state;
  state.order = cfg.sideband_order;
  state.amplitudes.reserve(row.size());
  for (int k = -cfg.sideband_order; k <= cfg.sideband_order; ++k) {
    const double d = row[static_cast<std::size_t>(k + cfg.sideband_order)];
    state.amplitudes.push_back(amplitude * d * std::polar(1.0, -k * cfg.phase));
  }
  return state;
}

ArmPhotonNumbers arm_photon_numbers(double mu0, double d00_value, const DetectionConfig& det) {
  const double carrier = (1.0 - det.extinction) * d00_value * d00_value;
  return {mu0 * det.eta_sb * (1.0 - carrier), mu0 * det.eta_c * carrier};
}

ArmPhotonNumbers arm_photon_numbers(const ModulatorConfig& cfg, const DetectionConfig& det) {
  cfg.validate();
  det.validate();
  const double beta = beta_from_index(cfg.modulation_index, cfg.sideband_order);
  return arm_photon_numbers(cfg.mu0, d00(cfg.sideband_order, beta), det);
}

BalancePoint balance_solve(const DetectionConfig& det, int order, double mu0) {
  det.validate();
  check_order(order);
  if (!(mu0 > 0.0)) throw DomainError("mu0 must be > 0");

  const double arm1 = det.s1 * det.eta_sb;
  const double arm2 = det.s2 * det.eta_c;
  const double target = arm1 / ((1.0 - det.extinction) * (arm1 + arm2));
  if (target > 1.0) {
    throw NoSolutionError("arm balance unreachable: required |d00|^2 = " + std::to_string(target) + " > 1");
  }

  auto imbalance = [&](double beta) {
    const auto n = arm_photon_numbers(mu0, d00(order, beta), det);
    return det.s1 * n.n1 - det.s2 * n.n2;
  };

  // imbalance is increasing on [0, first zero]; <= 0 at 0, > 0 at the zero.
  double lo = 0.0;
  double hi = first_zero_of_d00(order);
  if (imbalance(lo) >= 0.0) {
    hi = lo;
  } else {
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (imbalance(mid) < 0.0 ? lo : hi) = mid;
    }
  }
  const double beta = std::fabs(imbalance(lo)) < std::fabs(imbalance(hi)) ? lo : hi;

  BalancePoint point;
  point.beta = beta;
  point.modulation_index = index_from_beta(beta, order);
  point.target_d00_squared = target;
  point.arms = arm_photon_numbers(mu0, d00(order, beta), det);
  point.residual = std::fabs(det.s1 * point.arms.n1 - det.s2 * point.arms.n2) / (det.s1 * point.arms.n1);
  return point;
}

double quadrature_mean(const ArmPhotonNumbers& n, double sensitivity, double mu0) {
  if (!(mu0 > 0.0)) throw DomainError("mu0 must be > 0");
  return (n.n1 - n.n2) * sensitivity / (2.0 * std::sqrt(mu0));
}

double quadrature_mean(const ArmPhotonNumbers& n, double s1, double s2, double mu0) {
  if (!(mu0 > 0.0)) throw DomainError("mu0 must be > 0");
  return (s1 * n.n1 - s2 * n.n2) / (2.0 * std::sqrt(mu0));
}

}  // namespace vqrng::optics
