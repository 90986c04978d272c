#pragma once

// Error function family and regularized incomplete gamma functions.
//
// All routines are self-contained (power series, modified-Lentz continued
// fractions, Halley refinement) so that accuracy does not depend on the
// platform libm beyond exp/log/sqrt.

namespace vqrng::special {

double erf(double x);
double erfc(double x);

/// Inverse of erf on (-1, 1); returns +-infinity at +-1.
double erfinv(double y);

/// Standard normal cumulative distribution function.
double normal_cdf(double z);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), the `igamc`
/// of the SP 800-22 reference code.
double gamma_q(double a, double x);

}  // namespace vqrng::special
