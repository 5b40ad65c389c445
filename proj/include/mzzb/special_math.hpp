#pragma once

namespace mzzb {

/// Standard normal tail probability Q(x) = 1/2 erfc(x / sqrt 2).
double q_function(double x);

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
///
/// Series expansion below x < a + 1, modified Lentz continued fraction for
/// the complement otherwise. Throws DomainError for a <= 0 or x < 0.
double inc_gamma_reg(double a, double x);

/// Limit of Q(z / sigma) for sigma -> 0+: 1 for z < 0, 0 for z > 0, 1/2 at 0.
double q_limit(double z);

/// Q(z / sigma), falling back to q_limit when sigma == 0.
double q_ratio(double z, double sigma);

}  // namespace mzzb
