#pragma once

namespace crm::numerics {

/// Exponential integral E1(x) = int_x^inf e^-t / t dt for x > 0.
/// Power series for x <= 1, modified Lentz continued fraction above; ~1e-15 relative.
double exp_integral_e1(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
double gamma_q(double a, double x);

/// CDF of the gamma law with the given shape and scale.
double gamma_cdf(double x, double shape, double scale);

/// Upper tail of the chi-square law with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

/// Kolmogorov limiting survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_sf(double lambda);

}  // namespace crm::numerics
