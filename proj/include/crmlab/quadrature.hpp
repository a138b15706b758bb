#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace crm::numerics {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t n_evals = 0;
    bool converged = true;

    QuadratureResult& operator+=(const QuadratureResult& other);
};

/// Which endpoint of a finite range carries an integrable singularity.
enum class EndpointSingularity { none, lower, upper };

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::size_t max_subdivisions = 10000;
    EndpointSingularity singular = EndpointSingularity::none;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
///
/// Either limit may be infinite. Semi-infinite ranges are mapped onto a finite
/// interval by x = a + t/(1-t); a declared endpoint singularity on a finite range
/// is removed with the substitution x = a + (b-a)e^v. The estimate is accepted
/// once the summed error satisfies err <= max(abs_tol, rel_tol*|value|). When the
/// subdivision budget runs out the best value is still returned with
/// converged = false.
QuadratureResult integrate_1d(const Integrand& f, double a, double b,
                              const QuadratureOptions& options = {});

QuadratureResult integrate_1d(const Integrand& f, double a, double b, double rel_tol,
                              double abs_tol);

/// Sum of integrals over consecutive pieces [p0,p1], [p1,p2], ...
/// `points` must be sorted; repeated points are skipped.
QuadratureResult integrate_pieces(const Integrand& f, std::span<const double> points,
                                  const QuadratureOptions& options = {});

/// Integral of h(s)/s ds over (s_lo, s_hi), evaluated on u = log s.
///
/// s_lo may be 0 and s_hi may be +infinity. `breaks` are split points in s
/// (discontinuities of h); those outside the range are ignored.
QuadratureResult integrate_dlog(const Integrand& h, double s_lo, double s_hi,
                                std::span<const double> breaks = {},
                                const QuadratureOptions& options = {});

}  // namespace crm::numerics
