#include "crmlab/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "crmlab/errors.hpp"

namespace crm::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

double gamma_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("incomplete gamma series did not converge");
}

double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw NumericError("incomplete gamma continued fraction did not converge");
}

void check_gamma_args(double a, double x) {
    if (!(a > 0.0)) {
        throw DomainError("incomplete gamma requires a > 0");
    }
    if (!(x >= 0.0)) {
        throw DomainError("incomplete gamma requires x >= 0");
    }
}

}  // namespace

double exp_integral_e1(double x) {
    if (!(x > 0.0)) {
        throw DomainError("E1(x) requires x > 0");
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        double sum = 0.0;
        double fact = 1.0;
        for (int k = 1; k < kMaxIter; ++k) {
            fact *= -x / k;
            const double term = fact / k;
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps * 0.5) {
                break;
            }
        }
        return -std::numbers::egamma - std::log(x) - sum;
    }
    // Continued fraction for e^x E1(x), modified Lentz.
    double b = x + 1.0;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return h * std::exp(-x);
        }
    }
    throw NumericError("E1 continued fraction did not converge");
}

double gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double gamma_cdf(double x, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw DomainError("gamma_cdf requires positive shape and scale");
    }
    if (std::isnan(x)) {
        throw DomainError("gamma_cdf of NaN");
    }
    if (x <= 0.0) return 0.0;
    return gamma_p(shape, x / scale);
}

double chi_square_sf(double x, double dof) {
    if (!(dof > 0.0)) {
        throw DomainError("chi-square needs positive degrees of freedom");
    }
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

double kolmogorov_sf(double lambda) {
    if (std::isnan(lambda)) {
        throw DomainError("kolmogorov_sf of NaN");
    }
    if (lambda <= 0.0) return 1.0;
    constexpr double pi = std::numbers::pi;
    if (lambda < 1.18) {
        // Jacobi theta form, converges fast for small lambda.
        const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
        double sum = 0.0;
        for (int k = 1; k < 200; k += 2) {
            const double term = std::pow(y, static_cast<double>(k * k));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        const double cdf = std::sqrt(2.0 * pi) / lambda * sum;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-10) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace crm::numerics
