#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace crm::numerics {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double dof = 0.0;  ///< chi-square only
};

/// One-sample Kolmogorov-Smirnov test of sorted samples against a continuous CDF.
/// The p-value uses the Stephens-corrected argument (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
TestResult ks_test(std::span<const double> sorted_samples, const std::function<double(double)>& cdf);

/// Chi-square goodness of fit of integer counts against Poisson(mean).
/// Bins are pooled from both tails until every expected count is >= 5.
TestResult chi_square_poisson_test(std::span<const std::uint64_t> counts, double mean);

}  // namespace crm::numerics
