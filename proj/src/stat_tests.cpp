#include "crmlab/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "crmlab/errors.hpp"
#include "crmlab/special_functions.hpp"

namespace crm::numerics {

TestResult ks_test(std::span<const double> sorted_samples, const std::function<double(double)>& cdf) {
    const std::size_t n = sorted_samples.size();
    if (n < 10) {
        throw DomainError("ks_test needs at least 10 samples");
    }
    if (!std::is_sorted(sorted_samples.begin(), sorted_samples.end())) {
        throw DomainError("ks_test requires sorted samples");
    }
    const double nd = static_cast<double>(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sorted_samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
    }
    d = std::clamp(d, 0.0, 1.0);
    const double root = std::sqrt(nd);
    return {d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d), 0.0};
}

TestResult chi_square_poisson_test(std::span<const std::uint64_t> counts, double mean) {
    if (counts.size() < 30) {
        throw DomainError("chi-square test needs at least 30 observations");
    }
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw DomainError("chi-square test needs a positive finite mean");
    }
    const double n = static_cast<double>(counts.size());
    const std::uint64_t max_count = *std::max_element(counts.begin(), counts.end());

    // pmf(k) for k up to well past the mean and the observed maximum.
    const auto k_max = static_cast<std::size_t>(std::max<double>(static_cast<double>(max_count),
                                                                   mean + 20.0 * std::sqrt(mean) + 20.0));
    std::vector<double> pmf(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) {
        const double kd = static_cast<double>(k);
        pmf[k] = std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
    }
    std::vector<double> observed(k_max + 1, 0.0);
    for (const auto c : counts) {
        observed[static_cast<std::size_t>(c)] += 1.0;
    }

    // Bins [lo_k, hi_k]; the first absorbs the lower tail and the last absorbs k >= its start.
    struct Bin {
        double expected = 0.0;
        double observed = 0.0;
    };
    std::vector<Bin> bins;
    Bin current;
    double cumulative = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
        current.expected += n * pmf[k];
        current.observed += observed[k];
        cumulative += pmf[k];
        if (current.expected >= 5.0) {
            bins.push_back(current);
            current = Bin{};
        }
    }
    // Upper tail beyond k_max.
    current.expected += n * std::max(0.0, 1.0 - cumulative);
    if (!bins.empty()) {
        bins.back().expected += current.expected;
        bins.back().observed += current.observed;
    } else {
        bins.push_back(current);
    }
    if (bins.size() < 2) {
        throw DomainError("chi-square test: too few observations to form two bins with expected count >= 5");
    }
    double stat = 0.0;
    for (const auto& b : bins) {
        const double diff = b.observed - b.expected;
        stat += diff * diff / b.expected;
    }
    const double dof = static_cast<double>(bins.size() - 1);
    return {stat, chi_square_sf(stat, dof), dof};
}

}  // namespace crm::numerics
