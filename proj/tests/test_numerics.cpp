#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "crmlab/errors.hpp"
#include "crmlab/quadrature.hpp"
#include "crmlab/random.hpp"
#include "crmlab/spatial.hpp"
#include "crmlab/special_functions.hpp"
#include "crmlab/stat_tests.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crm;
using namespace crm::numerics;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("integrate_1d basics") {
    CHECK(integrate_1d([](double) { return 1.0; }, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(integrate_1d([](double s) { return std::exp(-s); }, 0.0, kInf).value - 1.0) < 1e-10);
    CHECK(std::abs(integrate_1d([](double s) { return std::exp(-s * s); }, -kInf, kInf).value -
                   std::sqrt(std::numbers::pi)) < 1e-10);
    // reversed limits flip the sign
    CHECK(integrate_1d([](double x) { return x; }, 1.0, 0.0).value == doctest::Approx(-0.5));
}

TEST_CASE("integrate_1d with an endpoint singularity") {
    QuadratureOptions o;
    o.singular = EndpointSingularity::lower;
    const auto r = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, o);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
    o.singular = EndpointSingularity::upper;
    const auto q = integrate_1d([](double x) { return -std::log(1.0 - x); }, 0.0, 1.0, o);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("integrate_dlog reproduces the Frullani value at u = 1") {
    const auto r = integrate_dlog([](double s) { return std::expm1(-s) * std::exp(-s); }, 0.0, kInf);
    CHECK(std::abs(r.value + std::log(2.0)) < 1e-9);
}

TEST_CASE("integrate_pieces honours discontinuities") {
    const std::vector<double> pts{0.0, 0.3, 1.0};
    const auto r = integrate_pieces([](double x) { return x < 0.3 ? 1.0 : 2.0; }, pts);
    CHECK(r.value == doctest::Approx(0.3 + 1.4).epsilon(1e-12));
}

TEST_CASE("integrate_box in two dimensions") {
    const Window box(Point{0.0, 0.0}, Point{1.0, 2.0});
    const auto r = integrate_box([](const Point& p) { return p[0] * p[1]; }, box);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
    AxisBreaks br;
    br[0] = {0.5};
    const auto q = integrate_box([](const Point& p) { return p[0] < 0.5 ? 0.0 : 1.0; }, box, br);
    CHECK(q.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exponential integral") {
    CHECK(exp_integral_e1(0.5) == doctest::Approx(oracle::e1_series(0.5)).epsilon(1e-13));
    CHECK(exp_integral_e1(0.01) == doctest::Approx(oracle::e1_series(0.01)).epsilon(1e-13));
    CHECK(exp_integral_e1(0.5) == doctest::Approx(0.559774).epsilon(1e-6));
    CHECK(exp_integral_e1(0.01) == doctest::Approx(4.03793).epsilon(1e-6));
    // continued-fraction branch against a direct Simpson oracle
    for (const double x : {1.5, 3.0, 10.0}) {
        const double ref = oracle::simpson([](double t) { return std::exp(-t) / t; }, x, x + 60.0, 1e-15);
        CHECK(exp_integral_e1(x) == doctest::Approx(ref).epsilon(1e-10));
    }
    for (const double x : {1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0}) {
        CHECK(exp_integral_e1(x) < std::exp(-x) / x);
    }
    CHECK_THROWS_AS(exp_integral_e1(0.0), DomainError);
}

TEST_CASE("gamma cdf") {
    CHECK(gamma_cdf(1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(gamma_cdf(0.0, 2.0, 1.0) == 0.0);
    const double ref = oracle::simpson([](double x) { return x * std::exp(-x); }, 0.0, 2.0);
    CHECK(gamma_cdf(2.0, 2.0, 1.0) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(gamma_cdf(2.0, 2.0, 1.0) == doctest::Approx(0.593994).epsilon(1e-6));
    // scale enters as x / scale
    CHECK(gamma_cdf(1.0, 2.0, 0.5) == doctest::Approx(gamma_cdf(2.0, 2.0, 1.0)).epsilon(1e-14));
    for (const double a : {0.3, 1.0, 4.5, 40.0}) {
        for (const double x : {0.1, 1.0, 5.0, 60.0}) {
            CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("chi-square and Kolmogorov tails") {
    CHECK(chi_square_sf(2.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    CHECK(kolmogorov_sf(0.0) == 1.0);
    CHECK(kolmogorov_sf(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
}

TEST_CASE("Philox streams are reproducible and distinct") {
    Philox4x32 a(42, 3);
    Philox4x32 b(42, 3);
    Philox4x32 c(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs = differs || x != c();
    }
    CHECK(differs);
    Philox4x32 u(1, 0);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform_open();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("Philox4x32-10 known-answer vector") {
    // Random123 kat_vectors: philox4x32_10, zero counter and key
    const auto out = Philox4x32::encrypt({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("KS test") {
    int passes = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        Philox4x32 rng(2024, rep);
        std::vector<double> xs(10000);
        for (auto& x : xs) x = -std::log(rng.uniform_open());
        std::sort(xs.begin(), xs.end());
        const auto r = ks_test(xs, [](double x) { return gamma_cdf(x, 1.0, 1.0); });
        CHECK(r.statistic >= 0.0);
        CHECK(r.statistic <= 1.0);
        passes += r.p_value > 0.01;
    }
    CHECK(passes >= 98);
    const std::vector<double> zeros(100, 0.0);
    const auto bad = ks_test(zeros, [](double x) { return gamma_cdf(x, 1.0, 1.0); });
    CHECK(bad.p_value < 1e-6);
}

TEST_CASE("Poisson sampling and the chi-square test") {
    int passes = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        Philox4x32 rng(99, rep);
        std::vector<std::uint64_t> counts(10000);
        for (auto& k : counts) k = sample_poisson(rng, 4.0);
        const auto r = chi_square_poisson_test(counts, 4.0);
        CHECK(r.statistic >= 0.0);
        passes += r.p_value > 0.01;
    }
    CHECK(passes >= 98);
    const std::vector<std::uint64_t> zeros(1000, 0);
    CHECK(chi_square_poisson_test(zeros, 4.0).p_value < 1e-6);

    // rejection branch: mean and variance
    Philox4x32 rng(5, 0);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(sample_poisson(rng, 75.0));
        sum += k;
        sq += k * k;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 75.0) < 4.0 * std::sqrt(75.0 / n));
    CHECK(var == doctest::Approx(75.0).epsilon(0.02));
    CHECK(sample_poisson(rng, 0.0) == 0);
}
