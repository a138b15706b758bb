#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crmlab/densities.hpp"
#include "crmlab/group.hpp"
#include "crmlab/sampler.hpp"
#include "crmlab/stat_tests.hpp"
#include "json.hpp"

namespace crm {

/// A bounded test functional F on discrete measures.
struct Functional {
    enum class Kind { exp_neg_mass, exp_neg_integral, indicator_count };

    Kind kind = Kind::exp_neg_mass;
    Window region;
    double t = 1.0;
    /// When set, F only sees atoms with weight >= 1/level.
    std::optional<int> level;

    /// exp(-t eta(region)), exp(-t <tent_region, eta>), or 1{#atoms in region <= t}.
    [[nodiscard]] double operator()(const DiscreteMeasure& eta) const;
    /// Smallest weight F can see (0 without a level).
    [[nodiscard]] double horizon() const;
    void validate() const;
};

std::string to_string(Functional::Kind k);
Functional::Kind functional_kind_from_string(const std::string& s);

struct VerifyOptions {
    std::size_t n_samples = 100000;
    /// Added to every log-density; log(1.1) gives the +10% mutation check.
    double log_density_shift = 0.0;
};

struct VerifyReport {
    std::string op;
    McEstimate lhs;
    McEstimate rhs;
    /// Standard error of the paired differences lhs_i - rhs_i.
    double paired_std_error = 0.0;
    double z_score = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
    nlohmann::ordered_json config_echo = nlohmann::ordered_json::object();
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    [[nodiscard]] nlohmann::ordered_json to_json(bool with_timing = true) const;
};

VerifyReport verify_current(const SamplerSpec& spec, const Current& theta, const Functional& f,
                            const VerifyOptions& options = {});
VerifyReport verify_diffeo(const SamplerSpec& spec, const Diffeo& phi, const Functional& f,
                           const VerifyOptions& options = {});
VerifyReport verify_semidirect(const SamplerSpec& spec, const GroupElement& g, const Functional& f,
                               const VerifyOptions& options = {});
/// `f` must carry a level n.
VerifyReport verify_partial(const SamplerSpec& spec, const GroupElement& g, const Functional& f,
                            const VerifyOptions& options = {});

struct LaplacePoint {
    double t = 0.0;
    McEstimate mc;
    double truncated_exact = 0.0;
    double closed_form = 0.0;
    double truncation_gap = 0.0;  ///< |truncated_exact - closed_form|
    double z_score = 0.0;
    bool pass = false;
};

struct LaplaceReport {
    std::vector<LaplacePoint> points;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
    nlohmann::ordered_json config_echo = nlohmann::ordered_json::object();

    [[nodiscard]] nlohmann::ordered_json to_json(bool with_timing = true) const;
};

/// E exp(-t eta(delta)): Monte Carlo vs truncated quadrature (3 SE) and truncated
/// quadrature vs (1 + alpha t)^(-beta vol) (0.01 absolute), for each t.
LaplaceReport verify_laplace(const SamplerSpec& spec, const Window& delta, const std::vector<double>& t_list,
                             std::size_t n_samples = 100000);

struct MarginalReport {
    numerics::TestResult ks;
    double shape = 0.0;
    double scale = 0.0;
    std::size_t n_samples = 0;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
    nlohmann::ordered_json config_echo = nlohmann::ordered_json::object();

    [[nodiscard]] nlohmann::ordered_json to_json(bool with_timing = true) const;
};

/// KS test of eta(delta) against Gamma(beta vol(delta) * shape_factor, alpha) at level 0.01.
MarginalReport verify_gamma_marginal(const SamplerSpec& spec, const Window& delta, std::size_t n_samples = 10000,
                                     double shape_factor = 1.0);

/// Default echo of a SamplerSpec (family, window, eps_trunc, seed).
nlohmann::ordered_json echo_spec(const SamplerSpec& spec);

}  // namespace crm
