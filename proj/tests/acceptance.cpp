// Acceptance suite: one PASS/FAIL line per criterion. Stochastic criteria that
// fail are repeated once with a derived seed before the verdict is final.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "crmlab/densities.hpp"
#include "crmlab/errors.hpp"
#include "crmlab/harness.hpp"
#include "crmlab/random.hpp"
#include "crmlab/stat_tests.hpp"

using namespace crm;

namespace {

const Window kUnit = Window::interval(0.0, 1.0);
constexpr std::uint64_t kRerunOffset = 1000003;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double limit_s;
    bool stochastic;
    std::function<Outcome(std::uint64_t)> run;
};

LevyModel gamma11() { return LevyModel::gamma(FieldFn::constant(1.0), FieldFn::constant(1.0)); }
LevyModel log_type2() { return LevyModel::log_type(FieldFn::constant(2.0), FieldFn::constant(1.0), 0.3); }
LevyModel power() { return LevyModel::power_type(FieldFn::constant(0.5), FieldFn::constant(1.0), 0.5); }

Functional exp_mass(std::optional<int> level = std::nullopt) {
    Functional f;
    f.region = Window::interval(0.2, 0.8);
    f.level = level;
    return f;
}

VerifyOptions opts(bool mutate = false) {
    VerifyOptions o;
    o.n_samples = 100000;
    if (mutate) o.log_density_shift = std::log(1.1);
    return o;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

Diffeo bump_phi() { return Diffeo::bump(0.1, 0.5, 0.2); }
Current bump_theta() { return Current::bump(0.5, Point(0.5), 0.2); }

DiscreteMeasure random_measure(Philox4x32& rng, int n) {
    std::vector<WeightedAtom> atoms;
    for (int i = 0; i < n; ++i) atoms.push_back({Point(rng.uniform()), 1e-4 + 3.0 * rng.uniform()});
    return DiscreteMeasure(atoms);
}

Current random_current(Philox4x32& rng) {
    std::vector<BumpTerm> terms;
    const int n = 1 + static_cast<int>(rng.uniform() * 3);
    for (int i = 0; i < n; ++i) {
        terms.push_back({1.6 * (rng.uniform() - 0.5), Point(0.2 + 0.6 * rng.uniform()), 0.05 + 0.25 * rng.uniform()});
    }
    return Current::bumps(terms);
}

Diffeo random_diffeo(Philox4x32& rng) {
    const double w = 0.1 + 0.2 * rng.uniform();
    return Diffeo::bump((rng.uniform() - 0.5) * 1.8 * w / kBumpDerivativeSup, 0.3 + 0.4 * rng.uniform(), w);
}

Outcome laplace(std::uint64_t seed) {
    const auto r = verify_laplace({gamma11(), kUnit, 1e-4, seed}, kUnit, {0.5, 1.0, 2.0}, 100000);
    Outcome o{r.pass, ""};
    for (const auto& p : r.points) {
        const bool closed_ok = std::abs(p.closed_form - 1.0 / (1.0 + p.t)) < 1e-14;
        o.pass = o.pass && closed_ok && std::abs(p.z_score) <= 3.0 && p.truncation_gap <= 0.01;
        o.detail += "t=" + fmt(p.t) + " z=" + fmt(p.z_score) + " gap=" + fmt(p.truncation_gap) + "; ";
    }
    return o;
}

Outcome marginal(std::uint64_t seed) {
    const auto r = verify_gamma_marginal({gamma11(), kUnit, 1e-6, seed}, kUnit, 10000);
    return {r.pass && r.shape == 1.0 && r.scale == 1.0, "KS D=" + fmt(r.ks.statistic) + " p=" + fmt(r.ks.p_value)};
}

Outcome current_qi(std::uint64_t seed) {
    Outcome o{true, ""};
    const std::vector<std::pair<std::string, LevyModel>> models{
        {"gamma", gamma11()}, {"log_type", log_type2()}, {"power_type", power()}};
    for (const auto& [name, model] : models) {
        const SamplerSpec spec{model, kUnit, 1e-6, seed};
        const auto ok = verify_current(spec, bump_theta(), exp_mass(), opts());
        const auto mutated = verify_current(spec, bump_theta(), exp_mass(), opts(true));
        o.pass = o.pass && std::abs(ok.z_score) <= 3.0 && std::abs(mutated.z_score) > 3.0;
        o.detail += name + " z=" + fmt(ok.z_score) + " mutated z=" + fmt(mutated.z_score) + "; ";
    }
    return o;
}

Outcome gamma_closed_form(std::uint64_t seed) {
    Philox4x32 rng(seed, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const double alpha = 0.5 + 1.5 * rng.uniform();
        const double beta = 0.5 + 1.5 * rng.uniform();
        const auto model = LevyModel::gamma(FieldFn::constant(alpha), FieldFn::constant(beta));
        const auto theta = random_current(rng);
        const auto eta = random_measure(rng, 1 + static_cast<int>(rng.uniform() * 20));
        const double q = current_density(model, theta, eta).log_value;
        const double c = current_density_gamma(FieldFn::constant(alpha), FieldFn::constant(beta), theta, eta).log_value;
        worst = std::max(worst, std::abs(q - c));
    }
    const Current step = Current::step(kUnit, 2.0, true);
    const DiscreteMeasure one({{Point(0.5), 2.0}});
    const double point = std::exp(current_density(gamma11(), step, one).log_value);
    const double closed = std::exp(current_density_gamma(FieldFn::constant(1.0), FieldFn::constant(1.0), step, one).log_value);
    const bool ok = worst <= 1e-6 && std::abs(point - std::exp(1.0) / 2.0) <= 1e-6 &&
                    std::abs(closed - std::exp(1.0) / 2.0) <= 1e-12 && std::abs(closed - 1.35914) < 1e-5;
    return {ok, "max |quadrature - closed form| = " + fmt(worst) + " over 100 pairs; step example " + fmt(point)};
}

Outcome diffeo_qi(std::uint64_t seed) {
    Outcome o{true, ""};
    for (const auto& [name, model] : std::vector<std::pair<std::string, LevyModel>>{{"power_type", power()},
                                                                                     {"log_type", log_type2()}}) {
        const auto r = verify_diffeo({model, kUnit, 1e-6, seed}, bump_phi(), exp_mass(), opts());
        o.pass = o.pass && std::abs(r.z_score) <= 3.0;
        o.detail += name + " z=" + fmt(r.z_score) + "; ";
    }
    try {
        (void)verify_diffeo({gamma11(), kUnit, 1e-6, seed}, bump_phi(), exp_mass(), opts());
        o.pass = false;
        o.detail += "gamma: no error";
    } catch (const InfiniteMassError&) {
        o.detail += "gamma: infinite-mass precondition error";
    }
    return o;
}

Outcome hellinger(std::uint64_t) {
    const auto phi = bump_phi();
    const auto g = diagnose_diffeo_qi(gamma11(), phi);
    const auto p = diagnose_diffeo_qi(power(), phi);
    const auto l = diagnose_diffeo_qi(log_type2(), phi);
    const auto last_increment = [](const HellingerReport& r) {
        const auto n = r.values.size();
        return std::abs(r.values[n - 1] - r.values[n - 2]) / std::abs(r.values[n - 1]);
    };
    const bool ok = g.verdict == QiVerdict::not_quasi_invariant && g.report.verdict == HellingerVerdict::diverges &&
                    g.report.fitted_log_slope > 10.0 * g.report.slope_std_error &&
                    p.verdict == QiVerdict::quasi_invariant && l.verdict == QiVerdict::quasi_invariant &&
                    last_increment(p.report) < 1e-3 && last_increment(l.report) < 1e-3;
    return {ok, "gamma " + to_string(g.verdict) + " (slope " + fmt(g.report.fitted_log_slope) + " +- " +
                    fmt(g.report.slope_std_error) + "), power_type " + to_string(p.verdict) + ", log_type " +
                    to_string(l.verdict)};
}

Outcome semidirect(std::uint64_t seed) {
    Philox4x32 rng(seed, 1);
    const auto pw = LevyModel::power_type(FieldFn::piecewise(Window::interval(0, 1, 2), {0.35, 0.65}),
                                          FieldFn::piecewise(Window::interval(0, 1, 2), {1.0, 2.0}), 0.5);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto& model = rep % 2 == 0 ? pw : log_type2();
        const GroupElement g{random_diffeo(rng), random_current(rng)};
        const auto eta = random_measure(rng, 1 + static_cast<int>(rng.uniform() * 20));
        const double direct = semidirect_density(model, g, eta).log_value;
        const double factored = diffeo_density(model, g.phi, apply_current(g.theta.reciprocal(), eta)).log_value +
                                current_density(model, g.theta, eta).log_value;
        worst = std::max(worst, std::abs(direct - factored));
    }
    const auto r = verify_semidirect({power(), kUnit, 1e-6, seed}, {bump_phi(), bump_theta()}, exp_mass(), opts());
    return {worst <= 1e-10 && std::abs(r.z_score) <= 3.0,
            "max factorization gap " + fmt(worst) + "; verify_semidirect z=" + fmt(r.z_score)};
}

Outcome partial(std::uint64_t seed) {
    Outcome o{true, ""};
    for (const int n : {2, 4, 8}) {
        const auto r = verify_partial({gamma11(), kUnit, 1e-6, seed}, {bump_phi(), bump_theta()}, exp_mass(n), opts());
        o.pass = o.pass && std::abs(r.z_score) <= 3.0;
        o.detail += "n=" + std::to_string(n) + " z=" + fmt(r.z_score) + "; ";
    }
    return o;
}

Outcome structural(std::uint64_t seed) {
    Philox4x32 rng(seed, 2);
    std::string failed;
    double group_gap = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto eta = random_measure(rng, 10);
        const GroupElement g1{random_diffeo(rng), random_current(rng)};
        const GroupElement g2{random_diffeo(rng), random_current(rng)};
        const GroupElement g3{random_diffeo(rng), random_current(rng)};
        const auto gap = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
            if (a.size() != b.size()) return 1.0;
            double m = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                m = std::max(m, std::abs(a.atoms()[i].location[0] - b.atoms()[i].location[0]));
                m = std::max(m, std::abs(a.atoms()[i].weight - b.atoms()[i].weight) / b.atoms()[i].weight);
            }
            return m;
        };
        group_gap = std::max(group_gap, gap(apply_group(compose(compose(g1, g2), g3), eta),
                                            apply_group(compose(g1, compose(g2, g3)), eta)));
        group_gap = std::max(group_gap, gap(apply_group(compose(g1, g2), eta), apply_group(g1, apply_group(g2, eta))));
        group_gap = std::max(group_gap, gap(apply_group(compose(inverse(g1), g1), eta), eta));
        group_gap = std::max(group_gap, gap(apply_group(compose(g1, GroupElement::identity()), eta),
                                            apply_group(g1, eta)));
        if (r_map(r_inverse(eta)) != eta) failed += "r_map ";
    }
    if (group_gap > 1e-10) failed += "group_axioms ";

    Philox4x32 drng(seed, 3);
    const auto eta = random_measure(drng, 10);
    const bool identities = current_density(gamma11(), Current::identity(), eta).log_value == 0.0 &&
                            diffeo_density(power(), Diffeo::identity(), eta).log_value == 0.0 &&
                            semidirect_density(power(), GroupElement::identity(), eta).log_value == 0.0 &&
                            partial_density(gamma11(), GroupElement::identity(), eta, 4).log_value == 0.0 &&
                            hellinger_integral(gamma11(), Diffeo::identity(), 1e-5) == 0.0;
    if (!identities) failed += "identity_densities ";

    double frullani_gap = 0.0;
    for (const double u : {-0.9, -0.5, 0.0, 0.5, 1.0, 3.0, 10.0}) {
        frullani_gap = std::max(frullani_gap, std::abs(frullani_quadrature(u).value - frullani(u)));
    }
    if (frullani_gap > 1e-8) failed += "frullani ";

    const MeasureSampler sampler({gamma11(), kUnit, 0.01, seed});
    std::vector<std::uint64_t> counts(10000);
    parallel_for(counts.size(), [&](std::size_t i) { counts[i] = sampler.sample(i).size(); });
    const auto chi = numerics::chi_square_poisson_test(counts, sampler.total_mass());
    if (chi.p_value < 0.01) failed += "poisson_counts ";

    return {failed.empty(), "group gap " + fmt(group_gap) + ", frullani gap " + fmt(frullani_gap) +
                                ", Poisson chi-square p=" + fmt(chi.p_value) +
                                (failed.empty() ? "" : ", failed: " + failed)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Laplace transform (gamma)", 60, true, laplace},
        {2, "gamma marginal KS", 60, true, marginal},
        {3, "current quasi-invariance + mutation", 300, true, current_qi},
        {4, "gamma closed form vs quadrature", 30, false, gamma_closed_form},
        {5, "diffeomorphism quasi-invariance", 180, true, diffeo_qi},
        {6, "Hellinger diagnostics", 120, false, hellinger},
        {7, "semidirect factorization", 120, true, semidirect},
        {8, "partial quasi-invariance (gamma)", 300, true, partial},
        {9, "structural invariants", 180, true, structural},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        bool rerun = false;
        try {
            o = c.run(1);
            if (!o.pass && c.stochastic) {
                rerun = true;
                o = c.run(1 + kRerunOffset);
            }
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && secs < c.limit_s;
        failures += pass ? 0 : 1;
        std::printf("criterion %d %-40s %s  [%.1f s / %.0f s%s] %s\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                    secs, c.limit_s, rerun ? ", rerun" : "", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
