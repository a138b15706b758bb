#include "crmlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "crmlab/errors.hpp"
#include "crmlab/spatial.hpp"
#include "crmlab/special_functions.hpp"

namespace crm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::ordered_json estimate_json(const McEstimate& e) {
    nlohmann::ordered_json j;
    j["mean"] = e.mean;
    j["se"] = e.std_error;
    j["n"] = e.n_samples;
    return j;
}

double tent(const Window& region, const Point& x) {
    if (!region.contains(x)) return 0.0;
    double w = 1.0;
    for (std::size_t i = 0; i < region.dim(); ++i) {
        const double half = 0.5 * (region.upper()[i] - region.lower()[i]);
        const double mid = 0.5 * (region.upper()[i] + region.lower()[i]);
        w *= std::max(0.0, 1.0 - std::abs(x[i] - mid) / half);
    }
    return w;
}

void require_inside(const Window& window, const Window& inner, double margin, const std::string& what) {
    if (!window.contains(inner, margin)) {
        throw ConfigError(what + " " + to_string(inner) + " must lie inside the window " + to_string(window) +
                          (margin > 0.0 ? " with margin " + std::to_string(margin) : ""));
    }
}

// How the truncation at eps_t interacts with F under a current with the given sup.
// Returns true when the no-level bias bound must be checked after the run.
bool check_horizon(const SamplerSpec& spec, double sup_theta, const Functional& f) {
    const double reach = spec.eps_trunc * sup_theta;
    if (f.level) {
        if (!(f.horizon() > reach)) {
            throw ConfigError("functional level threshold 1/n = " + std::to_string(f.horizon()) +
                              " must exceed eps_trunc * sup(theta) = " + std::to_string(reach));
        }
        return false;
    }
    return true;
}

// int_region int_0^{eps_t} l(x, s) ds dx: expected total weight of the untracked atoms.
double untracked_weight(const SamplerSpec& spec, const Window& region) {
    const LevyModel& model = spec.model;
    numerics::AxisBreaks breaks;
    for (std::size_t i = 0; i < region.dim(); ++i) breaks[i] = model.spatial_breaks(i);
    const auto r = numerics::integrate_box(
        [&](const Point& x) {
            return numerics::integrate_dlog([&](double s) { return model.l(x, s) * s; }, 0.0, spec.eps_trunc,
                                            model.s_breaks())
                .value;
        },
        region, breaks);
    return r.value;
}

void check_bias(const SamplerSpec& spec, double sup_theta, const Functional& f, const VerifyReport& rep) {
    if (rep.paired_std_error == 0.0) return;
    const double bound = f.t * sup_theta * untracked_weight(spec, f.region);
    if (!(bound < 0.1 * rep.paired_std_error)) {
        throw ConfigError("truncation bias bound t * sup(theta) * E[untracked weight] = " + std::to_string(bound) +
                          " is not below 0.1 SE = " + std::to_string(0.1 * rep.paired_std_error) +
                          "; lower eps_trunc or give the functional a level");
    }
}

template <typename Transform, typename Density>
VerifyReport run_paired(const std::string& op, const SamplerSpec& spec, const Functional& f,
                        const VerifyOptions& options, Transform&& transform, Density&& density) {
    if (options.n_samples < 2) {
        throw ConfigError("n_samples must be at least 2");
    }
    const MeasureSampler sampler(spec);
    const std::size_t n = options.n_samples;
    std::vector<double> lhs(n);
    std::vector<double> rhs(n);
    parallel_for(n, [&](std::size_t i) {
        const DiscreteMeasure eta = sampler.sample(i);
        lhs[i] = f(transform(eta));
        const double fe = f(eta);
        rhs[i] = fe == 0.0 ? 0.0 : fe * std::exp(density(eta).log_value + options.log_density_shift);
    });
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = lhs[i] - rhs[i];

    VerifyReport rep;
    rep.op = op;
    rep.lhs = summarize(lhs);
    rep.rhs = summarize(rhs);
    const McEstimate d = summarize(diff);
    rep.paired_std_error = d.std_error;
    if (d.mean == 0.0) {
        rep.z_score = 0.0;
    } else {
        rep.z_score = d.std_error > 0.0 ? d.mean / d.std_error : std::copysign(std::numeric_limits<double>::infinity(), d.mean);
    }
    rep.pass = std::abs(d.mean) <= 3.0 * d.std_error;
    rep.seed = spec.seed;
    rep.config_echo = echo_spec(spec);
    rep.config_echo["n_samples"] = n;
    rep.config_echo["functional"] = to_string(f.kind);
    if (options.log_density_shift != 0.0) rep.extra["log_density_shift"] = options.log_density_shift;
    return rep;
}

void require_constant_gamma(const SamplerSpec& spec, double& alpha, double& beta) {
    const LevyModel& m = spec.model;
    if (m.family() != Family::gamma || !m.alpha().constant_value() || !m.beta().constant_value()) {
        throw PreconditionError("this check needs the gamma family with constant alpha and beta");
    }
    alpha = *m.alpha().constant_value();
    beta = *m.beta().constant_value();
}

}  // namespace

double Functional::operator()(const DiscreteMeasure& eta) const {
    const double threshold = horizon();
    switch (kind) {
        case Kind::exp_neg_mass: {
            double m = 0.0;
            for (const auto& a : eta) {
                if (a.weight >= threshold && region.contains(a.location)) m += a.weight;
            }
            return std::exp(-t * m);
        }
        case Kind::exp_neg_integral: {
            double m = 0.0;
            for (const auto& a : eta) {
                if (a.weight >= threshold) m += tent(region, a.location) * a.weight;
            }
            return std::exp(-t * m);
        }
        case Kind::indicator_count: {
            double count = 0.0;
            for (const auto& a : eta) {
                if (a.weight >= threshold && region.contains(a.location)) count += 1.0;
            }
            return count <= t ? 1.0 : 0.0;
        }
    }
    return 0.0;
}

double Functional::horizon() const { return level ? 1.0 / static_cast<double>(*level) : 0.0; }

void Functional::validate() const {
    if (level && *level < 1) {
        throw ConfigError("functional level must be >= 1");
    }
    if (kind != Kind::indicator_count && !(t >= 0.0)) {
        throw ConfigError("exponential functionals need t >= 0 to stay bounded");
    }
    if (kind == Kind::indicator_count && !level) {
        throw ConfigError("indicator_count needs a level: without one it counts infinitely many atoms");
    }
}

std::string to_string(Functional::Kind k) {
    switch (k) {
        case Functional::Kind::exp_neg_mass:
            return "exp_neg_mass";
        case Functional::Kind::exp_neg_integral:
            return "exp_neg_integral";
        case Functional::Kind::indicator_count:
            return "indicator_count";
    }
    return "unknown";
}

Functional::Kind functional_kind_from_string(const std::string& s) {
    if (s == "exp_neg_mass") return Functional::Kind::exp_neg_mass;
    if (s == "exp_neg_integral") return Functional::Kind::exp_neg_integral;
    if (s == "indicator_count") return Functional::Kind::indicator_count;
    throw ConfigError("unknown functional kind '" + s + "'");
}

nlohmann::ordered_json VerifyReport::to_json(bool with_timing) const {
    nlohmann::ordered_json j;
    j["op"] = op;
    j["config_echo"] = config_echo;
    j["lhs"] = estimate_json(lhs);
    j["rhs"] = estimate_json(rhs);
    j["paired_se"] = paired_std_error;
    j["z"] = z_score;
    j["pass"] = pass;
    j["seed"] = seed;
    if (with_timing) j["runtime_ms"] = runtime_ms;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

nlohmann::ordered_json echo_spec(const SamplerSpec& spec) {
    nlohmann::ordered_json j;
    const LevyModel& m = spec.model;
    j["family"] = to_string(m.family());
    if (m.family() != Family::custom) {
        const auto a = m.alpha().constant_value();
        const auto b = m.beta().constant_value();
        j["alpha"] = a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(m.alpha().cell_values());
        j["beta"] = b ? nlohmann::ordered_json(*b) : nlohmann::ordered_json(m.beta().cell_values());
        if (m.family() != Family::gamma) j["eps_family"] = m.eps_family();
    }
    j["window"] = to_string(spec.window);
    j["eps_trunc"] = spec.eps_trunc;
    j["seed"] = spec.seed;
    return j;
}

VerifyReport verify_current(const SamplerSpec& spec, const Current& theta, const Functional& f,
                            const VerifyOptions& options) {
    const auto start = Clock::now();
    f.validate();
    require_inside(spec.window, f.region, 0.0, "functional region");
    if (theta.support()) require_inside(spec.window, *theta.support(), 0.0, "supp(theta)");
    const bool bias_check = !theta.is_identity() && check_horizon(spec, theta.sup_bound(), f);

    DensityOptions dopts;
    dopts.correction_floor = spec.eps_trunc;
    const CurrentDensity density(spec.model, theta, dopts);
    VerifyReport rep = run_paired(
        "verify-current", spec, f, options, [&](const DiscreteMeasure& eta) { return apply_current(theta, eta); },
        density);
    rep.config_echo["current"] = theta.descriptor();
    if (bias_check) check_bias(spec, theta.sup_bound(), f, rep);
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

VerifyReport verify_diffeo(const SamplerSpec& spec, const Diffeo& phi, const Functional& f,
                           const VerifyOptions& options) {
    const auto start = Clock::now();
    f.validate();
    require_inside(spec.window, f.region, 0.0, "functional region");
    if (phi.support()) require_inside(spec.window, *phi.support(), 0.0, "supp(phi)");
    const DiffeoDensity density(spec.model, phi);
    VerifyReport rep = run_paired(
        "verify-diffeo", spec, f, options, [&](const DiscreteMeasure& eta) { return apply_diffeo(phi, eta); },
        density);
    rep.config_echo["diffeo"] = phi.descriptor();
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

VerifyReport verify_semidirect(const SamplerSpec& spec, const GroupElement& g, const Functional& f,
                               const VerifyOptions& options) {
    const auto start = Clock::now();
    f.validate();
    require_inside(spec.window, f.region, 0.0, "functional region");
    if (g.theta.support()) require_inside(spec.window, *g.theta.support(), 0.0, "supp(theta)");
    if (g.phi.support()) require_inside(spec.window, *g.phi.support(), 0.0, "supp(phi)");
    const bool bias_check = !g.theta.is_identity() && check_horizon(spec, g.theta.sup_bound(), f);

    DensityOptions dopts;
    dopts.correction_floor = spec.eps_trunc;
    const SemidirectDensity density(spec.model, g, dopts);
    VerifyReport rep = run_paired(
        "verify-semidirect", spec, f, options, [&](const DiscreteMeasure& eta) { return apply_group(g, eta); },
        density);
    rep.config_echo["group_element"] = g.descriptor();
    if (bias_check) check_bias(spec, g.theta.sup_bound(), f, rep);
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

VerifyReport verify_partial(const SamplerSpec& spec, const GroupElement& g, const Functional& f,
                            const VerifyOptions& options) {
    const auto start = Clock::now();
    f.validate();
    if (!f.level) {
        throw ConfigError(
            "verify-partial needs a functional with a level n; the level-n identity says nothing about functionals "
            "that see atoms of every size");
    }
    require_inside(spec.window, f.region, 0.0, "functional region");
    if (g.theta.support()) require_inside(spec.window, *g.theta.support(), 0.0, "supp(theta)");
    if (g.phi.support()) require_inside(spec.window, *g.phi.support(), 0.0, "supp(phi)");
    check_horizon(spec, g.theta.sup_bound(), f);
    const int k = partial_level_k(g.theta, *f.level);
    if (!(spec.eps_trunc < g.theta.inf_bound() / k)) {
        throw ConfigError("eps_trunc must be below inf(theta)/k = " + std::to_string(g.theta.inf_bound() / k) +
                          " so every atom entering the level-k product is sampled");
    }

    DensityOptions dopts;
    dopts.correction_floor = spec.eps_trunc;
    const PartialDensity density(spec.model, g, *f.level, dopts);
    VerifyReport rep = run_paired(
        "verify-partial", spec, f, options, [&](const DiscreteMeasure& eta) { return apply_group(g, eta); },
        density);
    rep.config_echo["group_element"] = g.descriptor();
    rep.config_echo["level"] = *f.level;
    rep.extra["k"] = k;
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

nlohmann::ordered_json LaplaceReport::to_json(bool with_timing) const {
    nlohmann::ordered_json j;
    j["op"] = "verify-laplace";
    j["config_echo"] = config_echo;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        nlohmann::ordered_json e;
        e["t"] = p.t;
        e["mc"] = estimate_json(p.mc);
        e["truncated_exact"] = p.truncated_exact;
        e["closed_form"] = p.closed_form;
        e["truncation_gap"] = p.truncation_gap;
        e["z"] = p.z_score;
        e["pass"] = p.pass;
        pts.push_back(e);
    }
    j["points"] = pts;
    if (points.size() == 1) j["closed_form"] = points.front().closed_form;
    j["pass"] = pass;
    j["seed"] = seed;
    if (with_timing) j["runtime_ms"] = runtime_ms;
    return j;
}

LaplaceReport verify_laplace(const SamplerSpec& spec, const Window& delta, const std::vector<double>& t_list,
                             std::size_t n_samples) {
    const auto start = Clock::now();
    double alpha = 0.0;
    double beta = 0.0;
    require_constant_gamma(spec, alpha, beta);
    require_inside(spec.window, delta, 0.0, "region");
    for (const double t : t_list) {
        if (!(1.0 + alpha * t > 0.0)) {
            throw DomainError("verify-laplace needs t > -1/alpha, got t = " + std::to_string(t));
        }
    }
    LaplaceReport rep;
    rep.seed = spec.seed;
    rep.config_echo = echo_spec(spec);
    rep.config_echo["region"] = to_string(delta);
    rep.config_echo["n_samples"] = n_samples;
    rep.pass = true;
    LaplaceOptions lopts;
    lopts.allow_negative = true;
    for (std::size_t i = 0; i < delta.dim(); ++i) lopts.f_breaks[i] = {delta.lower()[i], delta.upper()[i]};
    for (const double t : t_list) {
        const SpatialFn f = [&](const Point& x) { return delta.contains(x) ? t : 0.0; };
        LaplacePoint p;
        p.t = t;
        p.truncated_exact = laplace_exact(spec, f, lopts);
        p.closed_form = gamma_laplace_closed_form(alpha, beta, delta.volume(), t);
        p.truncation_gap = std::abs(p.truncated_exact - p.closed_form);
        p.mc = laplace_mc(spec, f, n_samples);
        const double diff = p.mc.mean - p.truncated_exact;
        p.z_score = diff == 0.0 ? 0.0 : (p.mc.std_error > 0.0 ? diff / p.mc.std_error : std::numeric_limits<double>::infinity());
        p.pass = std::abs(diff) <= 3.0 * p.mc.std_error && p.truncation_gap <= 0.01;
        rep.pass = rep.pass && p.pass;
        rep.points.push_back(p);
    }
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

nlohmann::ordered_json MarginalReport::to_json(bool with_timing) const {
    nlohmann::ordered_json j;
    j["op"] = "verify-marginal";
    j["config_echo"] = config_echo;
    j["shape"] = shape;
    j["scale"] = scale;
    j["n"] = n_samples;
    j["ks_statistic"] = ks.statistic;
    j["p_value"] = ks.p_value;
    j["pass"] = pass;
    j["seed"] = seed;
    if (with_timing) j["runtime_ms"] = runtime_ms;
    return j;
}

MarginalReport verify_gamma_marginal(const SamplerSpec& spec, const Window& delta, std::size_t n_samples,
                                     double shape_factor) {
    const auto start = Clock::now();
    double alpha = 0.0;
    double beta = 0.0;
    require_constant_gamma(spec, alpha, beta);
    require_inside(spec.window, delta, 0.0, "region");
    const MeasureSampler sampler(spec);
    std::vector<double> values(n_samples);
    parallel_for(n_samples, [&](std::size_t i) { values[i] = mass(sampler.sample(i), delta); });
    std::sort(values.begin(), values.end());

    MarginalReport rep;
    rep.shape = beta * delta.volume() * shape_factor;
    rep.scale = alpha;
    rep.n_samples = n_samples;
    rep.ks = numerics::ks_test(values, [&](double x) { return numerics::gamma_cdf(x, rep.shape, rep.scale); });
    rep.pass = rep.ks.p_value >= 0.01;
    rep.seed = spec.seed;
    rep.config_echo = echo_spec(spec);
    rep.config_echo["region"] = to_string(delta);
    rep.config_echo["n_samples"] = n_samples;
    rep.runtime_ms = elapsed_ms(start);
    return rep;
}

}  // namespace crm
