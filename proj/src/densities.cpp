#include "crmlab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crmlab/errors.hpp"
#include "crmlab/spatial.hpp"
#include "json.hpp"

namespace crm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

numerics::AxisBreaks collect_breaks(const LevyModel& model, const Current* theta, const Diffeo* phi) {
    numerics::AxisBreaks out;
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        out[i] = model.spatial_breaks(i);
        if (theta) out[i].insert(out[i].end(), theta->breakpoints(i).begin(), theta->breakpoints(i).end());
        if (phi) out[i].insert(out[i].end(), phi->breakpoints(i).begin(), phi->breakpoints(i).end());
    }
    return out;
}

// `box` clipped to the model domain; empty when they do not overlap.
std::optional<Window> clip_to_domain(const LevyModel& model, const Window& box) {
    if (!model.domain()) return box;
    if (!model.domain()->overlaps(box)) return std::nullopt;
    return model.domain()->intersect(box);
}

double checked_integral(const numerics::QuadratureResult& r, const char* what) {
    const bool loose = !r.converged && r.abs_error_estimate > 1e-6 * std::max(1.0, std::abs(r.value));
    if (!std::isfinite(r.value) || loose) {
        throw CorrectionDivergenceError(std::string(what) + " did not converge (value " + std::to_string(r.value) +
                               ", error estimate " + std::to_string(r.abs_error_estimate) + ")");
    }
    return r.value;
}

std::vector<double> scaled_breaks(const LevyModel& model, double r) {
    auto b = model.s_breaks();
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) b.push_back(b[i] * r);
    return b;
}

// (L^{1-a} - (L + c)^{1-a}) / (a - 1), or log1p(c/L) at a = 1; 0 at L = inf
double log_type_antiderivative_gap(double alpha, double big_l, double c) {
    if (std::isinf(big_l)) return 0.0;
    if (alpha == 1.0) return std::log1p(c / big_l);
    return -std::pow(big_l, 1.0 - alpha) * std::expm1((1.0 - alpha) * std::log1p(c / big_l)) / (alpha - 1.0);
}

// int_lo^hi (l(s) - l(s/t))/s ds for l = beta (-log s)^(-alpha), with s and s/t below eps_family.
double log_type_head(double alpha, double beta, double t, double lo, double hi) {
    const double c = std::log(t);
    const double l_lo = lo > 0.0 ? -std::log(lo) : kInf;
    return beta * (log_type_antiderivative_gap(alpha, -std::log(hi), c) - log_type_antiderivative_gap(alpha, l_lo, c));
}

// int_{supp theta} int_{floor}^inf (l(x, s) - l(x, s/theta(x))) / s ds dx
double current_correction(const LevyModel& model, const Current& theta, const DensityOptions& options) {
    if (theta.is_identity()) return 0.0;
    const auto box = clip_to_domain(model, *theta.support());
    if (!box) return 0.0;
    const auto& q = options.quadrature;
    const auto r = numerics::integrate_box(
        [&](const Point& x) {
            const double t = theta(x);
            if (t == 1.0 || !model.in_support(x)) return 0.0;
            double lo = options.correction_floor;
            double head = 0.0;
            if (model.family() == Family::log_type) {
                const double hi = model.eps_family() * std::min(1.0, t);
                if (hi > lo) {
                    head = log_type_head(model.alpha()(x), model.beta()(x), t, lo, hi);
                    lo = hi;
                }
            }
            const auto in = numerics::integrate_dlog([&](double s) { return model.l_difference(x, s, 1.0 / t); }, lo,
                                                     kInf, scaled_breaks(model, t), q);
            return head + checked_integral(in, "current correction integral");
        },
        *box, collect_breaks(model, &theta, nullptr), q);
    return checked_integral(r, "current correction integral");
}

void require_finite_mass(const LevyModel& model, const Diffeo& phi) {
    if (phi.is_identity()) return;
    const auto box = clip_to_domain(model, *phi.support());
    if (!box) return;
    if (model.family() == Family::custom) {
        (void)total_mass(model, *box, 0.0);
        return;
    }
    if (mass_classification(model, *box) == MassClass::infinite) {
        throw InfiniteMassError("the diffeomorphism density needs finite Levy mass m(supp(phi) x R+); the " +
                                to_string(model.family()) + " model has infinite mass there");
    }
}

void require_support(const LevyModel& model, const Point& x) {
    if (!model.in_support(x)) {
        throw SingularityError("atom at " + to_string(x) + " lies outside the support set Y of the model");
    }
}

// log l(phi^-1 x, w) - log l(x, w) + log J_{phi^-1}(x)
double diffeo_atom_term(const LevyModel& model, const Diffeo& phi_inv, const Point& x, double w) {
    return model.log_l(phi_inv(x), w) - model.log_l(x, w) + std::log(phi_inv.jacobian(x));
}

LogDensity finish(double atoms, double correction, std::size_t n) {
    return {atoms + correction, atoms, correction, n};
}

}  // namespace

CurrentDensity::CurrentDensity(const LevyModel& model, Current theta, const DensityOptions& options)
    : model_(model), theta_(std::move(theta)), correction_(current_correction(model_, theta_, options)) {}

LogDensity CurrentDensity::operator()(const DiscreteMeasure& eta) const {
    if (theta_.is_identity()) return finish(0.0, 0.0, eta.size());
    double atoms = 0.0;
    for (const auto& a : eta) {
        require_support(model_, a.location);
        const double t = theta_(a.location);
        if (t == 1.0) continue;
        atoms += model_.log_l(a.location, a.weight / t) - model_.log_l(a.location, a.weight);
    }
    return finish(atoms, correction_, eta.size());
}

DiffeoDensity::DiffeoDensity(const LevyModel& model, Diffeo phi)
    : model_(model), phi_(std::move(phi)), phi_inv_(phi_.inverse()) {
    require_finite_mass(model_, phi_);
}

LogDensity DiffeoDensity::operator()(const DiscreteMeasure& eta) const {
    if (phi_.is_identity()) return finish(0.0, 0.0, eta.size());
    double atoms = 0.0;
    for (const auto& a : eta) {
        require_support(model_, a.location);
        if (!phi_.support()->contains(a.location)) continue;
        atoms += diffeo_atom_term(model_, phi_inv_, a.location, a.weight);
    }
    return finish(atoms, 0.0, eta.size());
}

SemidirectDensity::SemidirectDensity(const LevyModel& model, GroupElement g, const DensityOptions& options)
    : model_(model), g_(std::move(g)), phi_inv_(g_.phi.inverse()), current_(model_, g_.theta, options) {
    require_finite_mass(model_, g_.phi);
    if (options.correction_floor > 0.0 && !g_.phi.is_identity() && !g_.theta.is_identity()) {
        const auto box = clip_to_domain(model_, *g_.phi.support());
        if (box) {
            const auto& q = options.quadrature;
            const auto r = numerics::integrate_box(
                [&](const Point& x) {
                    const Point y = phi_inv_(x);
                    const double j = phi_inv_.jacobian(x);
                    const double lower = options.correction_floor / g_.theta(x);
                    const auto in = numerics::integrate_dlog(
                        [&](double s) { return model_.l(y, s) * j - model_.l(x, s); }, lower, kInf,
                        model_.s_breaks(), q);
                    return checked_integral(in, "semidirect correction integral");
                },
                *box, collect_breaks(model_, &g_.theta, &g_.phi), q);
            diffeo_correction_ = -checked_integral(r, "semidirect correction integral");
        }
    }
}

LogDensity SemidirectDensity::operator()(const DiscreteMeasure& eta) const {
    if (g_.is_identity()) return finish(0.0, 0.0, eta.size());
    const LogDensity cur = current_(eta);
    double atoms = cur.atom_terms;
    if (!g_.phi.is_identity()) {
        for (const auto& a : eta) {
            if (!g_.phi.support()->contains(a.location)) continue;
            require_support(model_, a.location);
            atoms += diffeo_atom_term(model_, phi_inv_, a.location, a.weight / g_.theta(a.location));
        }
    }
    return finish(atoms, cur.correction_term + diffeo_correction_, eta.size());
}

int partial_level_k(const Current& theta, int n) {
    if (n < 1) {
        throw DomainError("level n must be >= 1");
    }
    return static_cast<int>(std::ceil(static_cast<double>(n) * theta.sup_bound()));
}

PartialDensity::PartialDensity(const LevyModel& model, GroupElement g, int n, const DensityOptions& options)
    : model_(model),
      g_(std::move(g)),
      phi_inv_(g_.phi.inverse()),
      current_(model_, g_.theta, options),
      k_(partial_level_k(g_.theta, n)) {}

LogDensity PartialDensity::operator()(const DiscreteMeasure& eta) const {
    if (g_.is_identity()) return finish(0.0, 0.0, eta.size());
    const LogDensity cur = current_(eta);
    double atoms = cur.atom_terms;
    if (!g_.phi.is_identity()) {
        const double inv_k = 1.0 / static_cast<double>(k_);
        for (const auto& a : eta) {
            if (!g_.phi.support()->contains(a.location)) continue;
            const double w = a.weight / g_.theta(a.location);
            if (w < inv_k) continue;
            require_support(model_, a.location);
            atoms += diffeo_atom_term(model_, phi_inv_, a.location, w);
        }
    }
    return finish(atoms, cur.correction_term, eta.size());
}

LogDensity current_density(const LevyModel& model, const Current& theta, const DiscreteMeasure& eta,
                           const DensityOptions& options) {
    return CurrentDensity(model, theta, options)(eta);
}

LogDensity current_density_gamma(const FieldFn& alpha, const FieldFn& beta, const Current& theta,
                                 const DiscreteMeasure& eta) {
    if (theta.is_identity()) return finish(0.0, 0.0, eta.size());
    double atoms = 0.0;
    for (const auto& a : eta) {
        const double t = theta(a.location);
        if (t == 1.0) continue;
        const double al = alpha(a.location);
        if (!(al > 0.0)) {
            throw DomainError("alpha must be positive at atom " + to_string(a.location));
        }
        atoms += (1.0 - 1.0 / t) * a.weight / al;
    }
    numerics::AxisBreaks breaks;
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        breaks[i] = beta.breakpoints(i);
        breaks[i].insert(breaks[i].end(), theta.breakpoints(i).begin(), theta.breakpoints(i).end());
    }
    numerics::QuadratureOptions q;
    q.rel_tol = 1e-12;
    q.abs_tol = 1e-14;
    const auto r = numerics::integrate_box(
        [&](const Point& x) {
            if (beta.domain() && !beta.domain()->contains(x)) return 0.0;
            return beta(x) * std::log(theta(x));
        },
        *theta.support(), breaks, q);
    return finish(atoms, -r.value, eta.size());
}

LogDensity diffeo_density(const LevyModel& model, const Diffeo& phi, const DiscreteMeasure& eta) {
    return DiffeoDensity(model, phi)(eta);
}

LogDensity semidirect_density(const LevyModel& model, const GroupElement& g, const DiscreteMeasure& eta,
                              const DensityOptions& options) {
    return SemidirectDensity(model, g, options)(eta);
}

LogDensity partial_density(const LevyModel& model, const GroupElement& g, const DiscreteMeasure& eta, int n,
                           const DensityOptions& options) {
    return PartialDensity(model, g, n, options)(eta);
}

double hellinger_band(const LevyModel& model, const Diffeo& phi, double s_lo, double s_hi) {
    if (!(s_lo > 0.0) || !(s_hi > s_lo)) {
        throw DomainError("Hellinger band needs 0 < s_lo < s_hi");
    }
    if (phi.is_identity()) return 0.0;
    const Diffeo phi_inv = phi.inverse();
    numerics::QuadratureOptions q;
    q.rel_tol = 1e-10;
    q.abs_tol = 1e-15;
    const auto breaks = model.s_breaks();
    const auto r = numerics::integrate_box(
        [&](const Point& x) {
            const Point y = phi_inv(x);
            const double j = phi_inv.jacobian(x);
            const auto in = numerics::integrate_dlog(
                [&](double s) {
                    const double d = std::sqrt(model.l(y, s) * j) - std::sqrt(model.l(x, s));
                    return d * d;
                },
                s_lo, s_hi, breaks, q);
            return in.value;
        },
        *phi.support(), collect_breaks(model, nullptr, &phi), q);
    return r.value;
}

double hellinger_integral(const LevyModel& model, const Diffeo& phi, double eps) {
    return hellinger_band(model, phi, eps, kInf);
}

std::string to_string(HellingerVerdict v) {
    switch (v) {
        case HellingerVerdict::converges:
            return "converges";
        case HellingerVerdict::diverges:
            return "diverges";
        case HellingerVerdict::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

std::string to_string(QiVerdict v) {
    switch (v) {
        case QiVerdict::quasi_invariant:
            return "quasi_invariant";
        case QiVerdict::not_quasi_invariant:
            return "not_quasi_invariant";
        case QiVerdict::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

HellingerReport hellinger_ladder(const LevyModel& model, const Diffeo& phi) {
    constexpr int kBaseRungs = 4;
    constexpr int kMaxRungs = 59;
    HellingerReport rep;
    double total = 0.0;
    int small_run = 0;
    bool converged = false;
    for (int j = 0; j < kMaxRungs; ++j) {
        const double eps = std::pow(10.0, -(2.0 + j));
        const double upper = j == 0 ? kInf : std::pow(10.0, -(1.0 + j));
        const double band = hellinger_band(model, phi, eps, upper);
        total += std::max(0.0, band);
        rep.eps_list.push_back(eps);
        rep.values.push_back(total);
        if (j == 0) continue;
        const double rel = total > 0.0 ? band / total : 0.0;
        if (j == kBaseRungs - 1) rep.last_base_increment = rel;
        small_run = rel < 1e-3 ? small_run + 1 : 0;
        if (small_run >= 2 && j >= kBaseRungs - 1) {
            converged = true;
            break;
        }
    }

    // least-squares fit of H against log(1/eps) over the base rungs
    double sx = 0.0;
    double sy = 0.0;
    for (int j = 0; j < kBaseRungs; ++j) {
        sx += -std::log(rep.eps_list[j]);
        sy += rep.values[j];
    }
    const double mx = sx / kBaseRungs;
    const double my = sy / kBaseRungs;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int j = 0; j < kBaseRungs; ++j) {
        const double dx = -std::log(rep.eps_list[j]) - mx;
        sxx += dx * dx;
        sxy += dx * (rep.values[j] - my);
    }
    rep.fitted_log_slope = sxy / sxx;
    double ssr = 0.0;
    for (int j = 0; j < kBaseRungs; ++j) {
        const double fit = my + rep.fitted_log_slope * (-std::log(rep.eps_list[j]) - mx);
        ssr += (rep.values[j] - fit) * (rep.values[j] - fit);
    }
    rep.slope_std_error = std::sqrt(ssr / (kBaseRungs - 2) / sxx);

    if (converged) {
        rep.verdict = HellingerVerdict::converges;
    } else if (rep.fitted_log_slope > 10.0 * rep.slope_std_error && rep.last_base_increment > 0.01) {
        rep.verdict = HellingerVerdict::diverges;
    }
    return rep;
}

QiDiagnosis diagnose_diffeo_qi(const LevyModel& model, const Diffeo& phi) {
    QiDiagnosis d;
    d.report = hellinger_ladder(model, phi);
    switch (d.report.verdict) {
        case HellingerVerdict::converges:
            d.verdict = QiVerdict::quasi_invariant;
            break;
        case HellingerVerdict::diverges:
            d.verdict = QiVerdict::not_quasi_invariant;
            break;
        case HellingerVerdict::inconclusive:
            d.verdict = QiVerdict::inconclusive;
            break;
    }
    return d;
}

std::string density_report_json(const LogDensity& d, const LevyModel& model, const std::string& transform) {
    nlohmann::ordered_json j;
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    j["log_value"] = num(d.log_value);
    j["atom_terms"] = num(d.atom_terms);
    j["correction_term"] = num(d.correction_term);
    j["n_atoms"] = d.n_atoms;
    j["family"] = to_string(model.family());
    j["transform_descriptor"] = transform;
    return j.dump(2);
}

}  // namespace crm
