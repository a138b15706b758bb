#include "crmlab/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crmlab/errors.hpp"
#include "crmlab/spatial.hpp"
#include "crmlab/special_functions.hpp"

namespace crm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<Window> common_domain(const std::optional<Window>& a, const std::optional<Window>& b) {
    if (!a) return b;
    if (!b) return a;
    if (!a->overlaps(*b)) {
        throw DomainError("alpha and beta fields have disjoint domains");
    }
    return a->intersect(*b);
}

void check_field(const FieldFn& f, const char* name, double lo, bool lo_open, double hi, bool hi_open) {
    auto bad = [&](double v) {
        return (lo_open ? v <= lo : v < lo) || (hi_open ? v >= hi : v > hi);
    };
    if (f.is_piecewise_constant()) {
        for (const double v : f.cell_values()) {
            if (bad(v)) {
                throw DomainError(std::string(name) + " value " + std::to_string(v) + " out of range");
            }
        }
        return;
    }
    const double mn = f.min_over(*f.domain());
    const double mx = f.max_over(*f.domain());
    if (bad(mn) || bad(mx)) {
        throw DomainError(std::string(name) + " field leaves its admissible range");
    }
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::gamma:
            return "gamma";
        case Family::log_type:
            return "log_type";
        case Family::power_type:
            return "power_type";
        case Family::custom:
            return "custom";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "gamma") return Family::gamma;
    if (name == "log_type" || name == "log" || name == "logtype") return Family::log_type;
    if (name == "power_type" || name == "power" || name == "powertype") return Family::power_type;
    if (name == "custom") return Family::custom;
    throw ConfigError("unknown family '" + name + "'");
}

LevyModel LevyModel::gamma(FieldFn alpha, FieldFn beta) {
    LevyModel m;
    m.family_ = Family::gamma;
    m.alpha_ = std::move(alpha);
    m.beta_ = std::move(beta);
    m.domain_ = common_domain(m.alpha_.domain(), m.beta_.domain());
    m.validate();
    return m;
}

LevyModel LevyModel::log_type(FieldFn alpha, FieldFn beta, double eps_family, TailFn tail) {
    LevyModel m;
    m.family_ = Family::log_type;
    m.alpha_ = std::move(alpha);
    m.beta_ = std::move(beta);
    m.eps_family_ = eps_family;
    m.tail_ = std::move(tail);
    m.domain_ = common_domain(m.alpha_.domain(), m.beta_.domain());
    m.validate();
    return m;
}

LevyModel LevyModel::power_type(FieldFn alpha, FieldFn beta, double eps_family, TailFn tail) {
    LevyModel m;
    m.family_ = Family::power_type;
    m.alpha_ = std::move(alpha);
    m.beta_ = std::move(beta);
    m.eps_family_ = eps_family;
    m.tail_ = std::move(tail);
    m.domain_ = common_domain(m.alpha_.domain(), m.beta_.domain());
    m.validate();
    return m;
}

LevyModel LevyModel::custom(LevyFn l, std::optional<Window> domain, bool homogeneous, std::vector<double> s_breaks) {
    if (!l) {
        throw DomainError("custom model needs a callable l(x, s)");
    }
    LevyModel m;
    m.family_ = Family::custom;
    m.custom_l_ = std::move(l);
    m.domain_ = std::move(domain);
    m.custom_homogeneous_ = homogeneous;
    std::sort(s_breaks.begin(), s_breaks.end());
    m.custom_breaks_ = std::move(s_breaks);
    return m;
}

void LevyModel::validate() const {
    switch (family_) {
        case Family::gamma:
        case Family::log_type:
            check_field(alpha_, "alpha", 0.0, true, kInf, false);
            break;
        case Family::power_type:
            check_field(alpha_, "alpha", 0.0, true, 1.0, true);
            break;
        case Family::custom:
            return;
    }
    check_field(beta_, "beta", 0.0, false, kInf, false);
    if (family_ == Family::log_type && !(eps_family_ > 0.0 && eps_family_ < std::exp(-1.0))) {
        throw DomainError("log-type eps_family must lie in (0, 1/e)");
    }
    if (family_ == Family::power_type && !(eps_family_ > 0.0 && eps_family_ < 1.0)) {
        throw DomainError("power-type eps_family must lie in (0, 1)");
    }
    if (family_ != Family::gamma && tail_.is_default() && !(tail_.rate > 0.0 && std::isfinite(tail_.rate))) {
        throw DomainError("tail rate must be positive");
    }
}

bool LevyModel::in_support(const Point& x) const {
    if (domain_ && !domain_->contains(x)) return false;
    if (family_ == Family::custom) return custom_l_(x, 1.0) > 0.0;
    return beta_(x) > 0.0;
}

double LevyModel::tail_value(const Point& x, double beta, double s) const {
    if (tail_.is_default()) return beta * std::exp(-tail_.rate * s);
    const double g = tail_.custom(x, s);
    if (!(g >= 0.0) || !std::isfinite(g)) {
        throw NumericError("tail g(x, s) is negative or non-finite at s = " + std::to_string(s));
    }
    return beta > 0.0 ? g : 0.0;
}

double LevyModel::l(const Point& x, double s) const {
    if (!(s > 0.0)) {
        throw DomainError("l(x, s) needs s > 0, got " + std::to_string(s));
    }
    if (domain_ && !domain_->contains(x)) return 0.0;
    if (family_ == Family::custom) {
        const double v = custom_l_(x, s);
        if (!(v >= 0.0) || std::isnan(v)) {
            throw NumericError("custom l(x, s) is negative or NaN");
        }
        return v;
    }
    const double beta = beta_(x);
    if (beta == 0.0) return 0.0;
    const double alpha = alpha_(x);
    switch (family_) {
        case Family::gamma:
            return beta * std::exp(-s / alpha);
        case Family::log_type:
            if (s < eps_family_) return beta * std::pow(-std::log(s), -alpha);
            return tail_value(x, beta, s);
        case Family::power_type:
            if (s < eps_family_) return beta * std::pow(s, 1.0 - alpha);
            return tail_value(x, beta, s);
        case Family::custom:
            break;
    }
    return 0.0;
}

double LevyModel::log_l(const Point& x, double s) const {
    if (!(s > 0.0)) {
        throw DomainError("log l(x, s) needs s > 0, got " + std::to_string(s));
    }
    if (domain_ && !domain_->contains(x)) return -kInf;
    if (family_ == Family::custom) return std::log(l(x, s));
    const double beta = beta_(x);
    if (beta == 0.0) return -kInf;
    const double alpha = alpha_(x);
    const bool in_tail = family_ != Family::gamma && s >= eps_family_;
    if (in_tail) {
        if (tail_.is_default()) return std::log(beta) - tail_.rate * s;
        return std::log(tail_value(x, beta, s));
    }
    switch (family_) {
        case Family::gamma:
            return std::log(beta) - s / alpha;
        case Family::log_type:
            return std::log(beta) - alpha * std::log(-std::log(s));
        case Family::power_type:
            return std::log(beta) + (1.0 - alpha) * std::log(s);
        case Family::custom:
            break;
    }
    return -kInf;
}

double LevyModel::l_difference(const Point& x, double s, double r) const {
    if (!(s > 0.0) || !(r > 0.0)) {
        throw DomainError("l_difference needs s > 0 and r > 0");
    }
    if (r == 1.0) return 0.0;
    if (family_ == Family::custom || (domain_ && !domain_->contains(x))) {
        return l(x, s) - l(x, r * s);
    }
    const double beta = beta_(x);
    if (beta == 0.0) return 0.0;
    const double alpha = alpha_(x);
    const double rs = r * s;
    if (family_ == Family::gamma) {
        const double z = (r - 1.0) * s / alpha;
        if (std::abs(z) > 1.0) return beta * (std::exp(-s / alpha) - std::exp(-rs / alpha));
        return -beta * std::exp(-s / alpha) * std::expm1(-z);
    }
    const bool low_s = s < eps_family_;
    const bool low_rs = rs < eps_family_;
    if (low_s && low_rs) {
        if (family_ == Family::power_type) {
            return -beta * std::pow(s, 1.0 - alpha) * std::expm1((1.0 - alpha) * std::log(r));
        }
        const double big_l = -std::log(s);
        return -beta * std::pow(big_l, -alpha) * std::expm1(-alpha * std::log1p(-std::log(r) / big_l));
    }
    if (!low_s && !low_rs && tail_.is_default()) {
        const double z = tail_.rate * (r - 1.0) * s;
        if (std::abs(z) > 1.0) return beta * (std::exp(-tail_.rate * s) - std::exp(-tail_.rate * rs));
        return -beta * std::exp(-tail_.rate * s) * std::expm1(-z);
    }
    return l(x, s) - l(x, rs);
}

std::vector<double> LevyModel::s_breaks() const {
    switch (family_) {
        case Family::gamma:
            return {};
        case Family::log_type:
        case Family::power_type:
            return {eps_family_};
        case Family::custom:
            return custom_breaks_;
    }
    return {};
}

std::vector<double> LevyModel::spatial_breaks(std::size_t axis) const {
    std::vector<double> out;
    if (family_ != Family::custom) {
        for (const FieldFn* f : {&alpha_, &beta_}) {
            const auto b = f->breakpoints(axis);
            out.insert(out.end(), b.begin(), b.end());
        }
    }
    if (domain_ && axis < domain_->dim()) {
        out.push_back(domain_->lower()[axis]);
        out.push_back(domain_->upper()[axis]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool LevyModel::spatially_homogeneous() const {
    if (family_ == Family::custom) return custom_homogeneous_;
    const bool fields_constant = alpha_.kind() == FieldFn::Kind::constant && beta_.kind() == FieldFn::Kind::constant;
    return fields_constant && (family_ == Family::gamma || tail_.is_default());
}

bool LevyModel::piecewise_fields() const {
    if (family_ == Family::custom) return false;
    return alpha_.is_piecewise_constant() && beta_.is_piecewise_constant();
}

double eval_l(const LevyModel& model, const Point& x, double s) { return model.l(x, s); }

std::string to_string(IntegrabilityVerdict v) {
    switch (v) {
        case IntegrabilityVerdict::satisfied:
            return "satisfied";
        case IntegrabilityVerdict::violated:
            return "violated";
        case IntegrabilityVerdict::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

namespace {

numerics::AxisBreaks axis_breaks(const LevyModel& model, const Window& window) {
    numerics::AxisBreaks out;
    for (std::size_t i = 0; i < window.dim(); ++i) out[i] = model.spatial_breaks(i);
    return out;
}

}  // namespace

IntegrabilityResult check_integrability(const LevyModel& model, const Window& window) {
    IntegrabilityResult result;
    auto breaks = model.s_breaks();
    breaks.push_back(1.0);
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-14;
    bool finite = true;
    for (int k = 1; k <= 8; ++k) {
        const double lo = std::pow(10.0, -2.0 * k);
        const double hi = std::pow(10.0, 2.0 * k);
        double value = 0.0;
        try {
            const auto r = numerics::integrate_box(
                [&](const Point& x) {
                    return numerics::integrate_dlog(
                               [&](double s) { return model.l(x, s) * std::min(1.0, s); }, lo, hi, breaks, opts)
                        .value;
                },
                window, axis_breaks(model, window), opts);
            value = r.value;
        } catch (const NumericError&) {
            value = kInf;
        }
        if (!std::isfinite(value)) {
            finite = false;
            result.refinements.push_back(kInf);
            break;
        }
        result.refinements.push_back(value);
    }
    const auto& r = result.refinements;
    result.value = r.back();
    if (!finite) {
        result.verdict = IntegrabilityVerdict::violated;
        return result;
    }
    int growing = 0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        growing = (r[i] >= 1.1 * r[i - 1] && r[i - 1] > 0.0) ? growing + 1 : 0;
        if (growing >= 3) {
            result.verdict = IntegrabilityVerdict::violated;
            return result;
        }
    }
    const double last = r.back();
    const double prev = r[r.size() - 2];
    if (std::abs(last - prev) <= 1e-6 * std::abs(last) || last == 0.0) {
        result.verdict = IntegrabilityVerdict::satisfied;
    }
    return result;
}

std::string to_string(MassClass c) { return c == MassClass::finite ? "finite" : "infinite"; }

namespace {

double tail_mass(const LevyModel& model, const Point& x, double beta, double s_from) {
    if (model.tail().is_default()) return beta * numerics::exp_integral_e1(model.tail().rate * s_from);
    const auto r = numerics::integrate_dlog([&](double s) { return model.l(x, s); }, s_from, kInf);
    return r.value;
}

double quadrature_point_mass(const LevyModel& model, const Point& x, double s_min) {
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-14;
    const auto r = numerics::integrate_dlog([&](double s) { return model.l(x, s); }, s_min, kInf, model.s_breaks(),
                                            opts);
    if (!std::isfinite(r.value) || (s_min == 0.0 && !r.converged)) {
        throw InfiniteMassError("Levy mass m(x, (0, inf)) is infinite for this model");
    }
    return r.value;
}

}  // namespace

double point_mass(const LevyModel& model, const Point& x, double s_min, MassMethod method) {
    if (!(s_min >= 0.0)) {
        throw DomainError("s_min must be nonnegative");
    }
    if (!model.in_support(x)) return 0.0;
    if (model.family() == Family::custom || method == MassMethod::quadrature) {
        return quadrature_point_mass(model, x, s_min);
    }
    const double alpha = model.alpha()(x);
    const double beta = model.beta()(x);
    const double eps = model.eps_family();
    switch (model.family()) {
        case Family::gamma:
            if (s_min == 0.0) {
                throw InfiniteMassError("the gamma Levy measure has infinite mass near s = 0");
            }
            return beta * numerics::exp_integral_e1(s_min / alpha);
        case Family::power_type: {
            if (s_min >= eps) return tail_mass(model, x, beta, s_min);
            const double a = 1.0 - alpha;
            const double body = beta * (std::pow(eps, a) - std::pow(s_min, a)) / a;
            return body + tail_mass(model, x, beta, eps);
        }
        case Family::log_type: {
            if (s_min >= eps) return tail_mass(model, x, beta, s_min);
            const double l_eps = -std::log(eps);
            double body = 0.0;
            if (s_min == 0.0) {
                if (alpha <= 1.0) {
                    throw InfiniteMassError("log-type Levy measure with alpha <= 1 has infinite mass near s = 0");
                }
                body = beta * std::pow(l_eps, 1.0 - alpha) / (alpha - 1.0);
            } else {
                const double l_min = -std::log(s_min);
                body = alpha == 1.0 ? beta * (std::log(l_min) - std::log(l_eps))
                                    : beta * (std::pow(l_min, 1.0 - alpha) - std::pow(l_eps, 1.0 - alpha)) /
                                          (1.0 - alpha);
            }
            return body + tail_mass(model, x, beta, eps);
        }
        case Family::custom:
            break;
    }
    return 0.0;
}

std::vector<Window> field_cells(const LevyModel& model, const Window& window) {
    if (model.family() == Family::custom ? !model.spatially_homogeneous() : !model.piecewise_fields()) {
        throw UnsupportedError("model fields are not piecewise constant; project them onto a grid first");
    }
    Window clip = window;
    if (model.domain()) {
        if (!model.domain()->overlaps(window)) return {};
        clip = model.domain()->intersect(window);
    }
    const std::size_t d = clip.dim();
    std::array<std::vector<double>, kMaxDim> pts;
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) {
        pts[i] = numerics::split_points(clip.lower()[i], clip.upper()[i], model.spatial_breaks(i));
        total *= pts[i].size() - 1;
    }
    std::vector<Window> cells;
    cells.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point lo = Point::zeros(d);
        Point hi = Point::zeros(d);
        std::size_t rem = idx;
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t n = pts[i].size() - 1;
            const std::size_t k = rem % n;
            rem /= n;
            lo[i] = pts[i][k];
            hi[i] = pts[i][k + 1];
        }
        cells.emplace_back(lo, hi);
    }
    return cells;
}

double total_mass(const LevyModel& model, const Window& window, double s_min, MassMethod method) {
    if (!(s_min >= 0.0)) {
        throw DomainError("s_min must be nonnegative");
    }
    const bool cellwise = model.family() == Family::custom ? model.spatially_homogeneous() : model.piecewise_fields();
    if (cellwise) {
        double total = 0.0;
        for (const Window& cell : field_cells(model, window)) {
            total += cell.volume() * point_mass(model, cell.center(), s_min, method);
        }
        return total;
    }
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-14;
    const auto r = numerics::integrate_box([&](const Point& x) { return point_mass(model, x, s_min, method); },
                                           window, axis_breaks(model, window), opts);
    return r.value;
}

MassClass mass_classification(const LevyModel& model, const Window& window) {
    if (model.family() == Family::custom) {
        throw UnsupportedError("mass classification is only defined for the gamma, log-type and power-type families");
    }
    const bool positive_beta = model.beta().max_over(window) > 0.0;
    if (!positive_beta) return MassClass::finite;
    switch (model.family()) {
        case Family::gamma:
            return MassClass::infinite;
        case Family::power_type:
            return model.alpha().max_over(window) < 1.0 ? MassClass::finite : MassClass::infinite;
        case Family::log_type: {
            if (model.piecewise_fields()) {
                for (const Window& cell : field_cells(model, window)) {
                    const Point c = cell.center();
                    if (model.beta()(c) > 0.0 && model.alpha()(c) <= 1.0) return MassClass::infinite;
                }
                return MassClass::finite;
            }
            return model.alpha().min_over(window) > 1.0 ? MassClass::finite : MassClass::infinite;
        }
        case Family::custom:
            break;
    }
    return MassClass::infinite;
}

double frullani(double u) {
    if (!(u > -1.0)) {
        throw DomainError("frullani needs u > -1");
    }
    return -std::log1p(u);
}

numerics::QuadratureResult frullani_quadrature(double u) {
    if (!(u > -1.0)) {
        throw DomainError("frullani needs u > -1");
    }
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-12;
    opts.abs_tol = 1e-14;
    return numerics::integrate_dlog(
        [u](double s) {
            const double us = u * s;
            return std::abs(us) > 1.0 ? std::exp(-s - us) - std::exp(-s) : std::expm1(-us) * std::exp(-s);
        },
        0.0, kInf, {}, opts);
}

}  // namespace crm
