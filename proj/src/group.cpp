#include "crmlab/group.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "crmlab/errors.hpp"

namespace crm {

namespace {

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string bump_descriptor(const char* kind, const std::vector<BumpTerm>& terms) {
    std::string out = kind;
    out += '[';
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i) out += ';';
        out += "a=" + num(terms[i].a) + ",c=" + to_string(terms[i].c) + ",w=" + num(terms[i].w);
    }
    return out + ']';
}

std::optional<Window> hull(const std::optional<Window>& a, const std::optional<Window>& b) {
    if (!a) return b;
    if (!b) return a;
    return a->hull(*b);
}

void merge(std::vector<double>& into, const std::vector<double>& from) {
    into.insert(into.end(), from.begin(), from.end());
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
}

double radius(const Point& x, const Point& c) {
    if (x.dim != c.dim) {
        throw DomainError("point " + to_string(x) + " and bump center " + to_string(c) + " differ in dimension");
    }
    return distance(x, c);
}

void check_term(const BumpTerm& t) {
    if (!(t.w > 0.0) || !std::isfinite(t.w) || !std::isfinite(t.a)) {
        throw DomainError("bump terms need finite a and w > 0");
    }
}

Window term_box(const BumpTerm& t) {
    Point lo = t.c;
    Point hi = t.c;
    for (std::size_t i = 0; i < t.c.dim; ++i) {
        lo[i] -= t.w;
        hi[i] += t.w;
    }
    return {lo, hi};
}

double bracket_root(const std::function<double(double)>& f, const std::function<double(double)>& df, double lo,
                    double hi, double x0) {
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (fx > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        double next = x - fx / df(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-16 * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

}  // namespace

double bump(double u) {
    const double q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_derivative(double u) {
    const double q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) * (-2.0 * u / (q * q)) : 0.0;
}

Current::Current() {
    Node n;
    n.fn = [](const Point&) { return 1.0; };
    node_ = std::make_shared<const Node>(std::move(n));
}

Current Current::bumps(const std::vector<BumpTerm>& terms) {
    Node n;
    double lo_log = 0.0;
    double hi_log = 0.0;
    std::vector<BumpTerm> active;
    for (const auto& t : terms) {
        check_term(t);
        if (t.a == 0.0) continue;
        active.push_back(t);
        lo_log += std::min(0.0, t.a * crm::bump(0.0));
        hi_log += std::max(0.0, t.a * crm::bump(0.0));
        n.support = hull(n.support, term_box(t));
        for (std::size_t i = 0; i < t.c.dim; ++i) merge(n.breaks[i], {t.c[i] - t.w, t.c[i] + t.w});
    }
    if (active.empty()) return {};
    n.fn = [active](const Point& x) {
        double log_theta = 0.0;
        for (const auto& t : active) log_theta += t.a * crm::bump(radius(x, t.c) / t.w);
        return std::exp(log_theta);
    };
    n.lower = std::exp(lo_log);
    n.upper = std::exp(hi_log);
    n.identity = false;
    n.descriptor = bump_descriptor("current", active);
    return Current(std::make_shared<const Node>(std::move(n)));
}

Current Current::step(const Window& region, double value, bool allow_nonsmooth) {
    if (!allow_nonsmooth) {
        throw DomainError("step currents are discontinuous; set allow_nonsmooth to use them");
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError("step current value must be positive");
    }
    if (value == 1.0) return {};
    Node n;
    n.fn = [region, value](const Point& x) { return region.contains(x) ? value : 1.0; };
    n.lower = std::min(1.0, value);
    n.upper = std::max(1.0, value);
    n.support = region;
    n.identity = false;
    n.smooth = false;
    for (std::size_t i = 0; i < region.dim(); ++i) n.breaks[i] = {region.lower()[i], region.upper()[i]};
    n.descriptor = "current.step[" + to_string(region) + ",value=" + num(value) + "]";
    return Current(std::make_shared<const Node>(std::move(n)));
}

Current Current::callable(Fn fn, const Window& support, double lower, double upper) {
    if (!fn) {
        throw DomainError("callable current needs a function");
    }
    if (!(lower > 0.0) || !(lower <= 1.0) || !(upper >= 1.0) || !std::isfinite(upper)) {
        throw DomainError("callable current bounds must satisfy 0 < lower <= 1 <= upper < inf");
    }
    Node n;
    n.fn = [fn = std::move(fn), support](const Point& x) { return support.contains(x) ? fn(x) : 1.0; };
    n.lower = lower;
    n.upper = upper;
    n.support = support;
    n.identity = false;
    n.smooth = false;
    for (std::size_t i = 0; i < support.dim(); ++i) n.breaks[i] = {support.lower()[i], support.upper()[i]};
    n.descriptor = "current.callable[" + to_string(support) + "]";
    return Current(std::make_shared<const Node>(std::move(n)));
}

double Current::operator()(const Point& x) const {
    const double v = node_->fn(x);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError("current value at " + to_string(x) + " is not positive and finite");
    }
    return v;
}

Current Current::operator*(const Current& other) const {
    if (is_identity()) return other;
    if (other.is_identity()) return *this;
    Node n;
    n.fn = [a = *this, b = other](const Point& x) { return a(x) * b(x); };
    n.lower = inf_bound() * other.inf_bound();
    n.upper = sup_bound() * other.sup_bound();
    n.support = hull(support(), other.support());
    n.identity = false;
    n.smooth = is_smooth() && other.is_smooth();
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        n.breaks[i] = breakpoints(i);
        merge(n.breaks[i], other.breakpoints(i));
    }
    n.descriptor = "(" + descriptor() + ")*(" + other.descriptor() + ")";
    return Current(std::make_shared<const Node>(std::move(n)));
}

Current Current::reciprocal() const {
    if (is_identity()) return *this;
    Node n = *node_;
    n.fn = [a = *this](const Point& x) { return 1.0 / a(x); };
    n.lower = 1.0 / sup_bound();
    n.upper = 1.0 / inf_bound();
    n.descriptor = "1/(" + descriptor() + ")";
    return Current(std::make_shared<const Node>(std::move(n)));
}

Current Current::compose(const Diffeo& phi) const {
    if (is_identity()) return *this;
    if (phi.is_identity()) return *this;
    Node n = *node_;
    n.fn = [a = *this, phi](const Point& x) { return a(phi(x)); };
    n.support = hull(support(), phi.support());
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        std::vector<double> mapped;
        if (i == 0 && support() && support()->dim() == 1) {
            for (const double b : breakpoints(0)) mapped.push_back(phi.inverse_at(Point(b))[0]);
        } else {
            mapped = breakpoints(i);
        }
        n.breaks[i] = mapped;
        std::sort(n.breaks[i].begin(), n.breaks[i].end());
        merge(n.breaks[i], phi.breakpoints(i));
    }
    n.descriptor = "(" + descriptor() + ")o(" + phi.descriptor() + ")";
    return Current(std::make_shared<const Node>(std::move(n)));
}

Diffeo::Diffeo() {
    Node n;
    n.fwd = [](const Point& x) { return x; };
    n.inv = [](const Point& y) { return y; };
    n.jac = [](const Point&) { return 1.0; };
    node_ = std::make_shared<const Node>(std::move(n));
}

Diffeo Diffeo::bumps(const std::vector<BumpTerm>& terms) {
    std::vector<BumpTerm> active;
    double lipschitz = 0.0;
    double shift = 0.0;
    Node n;
    for (const auto& t : terms) {
        check_term(t);
        if (t.c.dim != 1) {
            throw DomainError("bump diffeomorphisms are one-dimensional; use a callable diffeo for d > 1");
        }
        if (t.a == 0.0) continue;
        active.push_back(t);
        lipschitz += std::abs(t.a) * kBumpDerivativeSup / t.w;
        shift += std::abs(t.a) * crm::bump(0.0);
        n.support = hull(n.support, term_box(t));
        merge(n.breaks[0], {t.c[0] - t.w, t.c[0] + t.w});
    }
    if (lipschitz >= 1.0) {
        throw DomainError("bump diffeo violates sum |a| sup|b'| / w < 1 (value " + num(lipschitz) + ")");
    }
    if (active.empty()) return {};
    auto displacement = [active](double x) {
        double d = 0.0;
        for (const auto& t : active) d += t.a * crm::bump((x - t.c[0]) / t.w);
        return d;
    };
    auto slope = [active](double x) {
        double j = 1.0;
        for (const auto& t : active) j += t.a / t.w * bump_derivative((x - t.c[0]) / t.w);
        return j;
    };
    auto check_dim = [](const Point& x) {
        if (x.dim != 1) {
            throw DomainError("bump diffeo applied to a point of dimension " + std::to_string(x.dim));
        }
    };
    const Window box = *n.support;
    n.fwd = [displacement, check_dim](const Point& x) {
        check_dim(x);
        return Point(x[0] + displacement(x[0]));
    };
    n.jac = [slope, check_dim](const Point& x) {
        check_dim(x);
        return slope(x[0]);
    };
    n.inv = [displacement, slope, check_dim, box, shift](const Point& yp) {
        check_dim(yp);
        const double y = yp[0];
        if (!box.contains(yp)) return yp;
        const double root = bracket_root([&](double x) { return x + displacement(x) - y; }, slope, y - shift - 1e-12,
                                         y + shift + 1e-12, y - displacement(y));
        return Point(root);
    };
    n.identity = false;
    n.descriptor = bump_descriptor("diffeo", active);
    return Diffeo(std::make_shared<const Node>(std::move(n)));
}

Diffeo Diffeo::callable(Map phi, Map phi_inverse, Jac jacobian, const Window& support) {
    if (!phi || !phi_inverse || !jacobian) {
        throw DomainError("callable diffeo needs the map, its inverse and its Jacobian");
    }
    Node n;
    n.fwd = [phi = std::move(phi), support](const Point& x) { return support.contains(x) ? phi(x) : x; };
    n.inv = [inv = std::move(phi_inverse), support](const Point& y) { return support.contains(y) ? inv(y) : y; };
    n.jac = [jac = std::move(jacobian), support](const Point& x) { return support.contains(x) ? jac(x) : 1.0; };
    n.support = support;
    n.identity = false;
    for (std::size_t i = 0; i < support.dim(); ++i) n.breaks[i] = {support.lower()[i], support.upper()[i]};
    n.descriptor = "diffeo.callable[" + to_string(support) + "]";
    return Diffeo(std::make_shared<const Node>(std::move(n)));
}

Point Diffeo::operator()(const Point& x) const { return node_->fwd(x); }
Point Diffeo::inverse_at(const Point& y) const { return node_->inv(y); }
double Diffeo::jacobian(const Point& x) const { return node_->jac(x); }

Diffeo Diffeo::compose(const Diffeo& inner) const {
    if (is_identity()) return inner;
    if (inner.is_identity()) return *this;
    Node n;
    n.fwd = [outer = *this, inner](const Point& x) { return outer(inner(x)); };
    n.inv = [outer = *this, inner](const Point& y) { return inner.inverse_at(outer.inverse_at(y)); };
    n.jac = [outer = *this, inner](const Point& x) { return outer.jacobian(inner(x)) * inner.jacobian(x); };
    n.support = hull(support(), inner.support());
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        n.breaks[i] = inner.breakpoints(i);
        std::vector<double> mapped;
        for (const double b : breakpoints(i)) {
            mapped.push_back(i == 0 && n.support->dim() == 1 ? inner.inverse_at(Point(b))[0] : b);
        }
        std::sort(mapped.begin(), mapped.end());
        merge(n.breaks[i], mapped);
    }
    n.identity = false;
    n.descriptor = "(" + descriptor() + ")o(" + inner.descriptor() + ")";
    return Diffeo(std::make_shared<const Node>(std::move(n)));
}

Diffeo Diffeo::inverse() const {
    if (is_identity()) return *this;
    Node n;
    n.fwd = node_->inv;
    n.inv = node_->fwd;
    n.jac = [phi = *this](const Point& y) { return 1.0 / phi.jacobian(phi.inverse_at(y)); };
    n.support = support();
    for (std::size_t i = 0; i < kMaxDim; ++i) {
        for (const double b : breakpoints(i)) {
            n.breaks[i].push_back(i == 0 && n.support->dim() == 1 ? (*this)(Point(b))[0] : b);
        }
        std::sort(n.breaks[i].begin(), n.breaks[i].end());
    }
    n.identity = false;
    n.descriptor = "inv(" + descriptor() + ")";
    return Diffeo(std::make_shared<const Node>(std::move(n)));
}

std::string GroupElement::descriptor() const { return "(" + phi.descriptor() + "," + theta.descriptor() + ")"; }

DiscreteMeasure apply_current(const Current& theta, const DiscreteMeasure& eta) {
    if (theta.is_identity()) return eta;
    std::vector<WeightedAtom> atoms(eta.atoms());
    for (auto& a : atoms) a.weight *= theta(a.location);
    return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure apply_diffeo(const Diffeo& phi, const DiscreteMeasure& eta) {
    if (phi.is_identity()) return eta;
    std::vector<WeightedAtom> atoms(eta.atoms());
    for (auto& a : atoms) a.location = phi(a.location);
    return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure apply_group(const GroupElement& g, const DiscreteMeasure& eta) {
    return apply_current(g.theta, apply_diffeo(g.phi, eta));
}

GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
    return {g1.phi.compose(g2.phi), g1.theta * g2.theta.compose(g1.phi.inverse())};
}

GroupElement inverse(const GroupElement& g) { return {g.phi.inverse(), g.theta.reciprocal().compose(g.phi)}; }

double jacobian(const Diffeo& phi, const Point& x, JacobianMode mode, double h) {
    double value = 0.0;
    if (mode == JacobianMode::exact) {
        value = phi.jacobian(x);
    } else {
        const std::size_t d = x.dim;
        double m[kMaxDim][kMaxDim] = {};
        for (std::size_t j = 0; j < d; ++j) {
            Point xp = x;
            Point xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Point fp = phi(xp);
            const Point fm = phi(xm);
            for (std::size_t i = 0; i < d; ++i) m[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
        if (d == 1) {
            value = m[0][0];
        } else if (d == 2) {
            value = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        } else {
            value = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                    m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        }
        value = std::abs(value);
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw NumericError("Jacobian at " + to_string(x) + " is not positive");
    }
    return value;
}

}  // namespace crm
