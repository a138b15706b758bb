#include "crmlab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "crmlab/errors.hpp"

namespace crm::numerics {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    bool splittable;

    bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const Integrand& g, double t) {
    const double v = g(t);
    if (!std::isfinite(v)) {
        throw NumericError("integrand is not finite at t = " + std::to_string(t));
    }
    return v;
}

// QUADPACK qk15 on [lo, hi].
Segment kronrod15(const Integrand& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = checked(g, center);
    double resg = fc * kGaussWeights[3];
    double resk = fc * kKronrodWeights[7];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f1[j] = checked(g, center - dx);
        f2[j] = checked(g, center + dx);
        const double sum = f1[j] + f2[j];
        resk += kKronrodWeights[j] * sum;
        resabs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) {
            resg += kGaussWeights[j / 2] * sum;
        }
    }
    const double reskh = 0.5 * resk;
    double resasc = kKronrodWeights[7] * std::abs(fc - reskh);
    for (std::size_t j = 0; j < 7; ++j) {
        resasc += kKronrodWeights[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
    }
    const double dhalf = std::abs(half);
    resabs *= dhalf;
    resasc *= dhalf;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    const bool splittable = std::abs(hi - lo) > 64.0 * eps * std::max(std::abs(lo), std::abs(hi)) &&
                            std::abs(hi - lo) > std::numeric_limits<double>::min();
    return {lo, hi, resk * half, err, splittable};
}

QuadratureResult adaptive(const Integrand& g, double lo, double hi, const QuadratureOptions& opt) {
    constexpr std::size_t kInitialPieces = 8;
    std::priority_queue<Segment> heap;
    double total = 0.0;
    double total_err = 0.0;
    std::size_t evals = 0;
    const double width = (hi - lo) / static_cast<double>(kInitialPieces);
    for (std::size_t k = 0; k < kInitialPieces; ++k) {
        const double a = lo + width * static_cast<double>(k);
        const double b = (k + 1 == kInitialPieces) ? hi : lo + width * static_cast<double>(k + 1);
        Segment s = kronrod15(g, a, b);
        evals += 15;
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    std::vector<Segment> frozen;
    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    while (total_err > tolerance() && !heap.empty() && heap.size() + frozen.size() < opt.max_subdivisions) {
        Segment worst = heap.top();
        heap.pop();
        if (!worst.splittable) {
            frozen.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Segment left = kronrod15(g, worst.lo, mid);
        const Segment right = kronrod15(g, mid, worst.hi);
        evals += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    for (; !heap.empty(); heap.pop()) {
        total += heap.top().value;
        total_err += heap.top().error;
    }
    for (const auto& s : frozen) {
        total += s.value;
        total_err += s.error;
    }
    return {total, total_err, evals, total_err <= tolerance()};
}

// Keeps 0 * (huge Jacobian) from turning into NaN near mapped infinities.
double scaled(double fx, double jac) { return fx == 0.0 ? 0.0 : fx * jac; }

}  // namespace

QuadratureResult& QuadratureResult::operator+=(const QuadratureResult& other) {
    value += other.value;
    abs_error_estimate += other.abs_error_estimate;
    n_evals += other.n_evals;
    converged = converged && other.converged;
    return *this;
}

QuadratureResult integrate_1d(const Integrand& f, double a, double b, const QuadratureOptions& options) {
    if (std::isnan(a) || std::isnan(b)) {
        throw DomainError("integration limits must not be NaN");
    }
    if (a == b) {
        return {0.0, 0.0, 0, true};
    }
    if (a > b) {
        QuadratureOptions flipped = options;
        if (options.singular == EndpointSingularity::lower) flipped.singular = EndpointSingularity::upper;
        if (options.singular == EndpointSingularity::upper) flipped.singular = EndpointSingularity::lower;
        QuadratureResult r = integrate_1d(f, b, a, flipped);
        r.value = -r.value;
        return r;
    }
    const bool lo_inf = std::isinf(a);
    const bool hi_inf = std::isinf(b);
    if (lo_inf && hi_inf) {
        QuadratureOptions half = options;
        half.abs_tol *= 0.5;
        QuadratureResult r = integrate_1d(f, a, 0.0, half);
        r += integrate_1d(f, 0.0, b, half);
        return r;
    }
    if (hi_inf) {
        const Integrand g = [&](double t) {
            const double om = 1.0 - t;
            return scaled(f(a + t / om), 1.0 / (om * om));
        };
        return adaptive(g, 0.0, 1.0, options);
    }
    if (lo_inf) {
        const Integrand g = [&](double t) { return scaled(f(b - (1.0 - t) / t), 1.0 / (t * t)); };
        return adaptive(g, 0.0, 1.0, options);
    }
    const double len = b - a;
    switch (options.singular) {
        case EndpointSingularity::lower: {
            QuadratureOptions plain = options;
            plain.singular = EndpointSingularity::none;
            const Integrand g = [&](double v) {
                const double d = len * std::exp(v);
                return a + d == a ? 0.0 : scaled(f(a + d), d);
            };
            return integrate_1d(g, -std::numeric_limits<double>::infinity(), 0.0, plain);
        }
        case EndpointSingularity::upper: {
            QuadratureOptions plain = options;
            plain.singular = EndpointSingularity::none;
            const Integrand g = [&](double v) {
                const double d = len * std::exp(v);
                return b - d == b ? 0.0 : scaled(f(b - d), d);
            };
            return integrate_1d(g, -std::numeric_limits<double>::infinity(), 0.0, plain);
        }
        case EndpointSingularity::none:
            break;
    }
    return adaptive(f, a, b, options);
}

QuadratureResult integrate_1d(const Integrand& f, double a, double b, double rel_tol, double abs_tol) {
    QuadratureOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    return integrate_1d(f, a, b, opt);
}

QuadratureResult integrate_pieces(const Integrand& f, std::span<const double> points,
                                  const QuadratureOptions& options) {
    QuadratureResult total{0.0, 0.0, 0, true};
    if (points.size() < 2) {
        return total;
    }
    QuadratureOptions piece = options;
    piece.abs_tol = options.abs_tol / static_cast<double>(points.size() - 1);
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        if (points[k + 1] > points[k]) {
            total += integrate_1d(f, points[k], points[k + 1], piece);
        } else if (points[k + 1] < points[k]) {
            throw DomainError("integrate_pieces requires sorted points");
        }
    }
    return total;
}

QuadratureResult integrate_dlog(const Integrand& h, double s_lo, double s_hi, std::span<const double> breaks,
                                const QuadratureOptions& options) {
    if (s_lo < 0.0 || !(s_hi > s_lo)) {
        if (s_hi == s_lo) {
            return {0.0, 0.0, 0, true};
        }
        throw DomainError("integrate_dlog requires 0 <= s_lo < s_hi");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pts;
    pts.push_back(s_lo > 0.0 ? std::log(s_lo) : -inf);
    for (const double b : breaks) {
        if (b > s_lo && b < s_hi) {
            pts.push_back(std::log(b));
        }
    }
    pts.push_back(std::isinf(s_hi) ? inf : std::log(s_hi));
    std::sort(pts.begin() + 1, pts.end() - 1);
    const Integrand g = [&](double u) {
        const double s = std::exp(u);
        return (s > 0.0 && std::isfinite(s)) ? h(s) : 0.0;
    };
    return integrate_pieces(g, pts, options);
}

}  // namespace crm::numerics
