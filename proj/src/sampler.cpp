#include "crmlab/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "crmlab/errors.hpp"
#include "crmlab/random.hpp"

namespace crm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest s whose upper mass is below rel * m(x, [s_from, inf)).
double tail_cutoff(const LevyModel& model, const Point& x, double s_from, double cell_mass, double rel) {
    double s = std::max({s_from * 2.0, 1.0, model.eps_family()});
    for (int i = 0; i < 2000; ++i) {
        if (point_mass(model, x, s) < rel * cell_mass) return s;
        s *= 1.5;
    }
    throw NumericError("could not find a tail cutoff for the weight table");
}

}  // namespace

McEstimate summarize(const std::vector<double>& values) {
    McEstimate est;
    est.n_samples = values.size();
    if (values.empty()) return est;
    double sum = 0.0;
    for (const double v : values) sum += v;
    const double n = static_cast<double>(values.size());
    est.mean = sum / n;
    if (values.size() < 2) return est;
    double ss = 0.0;
    for (const double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
    return est;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min(hw, std::max<std::size_t>(1, n / 64));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    constexpr std::size_t chunk = 64;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t start = next.fetch_add(chunk);
            if (start >= n) return;
            const std::size_t stop = std::min(n, start + chunk);
            try {
                for (std::size_t i = start; i < stop; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

MeasureSampler::MeasureSampler(SamplerSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.eps_trunc > 0.0)) {
        throw DomainError("eps_trunc must be positive");
    }
    const LevyModel& model = spec_.model;
    const double eps_t = spec_.eps_trunc;
    auto breaks = model.s_breaks();
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 0.0;

    for (const Window& box : field_cells(model, spec_.window)) {
        const Point c = box.center();
        const double density_mass = point_mass(model, c, eps_t);
        if (!std::isfinite(density_mass)) {
            throw InfiniteMassError("truncated mass is infinite");
        }
        if (density_mass <= 0.0) continue;
        Cell cell;
        cell.box = box;
        cell.mass = density_mass * box.volume();

        const double s_max = tail_cutoff(model, c, eps_t, density_mass, 1e-12);
        const double u_lo = std::log(eps_t);
        const double u_hi = std::log(s_max);
        cell.log_knots.reserve(kKnots + breaks.size());
        for (std::size_t i = 0; i < kKnots; ++i) {
            cell.log_knots.push_back(u_lo + (u_hi - u_lo) * static_cast<double>(i) / static_cast<double>(kKnots - 1));
        }
        for (const double b : breaks) {
            if (b > eps_t && b < s_max) cell.log_knots.push_back(std::log(b));
        }
        std::sort(cell.log_knots.begin(), cell.log_knots.end());
        cell.log_knots.erase(std::unique(cell.log_knots.begin(), cell.log_knots.end()), cell.log_knots.end());

        cell.cdf.assign(cell.log_knots.size(), 0.0);
        for (std::size_t i = 1; i < cell.log_knots.size(); ++i) {
            const auto r = numerics::integrate_1d(
                [&](double u) {
                    const double v = model.l(c, std::exp(u));
                    if (!std::isfinite(v)) {
                        throw NumericError("l(x, s) is not finite while tabulating the weight law");
                    }
                    return v;
                },
                cell.log_knots[i - 1], cell.log_knots[i], opts);
            cell.cdf[i] = cell.cdf[i - 1] + r.value;
        }
        if (!(cell.cdf.back() > 0.0)) {
            throw NumericError("weight table has zero mass");
        }
        cells_.push_back(std::move(cell));
    }
    cell_cdf_.reserve(cells_.size());
    double acc = 0.0;
    for (const Cell& cell : cells_) {
        acc += cell.mass;
        cell_cdf_.push_back(acc);
    }
    total_mass_ = acc;
}

DiscreteMeasure MeasureSampler::sample(std::uint64_t stream) const {
    if (cells_.empty()) return {};
    Philox4x32 rng(spec_.seed, stream);
    const std::uint64_t n = sample_poisson(rng, total_mass_);
    std::vector<WeightedAtom> atoms;
    atoms.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) {
        const double pick = rng.uniform() * total_mass_;
        const auto cit = std::upper_bound(cell_cdf_.begin(), cell_cdf_.end(), pick);
        const Cell& cell =
            cells_[std::min<std::size_t>(static_cast<std::size_t>(cit - cell_cdf_.begin()), cells_.size() - 1)];

        Point x = Point::zeros(cell.box.dim());
        for (std::size_t i = 0; i < cell.box.dim(); ++i) {
            const double lo = cell.box.lower()[i];
            const double hi = cell.box.upper()[i];
            x[i] = std::min(lo + (hi - lo) * rng.uniform(), hi);
        }

        const double target = rng.uniform() * cell.cdf.back();
        auto it = std::upper_bound(cell.cdf.begin(), cell.cdf.end(), target);
        std::size_t k = static_cast<std::size_t>(it - cell.cdf.begin());
        k = std::clamp<std::size_t>(k, 1, cell.cdf.size() - 1);
        const double c0 = cell.cdf[k - 1];
        const double c1 = cell.cdf[k];
        const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        const double u0 = cell.log_knots[k - 1];
        const double u1 = cell.log_knots[k];
        double s = std::exp(u0 + frac * (u1 - u0));
        s = std::clamp(s, std::exp(u0), std::exp(u1));
        if (k == 1) s = std::max(s, spec_.eps_trunc);
        atoms.push_back({x, s});
    }
    return DiscreteMeasure(std::move(atoms));
}

DiscreteMeasure sample_measure(const SamplerSpec& spec) { return MeasureSampler(spec).sample(0); }

double laplace_exponent(const SamplerSpec& spec, const SpatialFn& f, const LaplaceOptions& options) {
    const LevyModel& model = spec.model;
    numerics::AxisBreaks breaks = options.f_breaks;
    for (std::size_t i = 0; i < spec.window.dim(); ++i) {
        const auto mb = model.spatial_breaks(i);
        breaks[i].insert(breaks[i].end(), mb.begin(), mb.end());
    }
    const auto s_breaks = model.s_breaks();
    numerics::QuadratureOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-13;
    const auto r = numerics::integrate_box(
        [&](const Point& x) {
            const double fx = f(x);
            if (fx < 0.0 && !options.allow_negative) {
                throw DomainError("Laplace functional needs f >= 0");
            }
            if (fx == 0.0 || !model.in_support(x)) return 0.0;
            const auto in = numerics::integrate_dlog(
                [&](double s) { return std::expm1(-fx * s) * model.l(x, s); }, spec.eps_trunc, kInf, s_breaks,
                opts);
            return in.value;
        },
        spec.window, breaks, opts);
    if (!std::isfinite(r.value)) {
        throw NumericError("Laplace exponent is not finite");
    }
    return r.value;
}

double laplace_exact(const SamplerSpec& spec, const SpatialFn& f, const LaplaceOptions& options) {
    return std::exp(laplace_exponent(spec, f, options));
}

McEstimate laplace_mc(const SamplerSpec& spec, const SpatialFn& f, std::size_t n_samples) {
    if (n_samples < 2) {
        throw DomainError("laplace_mc needs at least two samples");
    }
    const MeasureSampler sampler(spec);
    std::vector<double> values(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const DiscreteMeasure eta = sampler.sample(i);
        values[i] = std::exp(-integrate(eta, f));
    });
    return summarize(values);
}

double gamma_laplace_closed_form(double alpha, double beta, double volume, double t) {
    if (!(1.0 + alpha * t > 0.0)) {
        throw DomainError("closed form needs t > -1/alpha");
    }
    return std::pow(1.0 + alpha * t, -beta * volume);
}

}  // namespace crm
