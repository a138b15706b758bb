#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crmlab/levy_model.hpp"
#include "crmlab/measure.hpp"
#include "crmlab/spatial.hpp"

namespace crm {

/// The truncated law: Poisson process with intensity m restricted to window x [eps_trunc, inf).
struct SamplerSpec {
    LevyModel model;
    Window window;
    double eps_trunc = 1e-6;
    std::uint64_t seed = 0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

/// Mean and standard error of the mean.
McEstimate summarize(const std::vector<double>& values);

/// Runs fn(i) for i in [0, n) on all hardware threads. The first exception thrown
/// by any call is rethrown after every worker has stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Exact sampler for the truncated law of a model with piecewise-constant fields.
///
/// Locations are drawn from the mixture over field cells, weights by inverting a
/// tabulated CDF of l(x, s)/s on 4096 log-spaced knots. Construction does all the
/// tabulation; sample() is const and thread-safe.
class MeasureSampler {
  public:
    static constexpr std::size_t kKnots = 4096;

    explicit MeasureSampler(SamplerSpec spec);

    [[nodiscard]] const SamplerSpec& spec() const { return spec_; }
    /// m(window x [eps_trunc, inf)).
    [[nodiscard]] double total_mass() const { return total_mass_; }
    /// Draw with generator stream `stream` of the configured seed.
    [[nodiscard]] DiscreteMeasure sample(std::uint64_t stream) const;

  private:
    struct Cell {
        Window box;
        double mass = 0.0;
        std::vector<double> log_knots;
        std::vector<double> cdf;  // cumulative, cdf.front() = 0
    };

    SamplerSpec spec_;
    std::vector<Cell> cells_;
    std::vector<double> cell_cdf_;
    double total_mass_ = 0.0;
};

/// One draw using stream 0.
DiscreteMeasure sample_measure(const SamplerSpec& spec);

using SpatialFn = std::function<double(const Point&)>;

struct LaplaceOptions {
    /// Split points of f along each axis (faces of indicator regions).
    numerics::AxisBreaks f_breaks{};
    /// Permit f < 0 (moment generating function); the integral must still converge.
    bool allow_negative = false;
};

/// int_window int_{eps_trunc}^inf (e^{-f(x)s} - 1) l(x,s)/s ds dx.
double laplace_exponent(const SamplerSpec& spec, const SpatialFn& f, const LaplaceOptions& options = {});

/// E exp(-<f, eta>) under the truncated law, by quadrature.
double laplace_exact(const SamplerSpec& spec, const SpatialFn& f, const LaplaceOptions& options = {});

/// Monte Carlo estimate of E exp(-<f, eta>); replicate i uses stream i.
McEstimate laplace_mc(const SamplerSpec& spec, const SpatialFn& f, std::size_t n_samples);

/// Untruncated gamma Laplace transform (1 + alpha t)^(-beta vol).
double gamma_laplace_closed_form(double alpha, double beta, double volume, double t);

}  // namespace crm
