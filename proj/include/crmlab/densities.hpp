#pragma once

#include <string>
#include <vector>

#include "crmlab/group.hpp"
#include "crmlab/levy_model.hpp"
#include "crmlab/measure.hpp"
#include "crmlab/quadrature.hpp"

namespace crm {

/// A Radon-Nikodym density kept in log space: log_value = atom_terms + correction_term.
struct LogDensity {
    double log_value = 0.0;
    double atom_terms = 0.0;
    double correction_term = 0.0;
    std::size_t n_atoms = 0;
};

struct DensityOptions {
    /// Lower end of the s-range of the deterministic correction integrals. With
    /// floor eps_t the density is the exact change of measure between the
    /// eps_t-truncated law and its image, for functionals blind to atoms below
    /// eps_t sup(theta).
    double correction_floor = 0.0;
    numerics::QuadratureOptions quadrature{1e-10, 1e-13, 10000, numerics::EndpointSingularity::none};
};

/// Density of the image of mu_m under a current theta. The correction integral
/// depends only on (model, theta), so it is computed once at construction.
class CurrentDensity {
  public:
    CurrentDensity(const LevyModel& model, Current theta, const DensityOptions& options = {});
    [[nodiscard]] LogDensity operator()(const DiscreteMeasure& eta) const;
    [[nodiscard]] double correction() const { return correction_; }

  private:
    LevyModel model_;
    Current theta_;
    double correction_ = 0.0;
};

/// Density of the image under a diffeomorphism; needs finite mass on supp(phi).
class DiffeoDensity {
  public:
    DiffeoDensity(const LevyModel& model, Diffeo phi);
    [[nodiscard]] LogDensity operator()(const DiscreteMeasure& eta) const;

  private:
    LevyModel model_;
    Diffeo phi_;
    Diffeo phi_inv_;
};

/// Density of the image under g = (phi, theta).
class SemidirectDensity {
  public:
    SemidirectDensity(const LevyModel& model, GroupElement g, const DensityOptions& options = {});
    [[nodiscard]] LogDensity operator()(const DiscreteMeasure& eta) const;

  private:
    LevyModel model_;
    GroupElement g_;
    Diffeo phi_inv_;
    CurrentDensity current_;
    double diffeo_correction_ = 0.0;
};

/// Level-n density R_g^(n): the diffeo factor over atoms with s >= theta(x)/k,
/// k = ceil(n sup theta), times the full current density.
class PartialDensity {
  public:
    PartialDensity(const LevyModel& model, GroupElement g, int n, const DensityOptions& options = {});
    [[nodiscard]] LogDensity operator()(const DiscreteMeasure& eta) const;
    [[nodiscard]] int k() const { return k_; }

  private:
    LevyModel model_;
    GroupElement g_;
    Diffeo phi_inv_;
    CurrentDensity current_;
    int k_ = 1;
};

LogDensity current_density(const LevyModel& model, const Current& theta, const DiscreteMeasure& eta,
                           const DensityOptions& options = {});

/// Gamma closed form: sum (1 - 1/theta) s / alpha - int beta log theta dx.
LogDensity current_density_gamma(const FieldFn& alpha, const FieldFn& beta, const Current& theta,
                                 const DiscreteMeasure& eta);

LogDensity diffeo_density(const LevyModel& model, const Diffeo& phi, const DiscreteMeasure& eta);

LogDensity semidirect_density(const LevyModel& model, const GroupElement& g, const DiscreteMeasure& eta,
                              const DensityOptions& options = {});

LogDensity partial_density(const LevyModel& model, const GroupElement& g, const DiscreteMeasure& eta, int n,
                           const DensityOptions& options = {});

/// k = ceil(n sup theta)
int partial_level_k(const Current& theta, int n);

/// H(eps) = int_supp(phi) int_eps^inf (sqrt(l(phi^-1 x, s) J_{phi^-1}(x)) - sqrt(l(x, s)))^2 / s ds dx
double hellinger_integral(const LevyModel& model, const Diffeo& phi, double eps);
/// The same integrand over s in [s_lo, s_hi).
double hellinger_band(const LevyModel& model, const Diffeo& phi, double s_lo, double s_hi);

enum class HellingerVerdict { converges, diverges, inconclusive };
enum class QiVerdict { quasi_invariant, not_quasi_invariant, inconclusive };
std::string to_string(HellingerVerdict v);
std::string to_string(QiVerdict v);

struct HellingerReport {
    std::vector<double> eps_list;  ///< decreasing
    std::vector<double> values;    ///< H(eps), non-decreasing
    HellingerVerdict verdict = HellingerVerdict::inconclusive;
    double fitted_log_slope = 0.0;  ///< slope of H against log(1/eps) on 1e-2..1e-5
    double slope_std_error = 0.0;
    double last_base_increment = 0.0;
};

/// Hellinger ladder eps_j = 10^-(2+j). "converges" once two successive relative
/// increments fall below 1e-3 (the ladder continues to 1e-60 if needed);
/// otherwise "diverges" when the base-ladder slope exceeds ten standard errors
/// and its last relative increment exceeds 1%.
HellingerReport hellinger_ladder(const LevyModel& model, const Diffeo& phi);

struct QiDiagnosis {
    QiVerdict verdict = QiVerdict::inconclusive;
    HellingerReport report;
};

QiDiagnosis diagnose_diffeo_qi(const LevyModel& model, const Diffeo& phi);

/// {log_value, atom_terms, correction_term, n_atoms, family, transform_descriptor}
std::string density_report_json(const LogDensity& d, const LevyModel& model, const std::string& transform);

}  // namespace crm
