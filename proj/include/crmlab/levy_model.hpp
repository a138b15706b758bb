#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crmlab/field.hpp"
#include "crmlab/geometry.hpp"
#include "crmlab/quadrature.hpp"

namespace crm {

enum class Family { gamma, log_type, power_type, custom };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// Large-jump part g(x, s), s >= eps_family, of the log- and power-type families.
/// Default: beta(x) * exp(-rate * s).
struct TailFn {
    double rate = 1.0;
    std::function<double(const Point&, double)> custom;

    [[nodiscard]] bool is_default() const { return !custom; }
};

using LevyFn = std::function<double(const Point&, double)>;

/// A Levy density l(x, s); the Levy measure is dm = l(x, s)/s dx ds.
///
/// For each x, l(x, .) is either identically zero (x outside the support set Y)
/// or strictly positive. Fields are looked up on their own windows; outside the
/// common domain of alpha and beta the density is zero.
class LevyModel {
  public:
    /// l = beta exp(-s/alpha)
    static LevyModel gamma(FieldFn alpha, FieldFn beta);
    /// l = beta (-log s)^(-alpha) for s < eps, tail above; eps in (0, 1/e)
    static LevyModel log_type(FieldFn alpha, FieldFn beta, double eps_family = 0.3, TailFn tail = {});
    /// l = beta s^(1-alpha) for s < eps, tail above; alpha in (0, 1), eps in (0, 1)
    static LevyModel power_type(FieldFn alpha, FieldFn beta, double eps_family = 0.5, TailFn tail = {});
    /// Arbitrary nonnegative l. `homogeneous` declares that l does not depend on x
    /// inside `domain`; `s_breaks` lists discontinuities in s.
    static LevyModel custom(LevyFn l, std::optional<Window> domain = std::nullopt, bool homogeneous = false,
                            std::vector<double> s_breaks = {});

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] const FieldFn& alpha() const { return alpha_; }
    [[nodiscard]] const FieldFn& beta() const { return beta_; }
    [[nodiscard]] double eps_family() const { return eps_family_; }
    [[nodiscard]] const TailFn& tail() const { return tail_; }
    [[nodiscard]] const std::optional<Window>& domain() const { return domain_; }

    /// x in Y, i.e. l(x, .) > 0.
    [[nodiscard]] bool in_support(const Point& x) const;
    /// l(x, s); s must be positive.
    [[nodiscard]] double l(const Point& x, double s) const;
    /// log l(x, s), -inf off the support.
    [[nodiscard]] double log_l(const Point& x, double s) const;
    /// l(x, s) - l(x, r s) evaluated without cancellation where the family allows it.
    [[nodiscard]] double l_difference(const Point& x, double s, double r) const;

    /// Discontinuities of l(x, .) in s.
    [[nodiscard]] std::vector<double> s_breaks() const;
    /// Grid lines of the fields along `axis`, plus the domain faces.
    [[nodiscard]] std::vector<double> spatial_breaks(std::size_t axis) const;
    /// l(x, s) does not depend on x on the domain.
    [[nodiscard]] bool spatially_homogeneous() const;
    /// All fields are constant or piecewise constant.
    [[nodiscard]] bool piecewise_fields() const;

  private:
    LevyModel() = default;
    void validate() const;
    [[nodiscard]] double tail_value(const Point& x, double beta, double s) const;

    Family family_ = Family::gamma;
    FieldFn alpha_ = FieldFn::constant(1.0);
    FieldFn beta_ = FieldFn::constant(1.0);
    double eps_family_ = 0.0;
    TailFn tail_;
    LevyFn custom_l_;
    std::optional<Window> domain_;
    bool custom_homogeneous_ = false;
    std::vector<double> custom_breaks_;
};

/// l(x, s) with the documented domain check.
double eval_l(const LevyModel& model, const Point& x, double s);

enum class IntegrabilityVerdict { satisfied, violated, inconclusive };
std::string to_string(IntegrabilityVerdict v);

struct IntegrabilityResult {
    IntegrabilityVerdict verdict = IntegrabilityVerdict::inconclusive;
    double value = 0.0;  ///< last refinement of the integral
    std::vector<double> refinements;
};

/// Integrability diagnostic for int_{A x R+} l(x,s) min(1/s, 1) dx ds.
///
/// The integral is evaluated on the truncated ranges [10^-2k, 10^2k], k = 1..8.
/// Three successive refinements each growing by >= 10% mean "violated"; a final
/// relative change below 1e-6 means "satisfied".
IntegrabilityResult check_integrability(const LevyModel& model, const Window& window);

enum class MassMethod { automatic, quadrature };

/// m(window x [s_min, inf)). s_min = 0 asks for the full mass and throws
/// InfiniteMassError when it is infinite.
double total_mass(const LevyModel& model, const Window& window, double s_min,
                  MassMethod method = MassMethod::automatic);

/// Mass of m(x, [s_min, inf)) above a single location, i.e. int_{s_min}^inf l(x,s)/s ds.
double point_mass(const LevyModel& model, const Point& x, double s_min, MassMethod method = MassMethod::automatic);

enum class MassClass { finite, infinite };
std::string to_string(MassClass c);

/// Analytic classification of m(window x R+) for the three named families.
MassClass mass_classification(const LevyModel& model, const Window& window);

/// Cells of the common refinement of the field grids inside `window`; the whole
/// window when the fields are constant. Throws for smooth fields.
std::vector<Window> field_cells(const LevyModel& model, const Window& window);

/// -log(1 + u), u > -1.
double frullani(double u);
/// The same value from int_0^inf (e^{-us} - 1) e^{-s} / s ds by quadrature.
numerics::QuadratureResult frullani_quadrature(double u);

}  // namespace crm
