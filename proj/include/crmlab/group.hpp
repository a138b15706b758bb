#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crmlab/geometry.hpp"
#include "crmlab/measure.hpp"

namespace crm {

/// b(u) = exp(-1/(1-u^2)) for |u| < 1, else 0.
double bump(double u);
double bump_derivative(double u);
/// sup |b'|, attained at |u| ~ 0.7598.
inline constexpr double kBumpDerivativeSup = 0.79842975183359954416952742467;

/// One term a * b(|x - c| / w).
struct BumpTerm {
    double a = 0.0;
    Point c;
    double w = 1.0;
};

class Diffeo;

/// A positive function equal to 1 outside a compact set, acting on weights.
class Current {
  public:
    using Fn = std::function<double(const Point&)>;

    Current();
    static Current identity() { return {}; }
    /// prod_i exp(a_i b(|x - c_i| / w_i))
    static Current bumps(const std::vector<BumpTerm>& terms);
    static Current bump(double a, Point c, double w) { return bumps({{a, c, w}}); }
    /// `value` on `region`, 1 elsewhere. Discontinuous, so `allow_nonsmooth` must be set.
    static Current step(const Window& region, double value, bool allow_nonsmooth);
    /// Arbitrary positive function; equal to 1 outside `support`, values in [lower, upper].
    static Current callable(Fn fn, const Window& support, double lower, double upper);

    [[nodiscard]] double operator()(const Point& x) const;
    [[nodiscard]] double inf_bound() const { return node_->lower; }
    [[nodiscard]] double sup_bound() const { return node_->upper; }
    /// Bounding box of {theta != 1}; empty for the identity.
    [[nodiscard]] const std::optional<Window>& support() const { return node_->support; }
    [[nodiscard]] bool is_identity() const { return node_->identity; }
    [[nodiscard]] bool is_smooth() const { return node_->smooth; }
    /// Points along `axis` where theta may be non-smooth or changes form.
    [[nodiscard]] const std::vector<double>& breakpoints(std::size_t axis) const { return node_->breaks[axis]; }
    [[nodiscard]] const std::string& descriptor() const { return node_->descriptor; }

    /// Pointwise product.
    [[nodiscard]] Current operator*(const Current& other) const;
    /// Pointwise reciprocal 1/theta (the group inverse).
    [[nodiscard]] Current reciprocal() const;
    /// theta o phi
    [[nodiscard]] Current compose(const Diffeo& phi) const;

  private:
    struct Node {
        Fn fn;
        double lower = 1.0;
        double upper = 1.0;
        std::optional<Window> support;
        bool identity = true;
        bool smooth = true;
        std::array<std::vector<double>, kMaxDim> breaks;
        std::string descriptor = "identity";
    };
    explicit Current(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// A diffeomorphism equal to the identity outside a compact set.
class Diffeo {
  public:
    using Map = std::function<Point(const Point&)>;
    using Jac = std::function<double(const Point&)>;

    Diffeo();
    static Diffeo identity() { return {}; }
    /// One-dimensional phi(x) = x + sum_i a_i b((x - c_i)/w_i).
    /// Requires sum_i |a_i| sup|b'| / w_i < 1, which makes phi increasing.
    static Diffeo bumps(const std::vector<BumpTerm>& terms);
    static Diffeo bump(double a, double c, double w) { return bumps({{a, Point(c), w}}); }
    /// User-supplied map, inverse and Jacobian determinant modulus; identity outside `support`.
    static Diffeo callable(Map phi, Map phi_inverse, Jac jacobian, const Window& support);

    [[nodiscard]] Point operator()(const Point& x) const;
    [[nodiscard]] Point inverse_at(const Point& y) const;
    /// |det D phi(x)|
    [[nodiscard]] double jacobian(const Point& x) const;
    [[nodiscard]] const std::optional<Window>& support() const { return node_->support; }
    [[nodiscard]] bool is_identity() const { return node_->identity; }
    [[nodiscard]] const std::vector<double>& breakpoints(std::size_t axis) const { return node_->breaks[axis]; }
    [[nodiscard]] const std::string& descriptor() const { return node_->descriptor; }

    /// this o inner
    [[nodiscard]] Diffeo compose(const Diffeo& inner) const;
    [[nodiscard]] Diffeo inverse() const;

  private:
    struct Node {
        Map fwd;
        Map inv;
        Jac jac;
        std::optional<Window> support;
        bool identity = true;
        std::array<std::vector<double>, kMaxDim> breaks;
        std::string descriptor = "identity";
    };
    explicit Diffeo(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// g = (phi, theta), acting by x -> phi(x), s -> theta(phi(x)) s.
struct GroupElement {
    Diffeo phi;
    Current theta;

    static GroupElement identity() { return {}; }
    [[nodiscard]] bool is_identity() const { return phi.is_identity() && theta.is_identity(); }
    [[nodiscard]] std::string descriptor() const;
};

DiscreteMeasure apply_current(const Current& theta, const DiscreteMeasure& eta);
DiscreteMeasure apply_diffeo(const Diffeo& phi, const DiscreteMeasure& eta);
DiscreteMeasure apply_group(const GroupElement& g, const DiscreteMeasure& eta);

/// g1 g2 = (phi1 o phi2, theta1 (theta2 o phi1^-1))
GroupElement compose(const GroupElement& g1, const GroupElement& g2);
/// g^-1 = (phi^-1, theta^-1 o phi)
GroupElement inverse(const GroupElement& g);

enum class JacobianMode { exact, finite_difference };

/// J_phi(x) > 0. The finite-difference mode uses central differences with step h.
double jacobian(const Diffeo& phi, const Point& x, JacobianMode mode = JacobianMode::exact, double h = 1e-6);

}  // namespace crm
