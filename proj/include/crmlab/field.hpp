#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "crmlab/geometry.hpp"

namespace crm {

/// A real-valued spatial field: constant, piecewise constant on a grid, or a
/// smooth closure restricted to a window.
class FieldFn {
  public:
    enum class Kind { constant, piecewise_constant, smooth };

    static FieldFn constant(double value);
    /// `values` are row-major over `grid.cell_count()` cells.
    static FieldFn piecewise(Window grid, std::vector<double> values);
    static FieldFn smooth(std::function<double(const Point&)> fn, Window domain);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] bool is_piecewise_constant() const { return kind_ != Kind::smooth; }
    /// The window on which the field is defined; empty for constants (all of R^d).
    [[nodiscard]] const std::optional<Window>& domain() const { return domain_; }

    /// Value at x. Throws DomainError outside the domain.
    [[nodiscard]] double operator()(const Point& x) const;

    /// Grid lines of a piecewise field along `axis` (empty for other kinds).
    [[nodiscard]] std::vector<double> breakpoints(std::size_t axis) const;

    /// Lower/upper bound over `region`: exact for piecewise fields, sampled on a
    /// 64^d lattice for smooth ones.
    [[nodiscard]] double min_over(const Window& region) const;
    [[nodiscard]] double max_over(const Window& region) const;

    [[nodiscard]] std::optional<double> constant_value() const;
    [[nodiscard]] const std::vector<double>& cell_values() const { return values_; }

    /// Piecewise-constant projection sampled at cell midpoints.
    [[nodiscard]] FieldFn project_to_grid(const Window& grid) const;

  private:
    Kind kind_ = Kind::constant;
    std::optional<Window> domain_;
    std::vector<double> values_;
    std::shared_ptr<const std::function<double(const Point&)>> fn_;
};

}  // namespace crm
