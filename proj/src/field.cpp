#include "crmlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crmlab/errors.hpp"

namespace crm {

namespace {

// Visits the points of an n^d lattice of cell midpoints.
template <typename Fn>
void for_each_lattice_point(const Window& region, std::size_t n, Fn&& fn) {
    const std::size_t d = region.dim();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= n;
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point p = Point::zeros(d);
        std::size_t rem = idx;
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t k = rem % n;
            rem /= n;
            const double h = (region.upper()[i] - region.lower()[i]) / static_cast<double>(n);
            p[i] = region.lower()[i] + h * (static_cast<double>(k) + 0.5);
        }
        fn(p);
    }
}

}  // namespace

FieldFn FieldFn::constant(double value) {
    if (!std::isfinite(value)) {
        throw DomainError("field values must be finite");
    }
    FieldFn f;
    f.kind_ = Kind::constant;
    f.values_ = {value};
    return f;
}

FieldFn FieldFn::piecewise(Window grid, std::vector<double> values) {
    if (values.size() != grid.cell_count()) {
        throw DomainError("piecewise field needs one value per grid cell (" + std::to_string(grid.cell_count()) +
                          "), got " + std::to_string(values.size()));
    }
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError("field values must be finite");
        }
    }
    FieldFn f;
    f.kind_ = Kind::piecewise_constant;
    f.domain_ = grid;
    f.values_ = std::move(values);
    return f;
}

FieldFn FieldFn::smooth(std::function<double(const Point&)> fn, Window domain) {
    if (!fn) {
        throw DomainError("smooth field needs a callable");
    }
    FieldFn f;
    f.kind_ = Kind::smooth;
    f.domain_ = domain;
    f.fn_ = std::make_shared<const std::function<double(const Point&)>>(std::move(fn));
    return f;
}

double FieldFn::operator()(const Point& x) const {
    switch (kind_) {
        case Kind::constant:
            return values_.front();
        case Kind::piecewise_constant:
            return values_[domain_->cell_index(x)];
        case Kind::smooth: {
            if (!domain_->contains(x)) {
                throw DomainError("point " + to_string(x) + " outside field domain " + to_string(*domain_));
            }
            const double v = (*fn_)(x);
            if (!std::isfinite(v)) {
                throw NumericError("smooth field returned a non-finite value at " + to_string(x));
            }
            return v;
        }
    }
    return 0.0;
}

std::vector<double> FieldFn::breakpoints(std::size_t axis) const {
    if (kind_ != Kind::piecewise_constant) {
        return {};
    }
    return domain_->grid_lines(axis);
}

double FieldFn::min_over(const Window& region) const {
    double lo = std::numeric_limits<double>::infinity();
    switch (kind_) {
        case Kind::constant:
            return values_.front();
        case Kind::piecewise_constant:
            for (std::size_t c = 0; c < values_.size(); ++c) {
                if (domain_->cell(c).overlaps(region)) lo = std::min(lo, values_[c]);
            }
            return lo;
        case Kind::smooth:
            for_each_lattice_point(region.intersect(*domain_), 64, [&](const Point& p) { lo = std::min(lo, (*this)(p)); });
            return lo;
    }
    return lo;
}

double FieldFn::max_over(const Window& region) const {
    double hi = -std::numeric_limits<double>::infinity();
    switch (kind_) {
        case Kind::constant:
            return values_.front();
        case Kind::piecewise_constant:
            for (std::size_t c = 0; c < values_.size(); ++c) {
                if (domain_->cell(c).overlaps(region)) hi = std::max(hi, values_[c]);
            }
            return hi;
        case Kind::smooth:
            for_each_lattice_point(region.intersect(*domain_), 64, [&](const Point& p) { hi = std::max(hi, (*this)(p)); });
            return hi;
    }
    return hi;
}

std::optional<double> FieldFn::constant_value() const {
    if (kind_ == Kind::constant) {
        return values_.front();
    }
    if (kind_ == Kind::piecewise_constant &&
        std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); })) {
        return values_.front();
    }
    return std::nullopt;
}

FieldFn FieldFn::project_to_grid(const Window& grid) const {
    std::vector<double> vals(grid.cell_count());
    for (std::size_t c = 0; c < vals.size(); ++c) {
        vals[c] = (*this)(grid.cell(c).center());
    }
    return piecewise(grid, std::move(vals));
}

}  // namespace crm
