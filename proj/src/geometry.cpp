#include "crmlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crmlab/errors.hpp"

namespace crm {

Point::Point(std::initializer_list<double> xs) : dim(xs.size()) {
    if (dim == 0 || dim > kMaxDim) {
        throw DomainError("point dimension must be in 1..3");
    }
    std::copy(xs.begin(), xs.end(), coords.begin());
}

Point Point::zeros(std::size_t d) {
    if (d == 0 || d > kMaxDim) {
        throw DomainError("point dimension must be in 1..3");
    }
    Point p;
    p.dim = d;
    return p;
}

std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (a.dim != b.dim) {
        return a.dim <=> b.dim;
    }
    for (std::size_t i = 0; i < a.dim; ++i) {
        if (a.coords[i] < b.coords[i]) return std::strong_ordering::less;
        if (a.coords[i] > b.coords[i]) return std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

double distance(const Point& a, const Point& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::string to_string(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.dim; ++i) {
        os << (i ? ", " : "") << p[i];
    }
    os << ')';
    return os.str();
}

Window::Window(Point lower, Point upper) : Window(lower, upper, {1, 1, 1}) {}

Window::Window(Point lower, Point upper, std::array<std::size_t, kMaxDim> cells)
    : lower_(lower), upper_(upper), cells_(cells) {
    if (lower_.dim != upper_.dim) {
        throw DomainError("window corners have different dimensions");
    }
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
            throw DomainError("window requires finite lower < upper on every axis");
        }
        if (cells_[i] == 0) {
            throw DomainError("window grid needs at least one cell per axis");
        }
    }
    for (std::size_t i = dim(); i < kMaxDim; ++i) {
        cells_[i] = 1;
    }
}

Window Window::interval(double lo, double hi, std::size_t cells) {
    return Window(Point(lo), Point(hi), {cells, 1, 1});
}

double Window::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        v *= upper_[i] - lower_[i];
    }
    return v;
}

double Window::diameter() const { return distance(lower_, upper_); }

Point Window::center() const {
    Point c = Point::zeros(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        c[i] = 0.5 * (lower_[i] + upper_[i]);
    }
    return c;
}

bool Window::contains(const Point& p) const {
    if (p.dim != dim()) {
        return false;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
        if (p[i] < lower_[i] || p[i] > upper_[i]) {
            return false;
        }
    }
    return true;
}

bool Window::contains(const Window& inner, double margin) const {
    if (inner.dim() != dim()) {
        return false;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
        if (inner.lower_[i] < lower_[i] + margin || inner.upper_[i] > upper_[i] - margin) {
            return false;
        }
    }
    return true;
}

std::size_t Window::cell_count() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < dim(); ++i) {
        n *= cells_[i];
    }
    return n;
}

std::size_t Window::cell_index(const Point& p) const {
    if (!contains(p)) {
        throw DomainError("point " + to_string(p) + " outside window " + to_string(*this));
    }
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double rel = (p[i] - lower_[i]) / (upper_[i] - lower_[i]);
        auto k = static_cast<std::size_t>(rel * static_cast<double>(cells_[i]));
        k = std::min(k, cells_[i] - 1);
        flat = flat * cells_[i] + k;
    }
    return flat;
}

Window Window::cell(std::size_t flat_index) const {
    Point lo = Point::zeros(dim());
    Point hi = Point::zeros(dim());
    for (std::size_t ii = dim(); ii-- > 0;) {
        const std::size_t k = flat_index % cells_[ii];
        flat_index /= cells_[ii];
        const double h = (upper_[ii] - lower_[ii]) / static_cast<double>(cells_[ii]);
        lo[ii] = lower_[ii] + h * static_cast<double>(k);
        hi[ii] = (k + 1 == cells_[ii]) ? upper_[ii] : lower_[ii] + h * static_cast<double>(k + 1);
    }
    return Window(lo, hi);
}

std::vector<double> Window::grid_lines(std::size_t axis) const {
    std::vector<double> lines(cells_[axis] + 1);
    const double h = (upper_[axis] - lower_[axis]) / static_cast<double>(cells_[axis]);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        lines[k] = lower_[axis] + h * static_cast<double>(k);
    }
    lines.back() = upper_[axis];
    return lines;
}

Window Window::with_cells(std::array<std::size_t, kMaxDim> cells) const {
    return Window(lower_, upper_, cells);
}

bool Window::overlaps(const Window& other) const {
    if (other.dim() != dim()) {
        return false;
    }
    for (std::size_t i = 0; i < dim(); ++i) {
        if (std::max(lower_[i], other.lower_[i]) >= std::min(upper_[i], other.upper_[i])) {
            return false;
        }
    }
    return true;
}

Window Window::intersect(const Window& other) const {
    if (!overlaps(other)) {
        throw DomainError("windows " + to_string(*this) + " and " + to_string(other) + " do not overlap");
    }
    Point lo = Point::zeros(dim());
    Point hi = Point::zeros(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        lo[i] = std::max(lower_[i], other.lower_[i]);
        hi[i] = std::min(upper_[i], other.upper_[i]);
    }
    return Window(lo, hi);
}

Window Window::hull(const Window& other) const {
    if (other.dim() != dim()) {
        throw DomainError("hull of windows with different dimensions");
    }
    Point lo = Point::zeros(dim());
    Point hi = Point::zeros(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        lo[i] = std::min(lower_[i], other.lower_[i]);
        hi[i] = std::max(upper_[i], other.upper_[i]);
    }
    return Window(lo, hi);
}

std::string to_string(const Window& w) {
    return "[" + to_string(w.lower()) + ", " + to_string(w.upper()) + "]";
}

}  // namespace crm
