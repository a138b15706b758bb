#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace crm {

inline constexpr std::size_t kMaxDim = 3;

/// A point of R^d, 1 <= d <= 3, stored inline.
struct Point {
    std::array<double, kMaxDim> coords{};
    std::size_t dim = 1;

    Point() = default;
    Point(double x) : coords{x, 0.0, 0.0}, dim(1) {}  // NOLINT: 1-d points read naturally as doubles
    Point(std::initializer_list<double> xs);
    static Point zeros(std::size_t d);

    double& operator[](std::size_t i) { return coords[i]; }
    double operator[](std::size_t i) const { return coords[i]; }

    friend bool operator==(const Point& a, const Point& b) {
        return a.dim == b.dim && a.coords == b.coords;
    }
    /// Lexicographic order on coordinates.
    friend std::strong_ordering operator<=>(const Point& a, const Point& b);
};

double distance(const Point& a, const Point& b);
std::string to_string(const Point& p);

/// Axis-aligned box [lower, upper] with an optional regular grid of cells.
class Window {
  public:
    Window() = default;
    Window(Point lower, Point upper);
    Window(Point lower, Point upper, std::array<std::size_t, kMaxDim> cells);
    static Window interval(double lo, double hi, std::size_t cells = 1);

    [[nodiscard]] std::size_t dim() const { return lower_.dim; }
    [[nodiscard]] const Point& lower() const { return lower_; }
    [[nodiscard]] const Point& upper() const { return upper_; }
    [[nodiscard]] double volume() const;
    [[nodiscard]] double diameter() const;
    [[nodiscard]] Point center() const;
    [[nodiscard]] bool contains(const Point& p) const;
    /// True when `inner` lies in this window with at least `margin` to every face.
    [[nodiscard]] bool contains(const Window& inner, double margin = 0.0) const;

    [[nodiscard]] std::size_t cells(std::size_t axis) const { return cells_[axis]; }
    [[nodiscard]] std::size_t cell_count() const;
    /// Flat (row-major, last axis fastest) index of the cell containing p.
    [[nodiscard]] std::size_t cell_index(const Point& p) const;
    [[nodiscard]] Window cell(std::size_t flat_index) const;
    /// Grid lines along `axis`, including both ends.
    [[nodiscard]] std::vector<double> grid_lines(std::size_t axis) const;

    [[nodiscard]] Window with_cells(std::array<std::size_t, kMaxDim> cells) const;
    [[nodiscard]] Window intersect(const Window& other) const;
    [[nodiscard]] bool overlaps(const Window& other) const;
    [[nodiscard]] Window hull(const Window& other) const;

  private:
    Point lower_{0.0};
    Point upper_{1.0};
    std::array<std::size_t, kMaxDim> cells_{1, 1, 1};
};

std::string to_string(const Window& w);

}  // namespace crm
