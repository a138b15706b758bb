#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "crmlab/geometry.hpp"

namespace crm {

struct WeightedAtom {
    Point location;
    double weight = 0.0;

    friend bool operator==(const WeightedAtom&, const WeightedAtom&) = default;
};

/// A finite discrete measure sum_i s_i delta_{x_i}.
///
/// Atoms are kept sorted by location; locations are pairwise distinct and
/// weights strictly positive. Construction rejects anything else.
class DiscreteMeasure {
  public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::vector<WeightedAtom> atoms);

    [[nodiscard]] const std::vector<WeightedAtom>& atoms() const { return atoms_; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }
    [[nodiscard]] bool empty() const { return atoms_.empty(); }
    [[nodiscard]] auto begin() const { return atoms_.begin(); }
    [[nodiscard]] auto end() const { return atoms_.end(); }

    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

  private:
    std::vector<WeightedAtom> atoms_;
};

struct MarkedPoint {
    Point location;
    double mark = 0.0;

    friend bool operator==(const MarkedPoint&, const MarkedPoint&) = default;
};

/// A finite pinpointing configuration on X x R+, sorted by location.
class Configuration {
  public:
    Configuration() = default;
    explicit Configuration(std::vector<MarkedPoint> points);

    [[nodiscard]] const std::vector<MarkedPoint>& points() const { return points_; }
    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] bool empty() const { return points_.empty(); }

    friend bool operator==(const Configuration&, const Configuration&) = default;

  private:
    std::vector<MarkedPoint> points_;
};

DiscreteMeasure r_map(const Configuration& gamma);
Configuration r_inverse(const DiscreteMeasure& eta);

/// <f, eta> = sum_i f(x_i) s_i
double integrate(const DiscreteMeasure& eta, const std::function<double(const Point&)>& f);

/// eta(region)
double mass(const DiscreteMeasure& eta, const Window& region);

/// Atoms with weight >= 1/n.
DiscreteMeasure restrict_level(const DiscreteMeasure& eta, int n);

/// Atoms whose location lies in `region`.
DiscreteMeasure restrict_window(const DiscreteMeasure& eta, const Window& region);

/// CSV with header `x_1,...,x_d,weight`, plus a leading `replicate` column when
/// more than one measure is written or `with_replicate` is set.
void write_csv(std::ostream& out, const std::vector<DiscreteMeasure>& measures, std::size_t dim,
               bool with_replicate = false);
void write_csv(std::ostream& out, const DiscreteMeasure& eta, std::size_t dim);

/// Reads either layout back; without a replicate column a single measure is returned.
std::vector<DiscreteMeasure> read_csv(std::istream& in);

}  // namespace crm
