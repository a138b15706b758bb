#include "crmlab/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "crmlab/errors.hpp"

namespace crm {

namespace {

template <typename T, typename Loc>
void sort_and_check(std::vector<T>& items, Loc loc, const char* what) {
    std::sort(items.begin(), items.end(), [&](const T& a, const T& b) { return loc(a) < loc(b); });
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (loc(items[i]) == loc(items[i - 1])) {
            throw PinpointingError(std::string(what) + " has two points at " + to_string(loc(items[i])));
        }
    }
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("csv line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
    }
    return v;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<WeightedAtom> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
            throw DomainError("atom weights must be positive and finite");
        }
    }
    sort_and_check(atoms_, [](const WeightedAtom& a) -> const Point& { return a.location; }, "measure");
}

Configuration::Configuration(std::vector<MarkedPoint> points) : points_(std::move(points)) {
    for (const auto& p : points_) {
        if (!(p.mark > 0.0) || !std::isfinite(p.mark)) {
            throw DomainError("configuration marks must be positive and finite");
        }
    }
    sort_and_check(points_, [](const MarkedPoint& p) -> const Point& { return p.location; }, "configuration");
}

DiscreteMeasure r_map(const Configuration& gamma) {
    std::vector<WeightedAtom> atoms;
    atoms.reserve(gamma.size());
    for (const auto& p : gamma.points()) atoms.push_back({p.location, p.mark});
    return DiscreteMeasure(std::move(atoms));
}

Configuration r_inverse(const DiscreteMeasure& eta) {
    std::vector<MarkedPoint> pts;
    pts.reserve(eta.size());
    for (const auto& a : eta) pts.push_back({a.location, a.weight});
    return Configuration(std::move(pts));
}

double integrate(const DiscreteMeasure& eta, const std::function<double(const Point&)>& f) {
    double sum = 0.0;
    for (const auto& a : eta) sum += f(a.location) * a.weight;
    return sum;
}

double mass(const DiscreteMeasure& eta, const Window& region) {
    double sum = 0.0;
    for (const auto& a : eta) {
        if (region.contains(a.location)) sum += a.weight;
    }
    return sum;
}

DiscreteMeasure restrict_level(const DiscreteMeasure& eta, int n) {
    if (n < 1) {
        throw DomainError("level n must be >= 1");
    }
    const double threshold = 1.0 / static_cast<double>(n);
    std::vector<WeightedAtom> kept;
    for (const auto& a : eta) {
        if (a.weight >= threshold) kept.push_back(a);
    }
    return DiscreteMeasure(std::move(kept));
}

DiscreteMeasure restrict_window(const DiscreteMeasure& eta, const Window& region) {
    std::vector<WeightedAtom> kept;
    for (const auto& a : eta) {
        if (region.contains(a.location)) kept.push_back(a);
    }
    return DiscreteMeasure(std::move(kept));
}

void write_csv(std::ostream& out, const std::vector<DiscreteMeasure>& measures, std::size_t dim,
               bool with_replicate) {
    const bool rep = with_replicate || measures.size() > 1;
    if (rep) out << "replicate,";
    for (std::size_t i = 0; i < dim; ++i) out << "x_" << (i + 1) << ',';
    out << "weight\n";
    for (std::size_t r = 0; r < measures.size(); ++r) {
        for (const auto& a : measures[r]) {
            if (rep) out << r << ',';
            for (std::size_t i = 0; i < dim; ++i) out << format_double(a.location[i]) << ',';
            out << format_double(a.weight) << '\n';
        }
    }
}

void write_csv(std::ostream& out, const DiscreteMeasure& eta, std::size_t dim) {
    write_csv(out, std::vector<DiscreteMeasure>{eta}, dim, false);
}

std::vector<DiscreteMeasure> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("csv input is empty; a header row is required");
    }
    const auto header = split_csv_line(line);
    const bool rep = !header.empty() && header.front() == "replicate";
    const std::size_t first = rep ? 1 : 0;
    if (header.size() < first + 2 || header.back() != "weight") {
        throw ConfigError("csv header must be `x_1,...,x_d,weight`");
    }
    const std::size_t dim = header.size() - first - 1;
    if (dim > kMaxDim) {
        throw ConfigError("csv has more than " + std::to_string(kMaxDim) + " coordinates");
    }
    std::map<long, std::vector<WeightedAtom>> groups;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ConfigError("csv line " + std::to_string(line_no) + " has the wrong number of columns");
        }
        const long r = rep ? std::lround(parse_double(cells[0], line_no)) : 0;
        Point p = Point::zeros(dim);
        for (std::size_t i = 0; i < dim; ++i) p[i] = parse_double(cells[first + i], line_no);
        groups[r].push_back({p, parse_double(cells.back(), line_no)});
    }
    std::vector<DiscreteMeasure> out;
    if (!rep) {
        out.emplace_back(std::move(groups[0]));
        return out;
    }
    const long last = groups.empty() ? -1 : groups.rbegin()->first;
    for (long r = 0; r <= last; ++r) {
        auto it = groups.find(r);
        out.emplace_back(it == groups.end() ? std::vector<WeightedAtom>{} : std::move(it->second));
    }
    return out;
}

}  // namespace crm
