#include "crmlab/config.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crmlab/errors.hpp"

namespace crm {

namespace {

constexpr std::array kKnownKeys = {
    "family",         "alpha",           "beta",        "eps_family",     "tail",
    "window",         "grid",            "eps_trunc",   "seed",           "n_samples",
    "current.a",      "current.c",       "current.w",   "current.step",   "current.allow_nonsmooth",
    "diffeo.a",       "diffeo.c",        "diffeo.w",    "functional.kind", "functional.region",
    "functional.t",   "functional.level",
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("key '" + key + "': '" + tok + "' is not a finite number");
    }
    return v;
}

bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + s + "'");
}

Point to_point(const std::string& tok, const std::string& key) {
    std::vector<double> xs;
    std::stringstream ss(tok);
    std::string part;
    while (std::getline(ss, part, ',')) xs.push_back(to_double(trim(part), key));
    if (xs.empty() || xs.size() > kMaxDim) {
        throw ConfigError("key '" + key + "': bad point '" + tok + "'");
    }
    Point p = Point::zeros(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) p[i] = xs[i];
    return p;
}

std::vector<BumpTerm> bump_terms(const Config& cfg, const std::string& prefix) {
    const auto a = cfg.get_doubles(prefix + ".a");
    const auto w = cfg.get_doubles(prefix + ".w");
    const auto c_tokens = tokens(cfg.get_or(prefix + ".c", ""));
    if (a.size() != w.size() || a.size() != c_tokens.size()) {
        throw ConfigError(prefix + ".a, " + prefix + ".c and " + prefix + ".w must list the same number of terms");
    }
    std::vector<BumpTerm> terms;
    for (std::size_t i = 0; i < a.size(); ++i) terms.push_back({a[i], to_point(c_tokens[i], prefix + ".c"), w[i]});
    return terms;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected `key = value`");
        }
        cfg.assign(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::assign(const std::string& key, const std::string& value, const std::string& where) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
        throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
        throw ConfigError(where + ": key '" + key + "' has no value");
    }
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Config::merge(const Config& overlay) {
    for (const auto& [k, v] : overlay.entries_) assign(k, v, "overlay");
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    assign(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
}

bool Config::has(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> Config::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? to_double(*v, key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : tokens(get_or(key, ""))) out.push_back(to_double(tok, key));
    return out;
}

nlohmann::ordered_json Config::echo() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    return j;
}

Window build_window(const Config& cfg) {
    const auto bounds = cfg.get_doubles("window");
    if (bounds.empty()) {
        throw ConfigError("missing key 'window'");
    }
    if (bounds.size() % 2 != 0 || bounds.size() / 2 > kMaxDim) {
        throw ConfigError("window needs `lo hi` pairs for 1 to 3 axes");
    }
    const std::size_t d = bounds.size() / 2;
    Point lo = Point::zeros(d);
    Point hi = Point::zeros(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = bounds[2 * i];
        hi[i] = bounds[2 * i + 1];
    }
    std::array<std::size_t, kMaxDim> cells{1, 1, 1};
    const auto grid = cfg.get_doubles("grid");
    if (!grid.empty()) {
        if (grid.size() != 1 && grid.size() != d) {
            throw ConfigError("grid needs one cell count or one per axis");
        }
        for (std::size_t i = 0; i < d; ++i) {
            const double g = grid.size() == 1 ? grid[0] : grid[i];
            if (!(g >= 1.0) || g != std::floor(g)) {
                throw ConfigError("grid cell counts must be positive integers");
            }
            cells[i] = static_cast<std::size_t>(g);
        }
    }
    try {
        return Window(lo, hi, cells);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("bad window: ") + e.what());
    }
}

namespace {

FieldFn build_field(const Config& cfg, const std::string& key, const Window& window) {
    const auto values = cfg.get_doubles(key);
    if (values.empty()) {
        throw ConfigError("missing key '" + key + "'");
    }
    if (values.size() == 1) return FieldFn::constant(values[0]);
    if (values.size() != window.cell_count()) {
        throw ConfigError("key '" + key + "' needs 1 or " + std::to_string(window.cell_count()) + " values");
    }
    return FieldFn::piecewise(window, values);
}

}  // namespace

LevyModel build_model(const Config& cfg) {
    const auto family_name = cfg.get("family");
    if (!family_name) {
        throw ConfigError("missing key 'family'");
    }
    const Family family = family_from_string(*family_name);
    const Window window = build_window(cfg);
    try {
        FieldFn alpha = build_field(cfg, "alpha", window);
        FieldFn beta = build_field(cfg, "beta", window);
        TailFn tail;
        if (const auto t = cfg.get("tail")) {
            const auto toks = tokens(*t);
            if (toks.empty() || toks[0] != "exp" || toks.size() > 2) {
                throw ConfigError("tail must be `exp` or `exp <rate>`");
            }
            if (toks.size() == 2) tail.rate = to_double(toks[1], "tail");
        }
        switch (family) {
            case Family::gamma:
                if (cfg.has("tail") || cfg.has("eps_family")) {
                    throw ConfigError("the gamma family takes no tail or eps_family");
                }
                return LevyModel::gamma(alpha, beta);
            case Family::log_type:
                return LevyModel::log_type(alpha, beta, cfg.get_double("eps_family", 0.3), tail);
            case Family::power_type:
                return LevyModel::power_type(alpha, beta, cfg.get_double("eps_family", 0.5), tail);
            case Family::custom:
                break;
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
    throw ConfigError("the custom family cannot be configured from a file");
}

SamplerSpec build_spec(const Config& cfg) {
    SamplerSpec spec{build_model(cfg), build_window(cfg), cfg.get_double("eps_trunc", 1e-6), 1};
    if (!(spec.eps_trunc > 0.0)) {
        throw ConfigError("eps_trunc must be positive");
    }
    if (const auto s = cfg.get("seed")) {
        try {
            std::size_t used = 0;
            spec.seed = std::stoull(*s, &used);
            if (used != s->size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("seed must be a nonnegative integer");
        }
    }
    return spec;
}

Current build_current(const Config& cfg) {
    Current theta;
    try {
        if (cfg.has("current.a") || cfg.has("current.c") || cfg.has("current.w")) {
            theta = Current::bumps(bump_terms(cfg, "current"));
        }
        if (const auto step = cfg.get("current.step")) {
            const auto v = cfg.get_doubles("current.step");
            if (v.size() % 2 != 1 || v.size() < 3 || v.size() > 2 * kMaxDim + 1) {
                throw ConfigError("current.step needs `lo hi` per axis followed by the value");
            }
            const std::size_t d = v.size() / 2;
            Point lo = Point::zeros(d);
            Point hi = Point::zeros(d);
            for (std::size_t i = 0; i < d; ++i) {
                lo[i] = v[2 * i];
                hi[i] = v[2 * i + 1];
            }
            const bool allow = to_bool(cfg.get_or("current.allow_nonsmooth", "false"), "current.allow_nonsmooth");
            theta = theta * Current::step(Window(lo, hi), v.back(), allow);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid current: ") + e.what());
    }
    return theta;
}

Diffeo build_diffeo(const Config& cfg) {
    if (!(cfg.has("diffeo.a") || cfg.has("diffeo.c") || cfg.has("diffeo.w"))) return {};
    try {
        return Diffeo::bumps(bump_terms(cfg, "diffeo"));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid diffeo: ") + e.what());
    }
}

GroupElement build_group_element(const Config& cfg) { return {build_diffeo(cfg), build_current(cfg)}; }

Functional build_functional(const Config& cfg) {
    Functional f;
    f.kind = functional_kind_from_string(cfg.get_or("functional.kind", "exp_neg_mass"));
    if (cfg.has("functional.region")) {
        Config region;
        region.set("window=" + *cfg.get("functional.region"));
        f.region = build_window(region);
    } else {
        f.region = build_window(cfg).with_cells({1, 1, 1});
    }
    f.t = cfg.get_double("functional.t", 1.0);
    if (cfg.has("functional.level")) {
        const double n = cfg.get_double("functional.level", 0.0);
        if (!(n >= 1.0) || n != std::floor(n) || n > 1e9) {
            throw ConfigError("functional.level must be a positive integer");
        }
        f.level = static_cast<int>(n);
    }
    f.validate();
    return f;
}

std::size_t build_n_samples(const Config& cfg, std::size_t fallback) {
    const double n = cfg.get_double("n_samples", static_cast<double>(fallback));
    if (!(n >= 2.0) || n != std::floor(n)) {
        throw ConfigError("n_samples must be an integer >= 2");
    }
    return static_cast<std::size_t>(n);
}

}  // namespace crm
