#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crmlab/group.hpp"
#include "crmlab/harness.hpp"
#include "crmlab/levy_model.hpp"
#include "crmlab/sampler.hpp"
#include "json.hpp"

namespace crm {

/// Flat `key = value` configuration. Blank lines and `#` comments are ignored.
///
///   family = gamma | log_type | power_type
///   alpha = 1            # one value, or one per grid cell (row-major)
///   beta = 1
///   eps_family = 0.3
///   tail = exp 1         # rate of the default tail beta e^{-rate s}
///   window = 0 1         # lo hi per axis
///   grid = 1             # cells per axis for piecewise fields
///   eps_trunc = 1e-6
///   seed = 1
///   n_samples = 100000
///   current.a = 0.3      # bump terms: lists of equal length
///   current.c = 0.5      # centers; coordinates of one center joined by commas
///   current.w = 0.2
///   current.step = 0 1 2 # lo hi value (one-dimensional step current)
///   current.allow_nonsmooth = true
///   diffeo.a / diffeo.c / diffeo.w
///   functional.kind = exp_neg_mass | exp_neg_integral | indicator_count
///   functional.region = 0.2 0.8
///   functional.t = 1
///   functional.level = 4
class Config {
  public:
    static Config parse(const std::string& text, const std::string& source = "<string>");
    static Config load(const std::string& path);

    /// Values from `overlay` replace or extend this config.
    void merge(const Config& overlay);
    /// Applies one `key=value` assignment.
    void set(const std::string& assignment);

    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::vector<double> get_doubles(const std::string& key) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    [[nodiscard]] nlohmann::ordered_json echo() const;

  private:
    void assign(const std::string& key, const std::string& value, const std::string& where);
    std::vector<std::pair<std::string, std::string>> entries_;
};

Window build_window(const Config& cfg);
LevyModel build_model(const Config& cfg);
SamplerSpec build_spec(const Config& cfg);
Current build_current(const Config& cfg);
Diffeo build_diffeo(const Config& cfg);
GroupElement build_group_element(const Config& cfg);
/// Region defaults to the window.
Functional build_functional(const Config& cfg);
std::size_t build_n_samples(const Config& cfg, std::size_t fallback = 100000);

}  // namespace crm
