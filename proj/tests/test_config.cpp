#include <filesystem>
#include <fstream>
#include <sstream>

#include "crmlab/cli.hpp"
#include "crmlab/config.hpp"
#include "crmlab/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace crm;

namespace {

std::filesystem::path scratch_file(const std::string& name, const std::string& text) {
    const auto dir = std::filesystem::temp_directory_path() / "crmlab_unit";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p;
}

int run(const std::vector<std::string>& args, std::string& out) {
    std::ostringstream o;
    std::ostringstream e;
    const int code = run_cli(args, o, e);
    out = o.str();
    return code;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = Config::parse("# comment\nfamily = gamma\n\nalpha = 2   # trailing\nbeta = 1\nwindow = 0 2\n");
    CHECK(cfg.get("family") == "gamma");
    CHECK(cfg.get_double("alpha", 0.0) == 2.0);
    CHECK(cfg.get_doubles("window") == std::vector<double>{0.0, 2.0});
    CHECK_FALSE(cfg.has("seed"));
    CHECK_THROWS_AS(Config::parse("famly = gamma\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("family gamma\n"), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), ConfigError);

    auto merged = cfg;
    merged.merge(Config::parse("alpha = 3\nseed = 5\n"));
    merged.set("beta=4");
    CHECK(merged.get_double("alpha", 0) == 3.0);
    CHECK(merged.get_double("beta", 0) == 4.0);
    CHECK(merged.echo()["seed"] == "5");
}

TEST_CASE("config builders") {
    const auto spec = build_spec(Config::parse("family = log_type\nalpha = 2\nbeta = 1\neps_family = 0.2\n"
                                               "tail = exp 2\nwindow = 0 1\neps_trunc = 1e-5\nseed = 9\n"));
    CHECK(spec.model.family() == Family::log_type);
    CHECK(spec.model.eps_family() == 0.2);
    CHECK(spec.model.l(Point(0.5), 1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(spec.eps_trunc == 1e-5);
    CHECK(spec.seed == 9);

    const auto pw = build_model(Config::parse("family = gamma\nalpha = 1 2\nbeta = 1\nwindow = 0 1\ngrid = 2\n"));
    CHECK(pw.alpha()(Point(0.25)) == 1.0);
    CHECK(pw.alpha()(Point(0.75)) == 2.0);
    CHECK_THROWS_AS(build_model(Config::parse("family = gamma\nalpha = 1 2 3\nbeta = 1\nwindow = 0 1\ngrid = 2\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_model(Config::parse("family = gamma\nalpha = 1\nbeta = 1\ntail = exp 2\nwindow = 0 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_model(Config::parse("family = power_type\nalpha = 1.5\nbeta = 1\nwindow = 0 1\n")),
                    ConfigError);

    const auto g = build_group_element(Config::parse("current.a = 0.3 -0.2\ncurrent.c = 0.4 0.6\ncurrent.w = 0.2 0.1\n"
                                                     "diffeo.a = 0.1\ndiffeo.c = 0.5\ndiffeo.w = 0.2\n"));
    CHECK_FALSE(g.phi.is_identity());
    CHECK(g.theta(Point(0.4)) == doctest::Approx(std::exp(0.3 * std::exp(-1.0))));
    CHECK(build_current(Config::parse("")).is_identity());
    CHECK_THROWS_AS(build_current(Config::parse("current.step = 0 0.5 2\n")), ConfigError);
    const auto step = build_current(Config::parse("current.step = 0 0.5 2\ncurrent.allow_nonsmooth = true\n"));
    CHECK(step(Point(0.25)) == 2.0);
    CHECK(step(Point(0.75)) == 1.0);

    const auto f = build_functional(Config::parse("window = 0 1\nfunctional.level = 4\nfunctional.t = 2\n"));
    CHECK(f.region.upper()[0] == 1.0);
    CHECK(f.level == 4);
    CHECK(f.t == 2.0);
}

TEST_CASE("run_cli end to end") {
    const auto gamma = scratch_file("gamma.cfg", "family = gamma\nalpha = 1\nbeta = 1\nwindow = 0 1\neps_trunc = 1e-4\n"
                                                 "n_samples = 20000\n");
    const auto bump = scratch_file("bump.cfg", "diffeo.a = 0.1\ndiffeo.c = 0.5\ndiffeo.w = 0.2\n");
    std::string out;
    CHECK(run({"verify-laplace", "--config", gamma.string(), "--t", "1", "--no-timing"}, out) == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["closed_form"].get<double>() == 0.5);
    CHECK_FALSE(j.contains("runtime_ms"));
    std::string again;
    run({"verify-laplace", "--config", gamma.string(), "--t", "1", "--no-timing"}, again);
    CHECK(again == out);

    CHECK(run({"diagnose-qi", "--config", gamma.string(), "--diffeo", bump.string()}, out) == 0);
    CHECK(nlohmann::json::parse(out)["verdict"] == "not_quasi_invariant");

    CHECK(run({"sample", "--config", gamma.string(), "--n", "3"}, out) == 0);
    CHECK(out.rfind("replicate,x_1,weight", 0) == 0);

    CHECK(run({"verify-marginal", "--config", gamma.string(), "--n", "2000", "--shape-factor", "3"}, out) == 1);
    CHECK(run({"sample", "--config", gamma.string(), "--bogus"}, out) == 2);
    CHECK(run({"sample", "--config", "/nonexistent.cfg"}, out) == 2);
    CHECK(run({"sample", "--config", gamma.string(), "--set", "family=weibull"}, out) == 2);
    CHECK(run({"verify-diffeo", "--config", gamma.string(), "--diffeo", bump.string()}, out) == 2);
    CHECK(run({"--help"}, out) == 0);
}
