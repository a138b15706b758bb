#include "crmlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "crmlab/config.hpp"
#include "crmlab/densities.hpp"
#include "crmlab/errors.hpp"
#include "crmlab/harness.hpp"

namespace crm {

namespace {

using json = nlohmann::ordered_json;

struct Options {
    std::string config;
    std::vector<std::string> current_files;
    std::vector<std::string> diffeo_files;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    bool no_timing = false;
    bool mutate = false;
    std::string out;
    std::string in;
    std::string kind = "semidirect";
    std::optional<int> level;
    std::vector<double> eps;
    std::vector<double> t_list;
    std::vector<double> region;
    double shape_factor = 1.0;
    std::vector<std::string> inputs;
    std::string plot_data;
};

Config load_config(const Options& o) {
    if (o.config.empty()) {
        throw ConfigError("--config is required");
    }
    Config cfg = Config::load(o.config);
    for (const auto& f : o.current_files) cfg.merge(Config::load(f));
    for (const auto& f : o.diffeo_files) cfg.merge(Config::load(f));
    for (const auto& s : o.sets) cfg.set(s);
    if (o.seed) cfg.set("seed=" + std::to_string(*o.seed));
    if (o.n) cfg.set("n_samples=" + std::to_string(*o.n));
    return cfg;
}

void emit_text(const std::string& text, const Options& o, std::ostream& out) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) {
        throw ConfigError("cannot write '" + o.out + "'");
    }
    f << text;
}

void emit(const json& j, const Options& o, std::ostream& out) { emit_text(j.dump(2) + "\n", o, out); }

Window region_or_default(const Options& o, const Config& cfg) {
    if (!o.region.empty()) {
        Config r;
        std::ostringstream ss;
        ss << std::setprecision(17);
        for (const double v : o.region) ss << v << ' ';
        r.set("window=" + ss.str());
        return build_window(r);
    }
    return build_functional(cfg).region;
}

DiscreteMeasure input_measure(const Options& o, const SamplerSpec& spec) {
    if (o.in.empty()) return sample_measure(spec);
    std::ifstream f(o.in);
    if (!f) {
        throw ConfigError("cannot open '" + o.in + "'");
    }
    const auto ms = read_csv(f);
    if (ms.size() != 1) {
        throw ConfigError("'" + o.in + "' holds " + std::to_string(ms.size()) + " replicates; expected one");
    }
    return ms.front();
}

int cmd_sample(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const MeasureSampler sampler(spec);
    const std::size_t n = o.n.value_or(1);
    std::vector<DiscreteMeasure> draws(n);
    parallel_for(n, [&](std::size_t i) { draws[i] = sampler.sample(i); });
    std::ostringstream ss;
    write_csv(ss, draws, spec.window.dim(), n > 1);
    emit_text(ss.str(), o, out);
    return 0;
}

int cmd_transform(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const GroupElement g = build_group_element(cfg);
    const DiscreteMeasure eta = apply_group(g, input_measure(o, spec));
    std::ostringstream ss;
    write_csv(ss, eta, spec.window.dim());
    emit_text(ss.str(), o, out);
    return 0;
}

int cmd_density(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const GroupElement g = build_group_element(cfg);
    const DiscreteMeasure eta = input_measure(o, spec);
    LogDensity d;
    std::string descriptor;
    if (o.kind == "current") {
        d = current_density(spec.model, g.theta, eta);
        descriptor = g.theta.descriptor();
    } else if (o.kind == "current-gamma") {
        if (spec.model.family() != Family::gamma) {
            throw ConfigError("--kind current-gamma needs the gamma family");
        }
        d = current_density_gamma(spec.model.alpha(), spec.model.beta(), g.theta, eta);
        descriptor = g.theta.descriptor();
    } else if (o.kind == "diffeo") {
        d = diffeo_density(spec.model, g.phi, eta);
        descriptor = g.phi.descriptor();
    } else if (o.kind == "semidirect") {
        d = semidirect_density(spec.model, g, eta);
        descriptor = g.descriptor();
    } else if (o.kind == "partial") {
        if (!o.level) {
            throw ConfigError("--kind partial needs --level");
        }
        d = partial_density(spec.model, g, eta, *o.level);
        descriptor = g.descriptor() + ",level=" + std::to_string(*o.level);
    } else {
        throw ConfigError("unknown density kind '" + o.kind + "'");
    }
    emit_text(density_report_json(d, spec.model, descriptor) + "\n", o, out);
    return 0;
}

int finish_verify(VerifyReport rep, const Config& cfg, const Options& o, std::ostream& out) {
    json echo = cfg.echo();
    for (const auto& [k, v] : rep.config_echo.items()) {
        if (!echo.contains(k)) echo[k] = v;
    }
    rep.config_echo = echo;
    emit(rep.to_json(!o.no_timing), o, out);
    return rep.pass ? 0 : 1;
}

VerifyOptions verify_options(const Options& o, const Config& cfg) {
    VerifyOptions v;
    v.n_samples = build_n_samples(cfg);
    if (o.mutate) v.log_density_shift = std::log(1.1);
    return v;
}

int cmd_verify(const std::string& which, const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const GroupElement g = build_group_element(cfg);
    const Functional f = build_functional(cfg);
    const VerifyOptions v = verify_options(o, cfg);
    if (which == "current") return finish_verify(verify_current(spec, g.theta, f, v), cfg, o, out);
    if (which == "diffeo") return finish_verify(verify_diffeo(spec, g.phi, f, v), cfg, o, out);
    if (which == "semidirect") return finish_verify(verify_semidirect(spec, g, f, v), cfg, o, out);
    return finish_verify(verify_partial(spec, g, f, v), cfg, o, out);
}

int cmd_laplace(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const Window delta = region_or_default(o, cfg);
    const std::vector<double> ts = o.t_list.empty() ? std::vector<double>{1.0} : o.t_list;
    LaplaceReport rep = verify_laplace(spec, delta, ts, build_n_samples(cfg));
    json echo = cfg.echo();
    echo["region"] = to_string(delta);
    rep.config_echo = echo;
    emit(rep.to_json(!o.no_timing), o, out);
    return rep.pass ? 0 : 1;
}

int cmd_marginal(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const SamplerSpec spec = build_spec(cfg);
    const Window delta = region_or_default(o, cfg);
    MarginalReport rep = verify_gamma_marginal(spec, delta, o.n.value_or(build_n_samples(cfg, 10000)), o.shape_factor);
    json echo = cfg.echo();
    echo["region"] = to_string(delta);
    rep.config_echo = echo;
    emit(rep.to_json(!o.no_timing), o, out);
    return rep.pass ? 0 : 1;
}

json ladder_json(const HellingerReport& r) {
    json j;
    j["eps_list"] = r.eps_list;
    j["values"] = r.values;
    j["verdict"] = to_string(r.verdict);
    j["fitted_log_slope"] = r.fitted_log_slope;
    j["slope_se"] = r.slope_std_error;
    j["last_base_increment"] = r.last_base_increment;
    return j;
}

int cmd_hellinger(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const LevyModel model = build_model(cfg);
    const Diffeo phi = build_diffeo(cfg);
    json j;
    j["op"] = "hellinger";
    j["config_echo"] = cfg.echo();
    if (o.eps.empty()) {
        j["ladder"] = ladder_json(hellinger_ladder(model, phi));
    } else {
        std::vector<double> hs;
        for (const double e : o.eps) hs.push_back(hellinger_integral(model, phi, e));
        j["eps_list"] = o.eps;
        j["values"] = hs;
    }
    emit(j, o, out);
    return 0;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
    const Config cfg = load_config(o);
    const LevyModel model = build_model(cfg);
    const Diffeo phi = build_diffeo(cfg);
    const QiDiagnosis d = diagnose_diffeo_qi(model, phi);
    json j;
    j["op"] = "diagnose-qi";
    j["config_echo"] = cfg.echo();
    j["verdict"] = to_string(d.verdict);
    j["hellinger"] = ladder_json(d.report);
    emit(j, o, out);
    return d.verdict == QiVerdict::inconclusive ? 1 : 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    if (o.inputs.empty()) {
        throw ConfigError("report needs at least one JSON input");
    }
    std::ostringstream table;
    std::ostringstream plot;
    plot << "series,x,y\n";
    json summary = json::array();
    bool all_ok = true;
    table << std::left << std::setw(20) << "op" << std::setw(8) << "result" << "detail  [source]\n";
    for (const auto& path : o.inputs) {
        std::ifstream f(path);
        if (!f) {
            throw ConfigError("cannot open '" + path + "'");
        }
        json j;
        try {
            j = json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
        }
        const std::string op = j.value("op", "density");
        std::string result;
        std::ostringstream detail;
        detail << std::setprecision(6);
        if (j.contains("pass")) {
            const bool pass = j["pass"].get<bool>();
            result = pass ? "PASS" : "FAIL";
            all_ok = all_ok && pass;
            if (j.contains("z")) detail << "z=" << j["z"].dump();
            if (j.contains("p_value")) detail << "p=" << j["p_value"].get<double>();
            if (j.contains("points")) {
                double worst = 0.0;
                for (const auto& p : j["points"]) worst = std::max(worst, std::abs(p["z"].get<double>()));
                detail << "max|z|=" << worst << " over " << j["points"].size() << " t";
            }
        } else if (j.contains("verdict")) {
            result = j["verdict"].get<std::string>() == "inconclusive" ? "INCONCL" : "OK";
            all_ok = all_ok && result == "OK";
            detail << j["verdict"].get<std::string>();
        } else if (j.contains("log_value")) {
            result = "OK";
            detail << "log_value=" << j["log_value"].dump();
        } else {
            result = "OK";
        }
        table << std::left << std::setw(20) << op << std::setw(8) << result << detail.str() << "  [" << path << "]\n";

        const json* ladder = nullptr;
        if (j.contains("hellinger")) ladder = &j["hellinger"];
        if (j.contains("ladder")) ladder = &j["ladder"];
        const json& src = ladder ? *ladder : j;
        if (src.contains("eps_list") && src.contains("values")) {
            for (std::size_t i = 0; i < src["eps_list"].size(); ++i) {
                plot << "hellinger:" << path << ',' << src["eps_list"][i].dump() << ',' << src["values"][i].dump()
                     << '\n';
            }
        }
        if (j.contains("points")) {
            for (const auto& p : j["points"]) {
                plot << "laplace_mc:" << path << ',' << p["t"].dump() << ',' << p["mc"]["mean"].dump() << '\n';
                plot << "laplace_exact:" << path << ',' << p["t"].dump() << ',' << p["truncated_exact"].dump()
                     << '\n';
                plot << "laplace_closed:" << path << ',' << p["t"].dump() << ',' << p["closed_form"].dump() << '\n';
            }
        }
        json row;
        row["source"] = path;
        row["op"] = op;
        row["result"] = result;
        row["detail"] = detail.str();
        summary.push_back(row);
    }
    out << table.str();
    if (!o.out.empty()) emit(summary, o, out);
    if (!o.plot_data.empty()) {
        std::ofstream p(o.plot_data);
        if (!p) {
            throw ConfigError("cannot write '" + o.plot_data + "'");
        }
        p << plot.str();
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and verification toolkit for completely random measures", "crm-lab"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Model/run configuration file")->required();
        sub->add_option("--current", o.current_files, "Extra config file with current.* keys");
        sub->add_option("--diffeo", o.diffeo_files, "Extra config file with diffeo.* keys");
        sub->add_option("--set", o.sets, "Override one config key (key=value)");
        sub->add_option("--seed", o.seed, "Override the seed");
        sub->add_option("--out", o.out, "Output file (default stdout)");
    };
    auto verify_flags = [&](CLI::App* sub) {
        sub->add_option("--n", o.n, "Number of Monte Carlo replicates");
        sub->add_flag("--no-timing", o.no_timing, "Omit runtime_ms so reports are byte-identical across runs");
    };

    auto* sample = app.add_subcommand("sample", "Draw replicates of the truncated random measure (CSV)");
    common(sample);
    sample->add_option("--n", o.n, "Number of replicates");

    auto* transform = app.add_subcommand("transform", "Apply the configured group element to a measure (CSV)");
    common(transform);
    transform->add_option("--in", o.in, "Input measure CSV (default: one fresh draw)");

    auto* density = app.add_subcommand("density", "Evaluate a log Radon-Nikodym density (JSON)");
    common(density);
    density->add_option("--in", o.in, "Input measure CSV (default: one fresh draw)");
    density->add_option("--kind", o.kind, "current | current-gamma | diffeo | semidirect | partial");
    density->add_option("--level", o.level, "Level n for --kind partial");

    std::vector<std::pair<std::string, CLI::App*>> verifies;
    for (const std::string which : {"current", "diffeo", "semidirect", "partial"}) {
        auto* v = app.add_subcommand("verify-" + which, "Paired change-of-measure check for the " + which + " density");
        common(v);
        verify_flags(v);
        v->add_flag("--mutate", o.mutate, "Multiply the density by 1.1 (power check; should fail)");
        verifies.emplace_back(which, v);
    }

    auto* laplace = app.add_subcommand("verify-laplace", "Gamma Laplace transform: MC vs quadrature vs closed form");
    common(laplace);
    verify_flags(laplace);
    laplace->add_option("--t", o.t_list, "Values of t (default 1)");
    laplace->add_option("--region", o.region, "Region lo hi per axis (default functional.region or window)");

    auto* marginal = app.add_subcommand("verify-marginal", "KS test of eta(region) against its gamma law");
    common(marginal);
    verify_flags(marginal);
    marginal->add_option("--region", o.region, "Region lo hi per axis");
    marginal->add_option("--shape-factor", o.shape_factor, "Scale the reference shape (mutation check)");

    auto* hellinger = app.add_subcommand("hellinger", "Hellinger integrals H(eps) for the configured diffeo");
    common(hellinger);
    hellinger->add_option("--eps", o.eps, "Lower cutoffs (default: the full ladder)");

    auto* diagnose = app.add_subcommand("diagnose-qi", "Quasi-invariance verdict from the Hellinger ladder");
    common(diagnose);

    auto* report = app.add_subcommand("report", "Summarize JSON reports; optional plot-data CSV");
    report->add_option("inputs", o.inputs, "JSON report files")->required();
    report->add_option("--out", o.out, "Write the summary as JSON");
    report->add_option("--plot-data", o.plot_data, "Write series,x,y CSV (eps vs H, t vs Laplace)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sample->parsed()) return cmd_sample(o, out);
        if (transform->parsed()) return cmd_transform(o, out);
        if (density->parsed()) return cmd_density(o, out);
        for (const auto& [which, sub] : verifies) {
            if (sub->parsed()) return cmd_verify(which, o, out);
        }
        if (laplace->parsed()) return cmd_laplace(o, out);
        if (marginal->parsed()) return cmd_marginal(o, out);
        if (hellinger->parsed()) return cmd_hellinger(o, out);
        if (diagnose->parsed()) return cmd_diagnose(o, out);
        if (report->parsed()) return cmd_report(o, out);
    } catch (const Error& e) {
        err << "crm-lab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "crm-lab: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace crm
