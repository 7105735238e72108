// plab: run one experiment and write its report.
//
//   plab decay --out runs/decay --seed 3 --svg on
//   plab linear modes --config modes.json
//   plab report --out runs/decay
//
// Exit codes: 0 all criteria pass, 1 numerical failure, 2 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "plab/harness.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string svg = "off";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--seed", c.seed, "seed, overrides the configuration");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--svg", c.svg, "write SVG plots")->check(CLI::IsMember({"on", "off"}));
}

void print_criteria(const nlohmann::json& criteria) {
    for (const auto& c : criteria)
        std::printf("%-36s %s  [%s]  %s\n", c.at("name").get<std::string>().c_str(), c.at("pass").get<bool>() ? "PASS" : "FAIL",
                    c.at("anchor").get<std::string>().c_str(), c.at("detail").get<std::string>().c_str());
}

int run(const std::string& experiment, const Common& c) {
    plab::ExperimentConfig cfg;
    try {
        if (!c.config.empty()) {
            cfg = plab::load_config(c.config);
            if (!experiment.empty() && cfg.experiment != experiment)
                throw plab::ConfigError("config is for '" + cfg.experiment + "', subcommand runs '" + experiment + "'");
        } else {
            if (experiment.empty()) throw plab::ConfigError("run needs --config");
            cfg = plab::default_config(experiment, 1);
        }
        if (c.seed) {
            cfg.seed = *c.seed;
            cfg.echo["seed"] = *c.seed;
        }
    } catch (const plab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    }

    plab::RunContext ctx;
    ctx.threads = c.threads;
    ctx.svg = c.svg == "on";
    plab::RunReport r;
    try {
        r = plab::run_experiment(cfg, ctx);
    } catch (const plab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s failed: %s\n", cfg.experiment.c_str(), e.what());
        return kNumerical;
    }
    std::string out = c.out.empty() ? "plab-out/" + cfg.experiment : c.out;
    try {
        plab::write_report(out, r, ctx.svg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot write report: %s\n", e.what());
        return kConfig;
    }
    nlohmann::json j = plab::report_json(r);
    print_criteria(j.at("criteria"));
    for (const auto& n : r.notes) std::printf("note: %s\n", n.c_str());
    std::printf("%s: %s in %.2f s, report in %s\n", cfg.experiment.c_str(), r.all_pass() ? "PASS" : "FAIL",
                r.wall_clock, out.c_str());
    return r.all_pass() ? kPass : kNumerical;
}

int show_report(const std::string& dir) {
    std::ifstream f(dir + "/report.json");
    if (!f) {
        std::fprintf(stderr, "no report.json in %s\n", dir.c_str());
        return kConfig;
    }
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "unreadable report: %s\n", e.what());
        return kConfig;
    }
    print_criteria(j.value("criteria", nlohmann::json::array()));
    for (const auto& [k, s] : j.value("slopes", nlohmann::json::object()).items())
        std::printf("slope %-10s %.4f +- %.4f (95%%) over %d points\n", k.c_str(), s.at("slope").get<double>(),
                    s.at("ci95").get<double>(), s.at("points").get<int>());
    for (const auto& c : j.value("constants", nlohmann::json::array()))
        std::printf("constant %-28s %.6g  [%s]\n", c.at("name").get<std::string>().c_str(), c.at("value").get<double>(),
                    c.at("anchor").get<std::string>().c_str());
    return j.value("all_pass", false) ? kPass : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Littlewood-Paley and compressible Navier-Stokes numerics lab"};
    app.require_subcommand(1);

    Common common;
    std::string selected, model, report_dir;
    auto simple = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        sub->callback([&selected, name] { selected = name; });
    };
    simple("lp-check", "partition of unity and quasi-orthogonality");
    simple("para-check", "Bony decomposition against the dealiased product");
    simple("cns-run", "nonlinear run with amplitude and step-size consistency checks");
    simple("local-scheme", "contraction of the local iteration scheme");
    simple("lagrangian-check", "flow map identities and the Lagrangian fixed point");
    simple("low-mach", "low Mach sweep with ill-prepared data");
    simple("decay", "long-time small-data run and decay fits");
    simple("run", "run whatever experiment --config names");

    CLI::App* lin = app.add_subcommand("linear", "linear model checks");
    lin->add_option("model", model, "heat, transport, lame, modes or decay-profile")
        ->required()
        ->check(CLI::IsMember({"heat", "transport", "lame", "modes", "decay-profile"}));
    add_common(lin, common);
    lin->callback([&] { selected = model; });

    CLI::App* rep = app.add_subcommand("report", "print an existing report");
    rep->add_option("--out", report_dir, "directory holding report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kConfig;
    }
    if (rep->parsed()) return show_report(report_dir);
    return run(selected == "run" ? "" : selected, common);
}
