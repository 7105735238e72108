#include <fstream>
#include <set>
#include <sstream>

#include "plab/harness.hpp"

namespace plab {
namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& knob_schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"smoke", {}},
        {"lp-check", {"fields", "boxes"}},
        {"para-check", {"pairs", "commutator_pairs"}},
        {"heat", {"s", "p", "diffusivity"}},
        {"transport", {"s", "p", "tol"}},
        {"lame", {"s", "p", "variable"}},
        {"modes", {"rho_max", "samples"}},
        {"decay-profile", {"s_list", "t_min", "t_max", "nodes_per_octave"}},
        {"cns-run", {"k0", "density_gate"}},
        {"local-scheme", {"n_max", "time_points", "p", "gate", "nonlinear"}},
        {"lagrangian-check", {"time_points", "gate", "p", "seeds"}},
        {"low-mach", {"eps_list", "p", "j0", "eta", "t_layer", "v_amplitude", "well_prepared"}},
        {"decay", {"k0", "nonlinear", "decay_eps", "window_lo"}},
    };
    return s;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double number(const json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

int integer(const json& obj, const std::string& key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<int>();
}

}  // namespace

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : knob_schema()) v.push_back(k);
        return v;
    }();
    return names;
}

double ExperimentConfig::knob(const std::string& key, double fallback) const {
    if (!knobs.contains(key)) return fallback;
    const json& v = knobs.at(key);
    if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
    return v.get<double>();
}

std::vector<double> ExperimentConfig::knob_list(const std::string& key, const std::vector<double>& fallback) const {
    if (!knobs.contains(key)) return fallback;
    return knobs.at(key).get<std::vector<double>>();
}

ExperimentConfig parse_config(const json& doc) {
    reject_unknown(doc, {"experiment", "seed", "grid", "params", "data", "time", "knobs"}, "config");
    ExperimentConfig c = default_config(doc.contains("experiment") && doc.at("experiment").is_string()
                                            ? doc.at("experiment").get<std::string>()
                                            : "",
                                        0);
    if (!doc.contains("seed")) throw ConfigError("missing mandatory key 'seed'");
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.echo = doc;

    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        reject_unknown(g, {"dim", "n", "box"}, "grid");
        c.dim = integer(g, "dim", c.dim, "grid");
        c.n = integer(g, "n", c.n, "grid");
        c.box = number(g, "box", c.box, "grid");
    }
    if (c.dim < 1 || c.dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
    if (c.n < 8 || c.n % 2) throw ConfigError("grid.n must be even and at least 8");
    if (!(c.box >= 1.0)) throw ConfigError("grid.box must be at least 1");

    double alpha = c.params.alpha();
    if (doc.contains("params")) {
        const json& p = doc.at("params");
        reject_unknown(p, {"lambda", "mu", "gamma", "alpha"}, "params");
        c.params.lambda = number(p, "lambda", c.params.lambda, "params");
        c.params.mu = number(p, "mu", c.params.mu, "params");
        c.gamma = number(p, "gamma", c.gamma, "params");
        alpha = number(p, "alpha", alpha, "params");
    }
    try {
        c.params.pressure = gamma_law(c.gamma, alpha);
        validate(c.params, false);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }

    if (doc.contains("data")) {
        const json& d = doc.at("data");
        reject_unknown(d, {"recipe", "amplitude"}, "data");
        if (d.contains("recipe")) {
            if (!d.at("recipe").is_string()) throw ConfigError("data.recipe must be a string");
            c.recipe = d.at("recipe").get<std::string>();
        }
        c.amplitude = number(d, "amplitude", c.amplitude, "data");
    }
    static const std::set<std::string> recipes = {"random", "gaussian", "oscillating", "zero"};
    if (!recipes.count(c.recipe)) throw ConfigError("unknown data.recipe '" + c.recipe + "'");

    if (doc.contains("time")) {
        const json& t = doc.at("time");
        reject_unknown(t, {"T", "dt", "output_every"}, "time");
        c.T = number(t, "T", c.T, "time");
        c.dt = number(t, "dt", c.dt, "time");
        c.output_every = number(t, "output_every", c.output_every, "time");
    }
    if (!(c.T > 0.0) || !(c.dt > 0.0) || !(c.output_every > 0.0)) throw ConfigError("time values must be positive");

    if (doc.contains("knobs")) {
        const json& k = doc.at("knobs");
        reject_unknown(k, knob_schema().at(c.experiment), "knobs");
        for (auto it = k.begin(); it != k.end(); ++it) {
            const json& v = it.value();
            bool ok = v.is_number() || v.is_boolean();
            if (v.is_array()) {
                ok = true;
                for (const auto& e : v) ok = ok && e.is_number();
            }
            if (!ok) throw ConfigError("knobs." + it.key() + " must be a number, boolean or list of numbers");
            c.knobs[it.key()] = v;
        }
    }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

ExperimentConfig default_config(const std::string& experiment, std::uint64_t seed) {
    if (!knob_schema().count(experiment))
        throw ConfigError(experiment.empty() ? "missing key 'experiment'" : "unknown experiment '" + experiment + "'");
    ExperimentConfig c;
    c.experiment = experiment;
    c.seed = seed;
    if (experiment == "smoke") {
        c.dim = 1;
        c.n = 32;
        c.T = 0.5;
        c.dt = 0.05;
        c.output_every = 0.05;
    } else if (experiment == "lp-check" || experiment == "para-check") {
        c.n = 64;
    } else if (experiment == "heat" || experiment == "transport" || experiment == "lame") {
        c.n = 32;
        c.T = 0.5;
        c.output_every = 0.05;
    } else if (experiment == "cns-run") {
        c.n = 32;
        c.T = 1.0;
        c.dt = 0.1;
        c.output_every = 0.1;
    } else if (experiment == "local-scheme") {
        c.dim = 3;
        c.n = 16;
        c.T = 0.2;
        c.amplitude = 1e-2;
    } else if (experiment == "lagrangian-check") {
        c.n = 32;
        c.T = 0.25;
        c.amplitude = 1e-2;
    } else if (experiment == "low-mach") {
        c.n = 64;
        c.recipe = "oscillating";
        c.amplitude = 0.5;
        c.T = 1.0;
        c.output_every = 0.05;
    } else if (experiment == "decay") {
        c.n = 256;
        c.box = 16.0;
        c.recipe = "gaussian";
        c.amplitude = 1.6e-3;
        c.T = 200.0;
        c.dt = 0.1;
        c.output_every = 1.0;
    } else if (experiment == "decay-profile") {
        c.T = 1000.0;
    }
    c.echo = {{"experiment", experiment}, {"seed", seed}};
    return c;
}

}  // namespace plab
