#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "plab/lagrangian.hpp"

namespace plab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Validated experiment configuration. Unknown keys are rejected at every
/// level and the seed is mandatory.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    int dim = 2;
    int n = 32;
    double box = 1.0;
    CnsParams params;
    double gamma = 1.4;
    std::string recipe = "random";
    double amplitude = 1e-2;
    double T = 1.0;
    double dt = 0.01;
    double output_every = 0.1;
    nlohmann::json knobs = nlohmann::json::object();
    nlohmann::json echo;  // the document as given

    double knob(const std::string& key, double fallback) const;
    std::vector<double> knob_list(const std::string& key, const std::vector<double>& fallback) const;
};

const std::vector<std::string>& known_experiments();

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Defaults for one experiment with the given seed (used when no file is supplied).
ExperimentConfig default_config(const std::string& experiment, std::uint64_t seed);

// ---------------------------------------------------------------- fits

struct SlopeFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// Least squares of log(value) against log(t) over t in [lo, hi].
SlopeFit fit_decay_slope(const std::vector<double>& t, const std::vector<double>& values, double lo, double hi);

struct TransitionReport {
    bool detected = false;
    double t_transition = 0.0;
    double local_slope = 0.0;          // measured slope past the window
    double predicted_gap_rate = 0.0;   // closed-form decay rate of the lowest mode
};

// Flags where the local log-log slope steepens by more than `drop` below the window fit.
TransitionReport detect_transition(const std::vector<double>& t, const std::vector<double>& values, double window_slope,
                                   double t_from, double box_scale, double nu, double drop = 0.25);

// ---------------------------------------------------------------- reports

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Criterion {
    std::string name;
    bool pass = false;
    std::string anchor;   // quoted statement the check refers to
    std::string detail;
};

struct RecordedConstant {
    std::string name;
    double value = 0.0;
    std::string anchor;
    std::vector<std::uint64_t> seeds;
};

struct RunReport {
    nlohmann::json config;
    std::vector<Table> tables;
    std::map<std::string, SlopeFit> slopes;
    std::vector<RecordedConstant> constants;
    std::vector<Criterion> criteria;
    std::vector<std::string> notes;
    double wall_clock = 0.0;
    bool all_pass() const;
};

std::string table_csv(const Table& t);
std::string table_svg(const Table& t, const std::string& x_column, bool log_axes);
nlohmann::json report_json(const RunReport& r);

// Writes report.json, one CSV per table and (optionally) one SVG per table.
void write_report(const std::string& dir, const RunReport& r, bool svg);
// Writes bytes to path through a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

// ---------------------------------------------------------------- experiments

struct RunContext {
    int threads = 1;
    bool svg = false;
};

RunReport run_experiment(const ExperimentConfig& cfg, const RunContext& ctx = {});

}  // namespace plab
