#pragma once
#include "lmg/params.hpp"

#include <map>
#include <string>
#include <vector>

namespace lmg {

enum class ExperimentKind { PhaseDiagram, QfiSweep, Scaling, Spectrum, Echo, OpenSweep };

const char* experiment_name(ExperimentKind k);

/// Batch experiment description. Parsed from key-value text (one `key = value`
/// per line, `#` comments). Grid-valued keys accept comma lists and the
/// inclusive linspace shorthand `lo:hi:count`; `pi` is accepted as a value.
/// Every run is fully specified here: the resolved configuration, defaults
/// included, is echoed into the output metadata.
struct SweepConfig {
    ExperimentKind kind = ExperimentKind::QfiSweep;
    std::string name;   // output basename, defaults to the experiment name
    double chi = 1.0;
    std::vector<int> N{0};          // closed/open system sizes
    std::vector<double> gamma{0.0}; // dephasing rates (open-sweep)
    std::vector<double> Omega;
    std::vector<double> omega{0.0};
    std::vector<double> theta;      // default pi
    std::vector<double> phi{0.0};
    std::vector<double> t;          // times (or averaging horizon)
    std::string axis = "z";         // perturbation axis: "x" or "z"
    std::string method;             // per-kind method selection
    std::string observable = "Sy";  // echo readout moment
    double delta = 0.0;             // echo working point
    double step_budget = 0.0;       // open-system stepper budget, 0 = auto
    int window = 3;                 // spectral fit window multiplier
    std::string out_dir = ".";
    int workers = 1;
    bool seedless = true; // always on; config may restate it but not disable it
};

/// Parse configuration text; `kind` comes from the caller (CLI subcommand).
/// Unknown keys, malformed grids, and contradictory settings throw ConfigError.
SweepConfig parse_config(ExperimentKind kind, const std::string& text);
SweepConfig load_config(ExperimentKind kind, const std::string& path);

/// One CSV row per grid point, already formatted: numbers are printed with the
/// shortest decimal form that round-trips to the exact double, so records are
/// byte-identical for identical configs at any worker count.
struct SweepResult {
    ExperimentKind kind;
    std::vector<std::string> columns;
    std::vector<std::string> rows; // grid order: N, gamma, Omega, omega, theta, phi, t
    std::map<std::string, std::string> config_echo; // resolved settings
    std::map<std::string, double> derived; // whole-sweep fits (scaling exponent etc.)
    int grid_points = 0;
    int failed_points = 0; // per-point module errors land in error_flag rows
    bool long_running = false; // beyond desk-scale defaults
    double wall_seconds = 0.0;
};

/// Evaluate every grid point (workers > 1 distributes points over OpenMP
/// threads; records stay in grid order). Per-point errors are captured in the
/// row's error_flag column and never abort the sweep.
SweepResult run_experiment(const SweepConfig& config);

/// CSV: `# key = value` preamble echoing the config, one header row, one line
/// per record. JSON sidecar: schema tag, config echo, columns, derived
/// quantities, and wall-clock metadata.
std::string render_csv(const SweepResult& result);
std::string render_sidecar_json(const SweepResult& result);

/// Write <out_dir>/<name>.csv and <out_dir>/<name>.json, creating out_dir if
/// needed. Returns the CSV path.
std::string persist(const SweepResult& result, const SweepConfig& config);

/// Shortest decimal rendering of x that strtod parses back to exactly x.
std::string format_double(double x);

} // namespace lmg
