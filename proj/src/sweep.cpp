#include "lmg/sweep.hpp"

#include "lmg/dicke.hpp"
#include "lmg/echo.hpp"
#include "lmg/errors.hpp"
#include "lmg/meanfield.hpp"
#include "lmg/open_system.hpp"
#include "lmg/operators.hpp"
#include "lmg/qfi.hpp"
#include "lmg/spectrum.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace lmg {

namespace {

constexpr const char* kSchema = "lmg-sweep-1";
constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok) {
    const std::string s = trim(tok);
    if (s == "pi") return kPi;
    if (s == "-pi") return -kPi;
    if (s == "pi/2") return kPi / 2;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError("cannot parse number '" + s + "'");
    return v;
}

long parse_int(const std::string& tok) {
    const std::string s = trim(tok);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError("cannot parse integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

// comma list, or the inclusive linspace shorthand lo:hi:count
std::vector<double> parse_grid(const std::string& key, const std::string& value) {
    std::vector<double> grid;
    if (value.find(':') != std::string::npos) {
        const auto parts = split(value, ':');
        if (parts.size() != 3)
            throw ConfigError(key + ": linspace needs lo:hi:count, got '" + value + "'");
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const long n = parse_int(parts[2]);
        if (n < 1) throw ConfigError(key + ": linspace count must be >= 1");
        if (n == 1) {
            grid.push_back(lo);
        } else {
            for (long i = 0; i < n; ++i)
                grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
        }
    } else {
        for (const auto& tok : split(value, ',')) grid.push_back(parse_number(tok));
    }
    if (grid.empty()) throw ConfigError(key + ": empty grid");
    for (double v : grid)
        if (!std::isfinite(v)) throw ConfigError(key + ": non-finite grid value");
    return grid;
}

std::vector<int> parse_int_grid(const std::string& key, const std::string& value) {
    std::vector<int> grid;
    for (const auto& tok : split(value, ',')) {
        const long v = parse_int(tok);
        if (v < 1 || v > 1000000) throw ConfigError(key + ": out of range");
        grid.push_back(static_cast<int>(v));
    }
    if (grid.empty()) throw ConfigError(key + ": empty grid");
    return grid;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string s = trim(value);
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
    throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

PerturbationAxis axis_from(const std::string& s) {
    if (s == "x") return PerturbationAxis::Transverse;
    if (s == "z") return PerturbationAxis::Longitudinal;
    throw ConfigError("axis must be 'x' or 'z', got '" + s + "'");
}

QfiMethod qfi_method_from(const std::string& s) {
    if (s == "eigen") return QfiMethod::ExactEigen;
    if (s == "echo-fd") return QfiMethod::EchoFD;
    if (s == "secular") return QfiMethod::Secular;
    if (s == "short-time") return QfiMethod::ShortTime;
    throw ConfigError("method must be eigen | echo-fd | secular | short-time");
}

Moment moment_from(const std::string& s) {
    if (s == "Sx") return Moment::Sx;
    if (s == "Sy") return Moment::Sy;
    if (s == "Sz") return Moment::Sz;
    throw ConfigError("observable must be Sx | Sy | Sz");
}

CollectiveOperator observable_operator(const std::string& s, int N) {
    if (s == "Sx") return spin_x(N);
    if (s == "Sy") return spin_y(N);
    return spin_z(N);
}

struct KeySpec {
    std::set<std::string> allowed;
    std::set<std::string> required;
};

KeySpec key_spec(ExperimentKind kind) {
    KeySpec ks;
    ks.allowed = {"experiment", "name", "chi", "out", "workers", "seedless"};
    switch (kind) {
    case ExperimentKind::PhaseDiagram:
        ks.allowed.insert({"Omega", "omega", "theta", "phi", "t"});
        ks.required = {"Omega", "omega"};
        break;
    case ExperimentKind::QfiSweep:
    case ExperimentKind::Scaling:
        ks.allowed.insert({"N", "Omega", "omega", "theta", "phi", "t", "axis", "method"});
        ks.required = {"N", "Omega", "t"};
        break;
    case ExperimentKind::Spectrum:
        ks.allowed.insert({"N", "Omega", "omega", "theta", "phi", "window"});
        ks.required = {"N", "Omega"};
        break;
    case ExperimentKind::Echo:
        ks.allowed.insert(
            {"N", "Omega", "omega", "theta", "phi", "t", "axis", "delta", "observable"});
        ks.required = {"N", "Omega", "t"};
        break;
    case ExperimentKind::OpenSweep:
        ks.allowed.insert({"N", "Omega", "omega", "theta", "phi", "t", "gamma", "axis",
                           "delta", "observable", "method", "budget"});
        ks.required = {"N", "Omega", "t", "gamma"};
        break;
    }
    return ks;
}

struct GridPoint {
    int N = 0;
    double gamma = 0.0, Omega = 0.0, omega = 0.0, theta = 0.0, phi = 0.0, t = 0.0;
};

std::vector<GridPoint> enumerate_grid(const SweepConfig& c) {
    std::vector<GridPoint> pts;
    for (int N : c.N)
        for (double g : c.gamma)
            for (double Om : c.Omega)
                for (double om : c.omega)
                    for (double th : c.theta)
                        for (double ph : c.phi)
                            for (double t : c.t) pts.push_back({N, g, Om, om, th, ph, t});
    return pts;
}

LmgParams point_params(const SweepConfig& c, const GridPoint& pt) {
    LmgParams p;
    p.N = pt.N;
    p.chi = c.chi;
    p.Omega = pt.Omega;
    p.omega = pt.omega;
    p.validate();
    return p;
}

std::string error_label(const std::exception& e) {
    const std::string what = e.what();
    const auto colon = what.find(':');
    return colon == std::string::npos ? std::string("Error") : what.substr(0, colon);
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line;
}

std::vector<std::string> compute_row(const SweepConfig& c, const GridPoint& pt) {
    const std::string nan = "nan";
    switch (c.kind) {
    case ExperimentKind::PhaseDiagram: {
        std::vector<std::string> cells{format_double(c.chi), format_double(pt.Omega),
                                       format_double(pt.omega), format_double(pt.theta),
                                       format_double(pt.phi), format_double(pt.t)};
        try {
            LmgParams p;
            p.N = 2; // reduced classical flow; sz_bar reported in units of N/2
            p.chi = c.chi;
            p.Omega = pt.Omega;
            p.omega = pt.omega;
            const double scale = std::max({c.chi, pt.Omega, std::abs(pt.omega)});
            const double dt = 0.005 / std::max(1.0, scale);
            const Trajectory traj = bloch_evolve(pt.theta, pt.phi, p, pt.t, dt);
            const double sz_bar = time_averaged_sz(traj, pt.t); // N=2: already reduced
            cells.push_back(format_double(sz_bar));
            cells.push_back(std::abs(sz_bar) > 0.05 ? "1" : "0");
            cells.push_back("");
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {nan, nan, error_label(e)});
        }
        return cells;
    }
    case ExperimentKind::QfiSweep:
    case ExperimentKind::Scaling: {
        std::vector<std::string> cells{std::to_string(pt.N),     format_double(c.chi),
                                       format_double(pt.Omega),  format_double(pt.omega),
                                       format_double(pt.theta),  format_double(pt.phi),
                                       format_double(pt.t),      c.axis,
                                       c.method};
        try {
            const LmgParams p = point_params(c, pt);
            const PerturbationAxis ax = axis_from(c.axis);
            const DickeState psi0 = coherent_state(pt.N, pt.theta, pt.phi);
            QfiResult r;
            switch (qfi_method_from(c.method)) {
            case QfiMethod::ExactEigen:
                r = qfi_exact_eigenbasis(diagonalize(p), ax, pt.t, psi0);
                break;
            case QfiMethod::EchoFD:
                r = qfi_finite_difference(p, ax, pt.t, psi0);
                break;
            case QfiMethod::Secular: {
                const SecularCoefficient sc = qfi_secular(diagonalize(p), ax, psi0);
                r.value = 4.0 * pt.t * pt.t * sc.value;
                r.normalized = r.value / (pt.N * pt.t * pt.t);
                break;
            }
            case QfiMethod::ShortTime:
                r = qfi_short_time(p, ax, pt.t);
                break;
            }
            cells.push_back(format_double(r.value));
            cells.push_back(format_double(r.normalized));
            cells.push_back("");
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {nan, nan, error_label(e)});
        }
        return cells;
    }
    case ExperimentKind::Spectrum: {
        std::vector<std::string> cells{std::to_string(pt.N),    format_double(c.chi),
                                       format_double(pt.Omega), format_double(pt.omega),
                                       format_double(pt.theta), format_double(pt.phi)};
        try {
            const LmgParams p = point_params(c, pt);
            const SpectralDecomposition dec = diagonalize(p);
            const DickeState psi0 = coherent_state(pt.N, pt.theta, pt.phi);
            const EqptProfile prof = eqpt_profile(dec, psi0);
            const EqptFit fx = fit_eqpt_exponent(prof, PerturbationAxis::Transverse, c.window);
            const EqptFit fz =
                fit_eqpt_exponent(prof, PerturbationAxis::Longitudinal, c.window);
            cells.push_back(format_double(prof.e0 / pt.N));
            cells.push_back(format_double(prof.de / pt.N));
            cells.push_back(format_double(prof.e_cr_over_n));
            cells.push_back(format_double(fx.gamma));
            cells.push_back(format_double(fz.gamma));
            cells.push_back("");
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {nan, nan, nan, nan, nan, error_label(e)});
        }
        return cells;
    }
    case ExperimentKind::Echo: {
        std::vector<std::string> cells{std::to_string(pt.N),     format_double(c.chi),
                                       format_double(pt.Omega),  format_double(pt.omega),
                                       format_double(pt.theta),  format_double(pt.phi),
                                       format_double(pt.t),      c.axis,
                                       format_double(c.delta),   c.observable};
        try {
            const LmgParams p = point_params(c, pt);
            EchoSpec spec;
            spec.params = p;
            spec.axis = axis_from(c.axis);
            spec.delta = c.delta;
            spec.t = pt.t;
            const DickeState psi0 = coherent_state(pt.N, pt.theta, pt.phi);
            const SensitivityResult r = observable_sensitivity(
                spec, psi0, observable_operator(c.observable, pt.N), c.observable);
            cells.push_back(format_double(r.inverse_variance));
            cells.push_back(format_double(r.normalized));
            cells.push_back(format_double(r.variance));
            cells.push_back("");
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {nan, nan, nan, error_label(e)});
        }
        return cells;
    }
    case ExperimentKind::OpenSweep: {
        std::vector<std::string> cells{std::to_string(pt.N),     format_double(c.chi),
                                       format_double(pt.Omega),  format_double(pt.omega),
                                       format_double(pt.theta),  format_double(pt.phi),
                                       format_double(pt.t),      format_double(pt.gamma),
                                       c.axis,                   c.method,
                                       c.observable};
        try {
            const LmgParams p = point_params(c, pt);
            const DickeState psi0 = coherent_state(pt.N, pt.theta, pt.phi);
            if (c.method == "order") {
                const double avg = open_order_parameter(p, pt.gamma, psi0, pt.t);
                cells.push_back(format_double(avg));
                cells.push_back(format_double(avg / (0.5 * pt.N)));
                cells.push_back(nan);
            } else {
                OpenEchoSpec spec;
                spec.params = p;
                spec.gamma = pt.gamma;
                spec.axis = axis_from(c.axis);
                spec.delta = c.delta;
                spec.t = pt.t;
                spec.step_budget = c.step_budget;
                const SensitivityResult r = open_echo_sensitivity(
                    spec, psi0, moment_from(c.observable), c.observable);
                cells.push_back(format_double(r.inverse_variance));
                cells.push_back(format_double(r.normalized));
                cells.push_back(format_double(r.variance));
            }
            cells.push_back("");
        } catch (const std::exception& e) {
            cells.insert(cells.end(), {nan, nan, nan, error_label(e)});
        }
        return cells;
    }
    }
    throw ConfigError("unreachable experiment kind");
}

std::vector<std::string> columns_for(const SweepConfig& c) {
    switch (c.kind) {
    case ExperimentKind::PhaseDiagram:
        return {"chi", "Omega", "omega", "theta", "phi", "t", "sz_bar", "ordered",
                "error_flag"};
    case ExperimentKind::QfiSweep:
    case ExperimentKind::Scaling:
        return {"N",     "chi",    "Omega", "omega", "theta",        "phi",
                "t",     "axis",   "method", "F_Q",  "F_Q_normalized", "error_flag"};
    case ExperimentKind::Spectrum:
        return {"N",      "chi",     "Omega",   "omega",   "theta", "phi",
                "e_mean", "e_fluct", "e_cr",    "gamma_x", "gamma_z", "error_flag"};
    case ExperimentKind::Echo:
        return {"N", "chi", "Omega", "omega", "theta", "phi", "t", "axis", "delta",
                "observable", "sensitivity", "sensitivity_normalized", "variance",
                "error_flag"};
    case ExperimentKind::OpenSweep:
        return {"N", "chi", "Omega", "omega", "theta", "phi", "t", "gamma", "axis",
                "method", "observable", "value", "normalized", "variance", "error_flag"};
    }
    return {};
}

std::string render_grid(const std::vector<double>& g) {
    std::vector<std::string> toks;
    for (double v : g) toks.push_back(format_double(v));
    return join(toks);
}

std::string render_grid(const std::vector<int>& g) {
    std::vector<std::string> toks;
    for (int v : g) toks.push_back(std::to_string(v));
    return join(toks);
}

std::map<std::string, std::string> echo_config(const SweepConfig& c) {
    std::map<std::string, std::string> e;
    e["experiment"] = experiment_name(c.kind);
    e["name"] = c.name;
    e["chi"] = format_double(c.chi);
    e["out"] = c.out_dir;
    e["workers"] = std::to_string(c.workers);
    e["seedless"] = "true";
    e["Omega"] = render_grid(c.Omega);
    e["omega"] = render_grid(c.omega);
    e["theta"] = render_grid(c.theta);
    e["phi"] = render_grid(c.phi);
    e["t"] = render_grid(c.t);
    const bool uses_N = c.kind != ExperimentKind::PhaseDiagram;
    if (uses_N) e["N"] = render_grid(c.N);
    if (c.kind == ExperimentKind::OpenSweep) {
        e["gamma"] = render_grid(c.gamma);
        e["budget"] = format_double(c.step_budget);
    }
    if (c.kind == ExperimentKind::QfiSweep || c.kind == ExperimentKind::Scaling) {
        e["axis"] = c.axis;
        e["method"] = c.method;
    }
    if (c.kind == ExperimentKind::Echo || c.kind == ExperimentKind::OpenSweep) {
        e["axis"] = c.axis;
        e["delta"] = format_double(c.delta);
        e["observable"] = c.observable;
        if (c.kind == ExperimentKind::OpenSweep) e["method"] = c.method;
    }
    if (c.kind == ExperimentKind::Spectrum) e["window"] = std::to_string(c.window);
    return e;
}

bool beyond_desk_scale(const SweepConfig& c) {
    int max_n = 0;
    for (int n : c.N) max_n = std::max(max_n, n);
    double max_t = 0.0;
    for (double t : c.t) max_t = std::max(max_t, t);
    const double chit = c.chi * max_t;
    if (c.kind == ExperimentKind::OpenSweep) return max_n > 100 || chit > 50.0 + 1e-9;
    if (c.kind == ExperimentKind::PhaseDiagram) return chit > 2e3;
    return max_n > 800 || chit > 1e3 + 1e-9;
}

} // namespace

const char* experiment_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::PhaseDiagram: return "phase-diagram";
    case ExperimentKind::QfiSweep: return "qfi-sweep";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Spectrum: return "spectrum";
    case ExperimentKind::Echo: return "echo";
    case ExperimentKind::OpenSweep: return "open-sweep";
    }
    return "unknown";
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

SweepConfig parse_config(ExperimentKind kind, const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'");
    }

    const KeySpec ks = key_spec(kind);
    for (const auto& [key, value] : kv)
        if (!ks.allowed.count(key))
            throw ConfigError("unknown key '" + key + "' for experiment " +
                              experiment_name(kind));
    for (const auto& key : ks.required)
        if (!kv.count(key)) throw ConfigError("missing required key '" + key + "'");

    SweepConfig c;
    c.kind = kind;
    if (kv.count("experiment") && kv["experiment"] != experiment_name(kind))
        throw ConfigError("config says experiment = " + kv["experiment"] +
                          " but the subcommand is " + experiment_name(kind));
    c.name = kv.count("name") ? kv["name"] : experiment_name(kind);
    if (kv.count("chi")) c.chi = parse_number(kv["chi"]);
    if (!(c.chi > 0.0)) throw ConfigError("chi must be > 0");
    if (kv.count("N")) c.N = parse_int_grid("N", kv["N"]);
    if (kv.count("gamma")) c.gamma = parse_grid("gamma", kv["gamma"]);
    if (kv.count("Omega")) c.Omega = parse_grid("Omega", kv["Omega"]);
    if (kv.count("omega")) c.omega = parse_grid("omega", kv["omega"]);
    c.theta = kv.count("theta") ? parse_grid("theta", kv["theta"])
                                : std::vector<double>{kPi};
    if (kv.count("phi")) c.phi = parse_grid("phi", kv["phi"]);
    c.t = kv.count("t") ? parse_grid("t", kv["t"])
                        : std::vector<double>{1000.0 / c.chi};
    if (kv.count("axis")) c.axis = kv["axis"];
    (void)axis_from(c.axis);
    if (kv.count("observable")) c.observable = kv["observable"];
    (void)moment_from(c.observable);
    if (kv.count("delta")) c.delta = parse_number(kv["delta"]);
    if (kv.count("budget")) c.step_budget = parse_number(kv["budget"]);
    if (kv.count("window")) c.window = static_cast<int>(parse_int(kv["window"]));
    if (kv.count("out")) c.out_dir = kv["out"];
    if (kv.count("workers")) c.workers = static_cast<int>(parse_int(kv["workers"]));
    if (c.workers < 1 || c.workers > 256) throw ConfigError("workers must be in [1, 256]");
    if (kv.count("seedless") && !parse_bool("seedless", kv["seedless"]))
        throw ConfigError("seedless determinism cannot be disabled");

    switch (kind) {
    case ExperimentKind::PhaseDiagram:
        break;
    case ExperimentKind::QfiSweep:
    case ExperimentKind::Scaling:
        c.method = kv.count("method") ? kv["method"] : "eigen";
        (void)qfi_method_from(c.method);
        if (c.method == "short-time")
            for (double th : c.theta)
                if (std::abs(th - kPi) > 1e-12)
                    throw ConfigError("method short-time requires theta = pi");
        if (kind == ExperimentKind::Scaling && c.N.size() < 2)
            throw ConfigError("scaling needs at least two N values");
        break;
    case ExperimentKind::Spectrum:
        if (c.window < 1 || c.window > 100) throw ConfigError("window must be in [1, 100]");
        break;
    case ExperimentKind::Echo:
        break;
    case ExperimentKind::OpenSweep:
        c.method = kv.count("method") ? kv["method"] : "echo";
        if (c.method != "echo" && c.method != "order")
            throw ConfigError("open-sweep method must be echo | order");
        for (double g : c.gamma)
            if (g < 0.0) throw ConfigError("gamma must be >= 0");
        if (c.step_budget < 0.0 || c.step_budget > 0.1)
            throw ConfigError("budget must be in [0, 0.1]");
        break;
    }
    for (int n : c.N)
        if (n < 1 && kind != ExperimentKind::PhaseDiagram)
            throw ConfigError("N must be >= 1");
    for (double t : c.t)
        if (!(t > 0.0)) throw ConfigError("t must be > 0");
    return c;
}

SweepConfig load_config(ExperimentKind kind, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(kind, ss.str());
}

SweepResult run_experiment(const SweepConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<GridPoint> points = enumerate_grid(config);
    if (points.empty()) throw ConfigError("empty parameter grid");

    SweepResult result;
    result.kind = config.kind;
    result.columns = columns_for(config);
    result.config_echo = echo_config(config);
    result.grid_points = static_cast<int>(points.size());
    result.long_running = beyond_desk_scale(config);
    result.rows.resize(points.size());

    int failed = 0;
    const int threads = std::max(
        1, std::min<int>(config.workers, static_cast<int>(points.size())));
#pragma omp parallel for schedule(dynamic) num_threads(threads) reduction(+ : failed) \
    if (threads > 1)
    for (long i = 0; i < static_cast<long>(points.size()); ++i) {
        const std::vector<std::string> cells = compute_row(config, points[i]);
        if (!cells.back().empty()) ++failed;
        result.rows[i] = join(cells);
    }
    result.failed_points = failed;

    if (config.kind == ExperimentKind::Scaling && failed == 0) {
        // one fitted exponent per sweep: value = a N^b over the N axis
        std::vector<std::pair<double, double>> pts;
        const std::size_t per_n = points.size() / config.N.size();
        for (std::size_t i = 0; i < points.size(); i += per_n) {
            const auto cells = split(result.rows[i], ',');
            pts.emplace_back(points[i].N, std::strtod(cells[9].c_str(), nullptr));
        }
        try {
            const PowerFit fit = scaling_fit(pts);
            result.derived["fit_prefactor"] = fit.a;
            result.derived["fit_exponent"] = fit.b;
            result.derived["fit_rms"] = fit.rms;
        } catch (const std::exception&) {
            // fit failure leaves the rows intact; derived stays empty
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string render_csv(const SweepResult& result) {
    std::string out = "# " + std::string(kSchema) + "\n";
    for (const auto& [k, v] : result.config_echo) out += "# " + k + " = " + v + "\n";
    std::string header;
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (i) header += ',';
        header += result.columns[i];
    }
    out += header + "\n";
    for (const auto& row : result.rows) out += row + "\n";
    return out;
}

std::string render_sidecar_json(const SweepResult& result) {
    nlohmann::ordered_json j;
    j["schema"] = kSchema;
    j["experiment"] = experiment_name(result.kind);
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : result.config_echo) cfg[k] = v;
    j["config"] = cfg;
    j["columns"] = result.columns;
    j["grid_points"] = result.grid_points;
    j["failed_points"] = result.failed_points;
    j["long_running"] = result.long_running;
    j["wall_seconds"] = result.wall_seconds;
    nlohmann::ordered_json derived;
    for (const auto& [k, v] : result.derived) derived[k] = v;
    j["derived"] = derived;
    return j.dump(2) + "\n";
}

std::string persist(const SweepResult& result, const SweepConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const fs::path base = fs::path(config.out_dir) / config.name;
    const std::string csv_path = base.string() + ".csv";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + csv_path + "'");
        out << render_csv(result);
    }
    {
        std::ofstream out(base.string() + ".json", std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + base.string() + ".json'");
        out << render_sidecar_json(result);
    }
    return csv_path;
}

} // namespace lmg
