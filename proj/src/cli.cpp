#include "lmg/cli.hpp"

#include "lmg/acceptance.hpp"
#include "lmg/errors.hpp"
#include "lmg/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>

namespace lmg {

namespace {

struct SweepCommand {
    ExperimentKind kind;
    std::string config_path;
    std::string out_dir;
    int workers = 0; // 0 = keep the config's value
    bool seedless = false;
};

void add_sweep_subcommand(CLI::App& app, SweepCommand& cmd, ExperimentKind kind,
                          const char* blurb, std::vector<CLI::App*>& registry) {
    CLI::App* sub = app.add_subcommand(experiment_name(kind), blurb);
    sub->add_option("--config", cmd.config_path, "key = value experiment description")
        ->required();
    sub->add_option("--out", cmd.out_dir, "output directory (overrides the config)");
    sub->add_option("--workers", cmd.workers, "worker threads (overrides the config)")
        ->check(CLI::Range(1, 256));
    sub->add_flag("--seedless", cmd.seedless,
                  "acknowledge the always-on deterministic mode");
    sub->parse_complete_callback([&cmd, kind] { cmd.kind = kind; });
    registry.push_back(sub);
}

int run_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
    SweepConfig config = load_config(cmd.kind, cmd.config_path);
    if (!cmd.out_dir.empty()) config.out_dir = cmd.out_dir;
    if (cmd.workers > 0) config.workers = cmd.workers;

    if (config.kind == ExperimentKind::OpenSweep) {
        for (int n : config.N)
            if (n > 100)
                err << "note: open-system N=" << n << " exceeds the desk-scale default\n";
    }

    const SweepResult result = run_experiment(config);
    if (result.long_running)
        err << "note: configuration beyond desk-scale defaults; expect a long run\n";
    const std::string csv = persist(result, config);
    out << "wrote " << csv << " (" << result.grid_points << " points, "
        << result.failed_points << " failed, " << format_double(result.wall_seconds)
        << " s)\n";
    return result.failed_points > 0 ? 3 : 0;
}

} // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"collective-spin dynamical phase transition toolkit", "lmg"};
    app.require_subcommand(1);

    SweepCommand cmd;
    std::vector<CLI::App*> sweeps;
    add_sweep_subcommand(app, cmd, ExperimentKind::PhaseDiagram,
                         "classical long-time order-parameter map", sweeps);
    add_sweep_subcommand(app, cmd, ExperimentKind::QfiSweep,
                         "quantum Fisher information over parameter grids", sweeps);
    add_sweep_subcommand(app, cmd, ExperimentKind::Scaling,
                         "system-size scaling with a fitted exponent", sweeps);
    add_sweep_subcommand(app, cmd, ExperimentKind::Spectrum,
                         "excited-state transition exponents", sweeps);
    add_sweep_subcommand(app, cmd, ExperimentKind::Echo,
                         "time-reversal echo sensitivity", sweeps);
    add_sweep_subcommand(app, cmd, ExperimentKind::OpenSweep,
                         "dephasing-resolved sensitivity and order parameter", sweeps);

    CLI::App* regress = app.add_subcommand("regress", "run the release regression suite");
    std::vector<int> only;
    bool list_only = false;
    regress->add_option("--only", only, "criterion ids to run (default: all)")
        ->check(CLI::Range(1, 12));
    regress->add_flag("--list", list_only, "print the criterion table and exit");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (regress->parsed()) {
            if (list_only) {
                for (int id = 1; id <= criterion_count(); ++id) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "c%02d ", id);
                    out << buf << criterion_title(id) << "\n";
                }
                return 0;
            }
            const AcceptanceReport report = run_acceptance(only, out);
            return report.all_passed() ? 0 : 3;
        }
        for (CLI::App* sub : sweeps)
            if (sub->parsed()) return run_sweep(cmd, out, err);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    err << "no subcommand selected\n";
    return 2;
}

} // namespace lmg
