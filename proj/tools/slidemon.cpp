// slidemon: run monitoring experiments, replay traces, summarize scaling.
//
//   slidemon run <config>
//   slidemon replay <trace...> --protocol ac --epsilon 0.1 --window 100 --tau 0
//   slidemon report <dir>
//
// Exit status: 0 on success, 1 when any audit failed, 2 on bad input.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slidemon/slidemon.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
    const char* v = std::getenv("SLIDEMON_SEED");
    if (!v || !*v) return std::nullopt;
    std::uint64_t seed = 0;
    if (!slidemon::csv::parse_number(v, seed))
        throw slidemon::InputError(std::string("SLIDEMON_SEED is not an unsigned integer: ") + v);
    return seed;
}

int finish(const std::vector<slidemon::PointResult>& results, const std::string& dir) {
    slidemon::Count violations = 0;
    for (const auto& r : results) {
        std::cout << r.label << ": items=" << r.total_items << " max_window_words=" << r.cost.max_window_words
                  << " violations=" << r.violations << '\n';
        violations += r.violations;
    }
    std::cout << results.size() << " run(s) written to " << dir << '\n';
    return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sliding-window distributed monitoring simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run every sweep point of a config file");
    run->add_option("config", config_path, "Experiment config")->required();

    std::vector<std::string> traces;
    std::string protocol = "ac";
    std::string backend = "exact";
    std::string out_dir = "replay_out";
    std::string name = "replay";
    double epsilon = 0.1;
    slidemon::Tick window = 100;
    slidemon::Tick tau = 0;
    slidemon::Tick audit_every = 0;
    std::vector<double> phis;
    auto* replay = app.add_subcommand("replay", "Run the pipeline over recorded traces, one per stream");
    replay->add_option("traces", traces, "Trace CSV files")->required();
    replay->add_option("--protocol", protocol, "bc | ac | simple | quantile | frequent");
    replay->add_option("--epsilon", epsilon, "Error target");
    replay->add_option("--window", window, "Window length W");
    replay->add_option("--tau", tau, "Tardiness bound");
    replay->add_option("--backend", backend, "exact | eh");
    replay->add_option("--audit-every", audit_every, "Audit cadence, 0 for default");
    replay->add_option("--phis", phis, "Query fractions")->delimiter(',');
    replay->add_option("--out", out_dir, "Output directory");
    replay->add_option("--name", name, "Output file prefix");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Fit per-window cost against (1/eps) log n");
    report->add_option("dir", report_dir, "Directory holding summary.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = slidemon::load_experiment(config_path, seed_from_env());
            return finish(slidemon::run_experiment(cfg, cfg.output), cfg.output);
        }
        if (*replay) {
            slidemon::ExperimentConfig cfg;
            cfg.name = name;
            cfg.output = out_dir;
            cfg.traces = traces;
            cfg.streams = traces.size();
            cfg.protocol = slidemon::parse_protocol(protocol);
            cfg.backend = slidemon::parse_backend(backend);
            cfg.epsilons = {epsilon};
            cfg.window = window;
            cfg.taus = {tau};
            cfg.audit_every = audit_every;
            if (!phis.empty()) cfg.phis = phis;
            slidemon::ProtocolParams::check_epsilon(epsilon);
            slidemon::WindowConfig(window, tau).validate();
            return finish(slidemon::run_experiment(cfg, cfg.output), cfg.output);
        }
        if (*report) {
            const auto summary = slidemon::report_directory(report_dir);
            bool ok = true;
            for (const auto& c : summary.checks) {
                std::cout << c.axis << " [" << c.group << "] " << c.metric << " = " << c.value
                          << (c.pass ? " ok" : " OUT OF RANGE") << '\n';
                ok = ok && c.pass;
            }
            std::cout << summary.fits.size() << " fit row(s) written to " << report_dir << "/scaling.csv\n";
            return ok ? 0 : 1;
        }
    } catch (const slidemon::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
