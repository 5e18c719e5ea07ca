#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "spikelock/config.hpp"
#include "spikelock/contraction.hpp"
#include "spikelock/csv.hpp"
#include "spikelock/detector.hpp"
#include "spikelock/hh.hpp"
#include "spikelock/integrate.hpp"
#include "spikelock/model.hpp"
#include "spikelock/reliability.hpp"
#include "spikelock/rng.hpp"
#include "spikelock/svg.hpp"
#include "spikelock/synapse.hpp"

namespace fs = std::filesystem;
using namespace spikelock;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    const fs::path path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return f;
}

std::string fmt(double x) { return csv::format(x); }

void emit_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                   const std::string& command) {
    std::ofstream f = open_out(dir, "manifest.ini");
    write_manifest(f, cfg, command);
}

svg::Series voltage_series(const Trajectory& traj, const std::string& label) {
    svg::Series s;
    s.label = label;
    s.x = traj.times;
    s.y = traj.voltage_trace();
    return s;
}

void run_simulate(const ExperimentConfig& cfg, const fs::path& dir) {
    const NeuronModel model = cfg.make_model();
    const SynapseParams synapse = cfg.make_synapse();
    const ImpulseTrain train = cfg.make_train();
    const State z0 = compute_equilibrium(model, synapse);

    const Trajectory traj =
        integrate(model, synapse, z0, train, cfg.experiment.t_end, cfg.make_solver());
    const EventSet events = detect(traj, cfg.make_detector());

    { std::ofstream f = open_out(dir, "trajectory.csv"); csv::write_trajectory(f, traj); }
    { std::ofstream f = open_out(dir, "impulses.csv"); csv::write_impulses(f, traj); }
    { std::ofstream f = open_out(dir, "events.csv"); csv::write_events(f, events); }
    {
        std::ofstream f = open_out(dir, "trajectory.svg");
        svg::write_lines(f, {voltage_series(traj, "v")}, "membrane voltage",
                         "time (ms)", "v (mV)");
    }
    emit_manifest(dir, cfg, "simulate");

    std::cout << "simulate: " << traj.times.size() << " samples, "
              << traj.impulse_records.size() << " impulses, " << events.size()
              << " events, " << traj.n_steps << " accepted steps -> " << dir.string()
              << "\n";
}

void write_divergence_outputs(const DivergenceStudy& study, const fs::path& dir,
                              std::ofstream summary) {
    {
        std::ofstream f = open_out(dir, "divergence.csv");
        csv::write_divergence(f, study);
    }
    {
        std::vector<svg::Series> series;
        for (std::size_t p = 0; p < study.d.size(); ++p) {
            svg::Series s;
            s.label = "pair " + std::to_string(p);
            s.x = study.times;
            s.y = study.d[p];
            series.push_back(std::move(s));
        }
        std::ofstream f = open_out(dir, "divergence.svg");
        svg::write_lines(f, series, "pairwise state divergence", "time (ms)",
                         "||dz|| (mV scale)");
    }
    summary << "verdict = " << to_string(study.verdict) << '\n';
    for (std::size_t p = 0; p < study.d.size(); ++p)
        summary << "pair " << p << ": d0 = " << fmt(study.d0[p])
                << ", d_end = " << fmt(study.d[p].back())
                << ", trailing_mean = " << fmt(study.trailing_mean[p]) << '\n';
}

void run_pair(const ExperimentConfig& cfg, const fs::path& dir) {
    const ImpulseTrain train = cfg.make_train();
    if (train.empty())
        throw ConfigError("pair: the input train is empty; use the contraction "
                          "command for the unforced system");
    const DivergenceStudy study = forced_divergence_study(
        cfg.make_model(), cfg.make_synapse(), train,
        static_cast<int>(cfg.experiment.n_pairs), cfg.experiment.t_end,
        cfg.experiment.seed, cfg.make_solver());

    write_divergence_outputs(study, dir, open_out(dir, "summary.txt"));
    emit_manifest(dir, cfg, "pair");
    std::cout << "pair: verdict " << to_string(study.verdict) << " over "
              << study.d.size() << " pairs -> " << dir.string() << "\n";
}

void run_contraction(const ExperimentConfig& cfg, const fs::path& dir) {
    const NeuronModel model = cfg.make_model();
    const SynapseParams synapse = cfg.make_synapse();
    const ContractionEstimate est = estimate_contraction(
        model, synapse, static_cast<int>(cfg.experiment.n_pairs), cfg.experiment.t_end,
        cfg.experiment.seed, cfg.make_solver());

    Linearization lin = linearize(model, synapse, compute_equilibrium(model, synapse));
    attach_certificate(lin);
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(lin.P).eigenvalues().minCoeff();

    std::optional<DwellCriterion> crit;
    std::string crit_source;
    const ImpulseTrain train = cfg.make_train();
    if (cfg.input.kind == "periodic") {
        crit = dwell_criterion(est, cfg.input.period);
        crit_source = "periodic input, T = " + fmt(cfg.input.period) + " ms";
    } else if (!train.empty()) {
        crit = dwell_criterion(est, train);
        crit_source = "configured train via its average dwell time";
    }

    {
        std::ofstream f = open_out(dir, "contraction.txt");
        f << "k = " << fmt(est.k) << '\n';
        f << "lambda = " << fmt(est.lambda) << " per ms\n";
        f << "fit_window = [" << fmt(est.fit_t_min) << ", " << fmt(est.fit_t_max)
          << "] ms\n";
        f << "fit_residual = " << fmt(est.residual) << '\n';
        f << "pairs = " << est.sample_pairs << '\n';
        f << "spectral_abscissa = " << fmt(lin.spectral_abscissa) << '\n';
        f << "lyapunov_min_eigenvalue = " << fmt(min_eig) << '\n';
        if (crit) {
            f << "dwell_input = " << crit_source << '\n';
            f << "dwell_input_rate = " << fmt(crit->input_rate) << " per ms\n";
            f << "dwell_threshold_rate = " << fmt(crit->threshold_rate) << " per ms\n";
            f << "dwell_min_period = " << fmt(crit->min_period) << " ms\n";
            f << "dwell_satisfied = " << (crit->satisfied ? "yes" : "no") << '\n';
            f << "# the dwell criterion is sufficient only; an unsatisfied criterion\n"
                 "# does not certify divergence\n";
        }
    }
    emit_manifest(dir, cfg, "contraction");

    std::cout << "contraction: k = " << fmt(est.k) << ", lambda = " << fmt(est.lambda)
              << " per ms";
    if (crit)
        std::cout << ", dwell criterion " << (crit->satisfied ? "satisfied" : "unsatisfied");
    std::cout << " -> " << dir.string() << "\n";
}

void run_synapse(const ExperimentConfig& cfg, const fs::path& dir) {
    const SynapseParams p = cfg.make_synapse();
    {
        std::ofstream f = open_out(dir, "synapse_sweep.csv");
        f << "T,a_T,s_T_star,gamma_T,bound\n";
        // log-spaced periods from 10 microseconds to 100 ms
        for (int k = 0; k <= 60; ++k) {
            const double T = std::pow(10.0, -2.0 + 4.0 * k / 60.0);
            const PeriodicAnalysis an = periodic_analysis(p, T);
            f << fmt(T) << ',' << fmt(an.a_T) << ',' << fmt(an.s_T_star) << ','
              << fmt(an.gamma_T) << ',' << fmt(an.bound) << '\n';
        }
    }
    emit_manifest(dir, cfg, "synapse");

    std::cout << "synapse: sweep written -> " << dir.string() << "\n";
    if (cfg.input.kind == "periodic") {
        const PeriodicAnalysis an = periodic_analysis(p, cfg.input.period);
        std::cout << "  at configured T = " << fmt(cfg.input.period)
                  << ": s_T* = " << fmt(an.s_T_star) << ", gamma_T = " << fmt(an.gamma_T)
                  << ", bound = " << fmt(an.bound) << "\n";
    }
}

void write_ensemble_outputs(const ReliabilityReport& report, const ExperimentConfig& cfg,
                            const fs::path& dir, const std::string& command) {
    {
        std::ofstream f = open_out(dir, "raster.csv");
        export_raster(report, f);
    }
    {
        std::ofstream f = open_out(dir, "raster.svg");
        svg::write_raster(f, report.raster_rows(), report.config.n_trials,
                          report.config.t_end, "spike raster");
    }
    {
        std::ofstream f = open_out(dir, "report.txt");
        f << "trials = " << report.config.n_trials << '\n';
        f << "failed = " << report.n_failed << '\n';
        f << "matched_fraction = " << fmt(report.matched_fraction) << '\n';
        f << "mean_isi = " << fmt(report.mean_isi) << " ms\n";
        f << "match_window = " << fmt(report.match_window) << " ms\n";
        f << "max_jitter = " << fmt(report.max_jitter) << " ms\n";
        std::size_t full = 0;
        for (const Cluster& c : report.clusters)
            if (c.full)
                ++full;
        f << "clusters = " << report.clusters.size() << " (" << full << " full)\n";
        f << "# alignment thresholds (0.9 matched fraction, 0.1 x mean ISI jitter)\n"
             "# are reporting conventions, not derived quantities\n";
        for (const TrialOutcome& t : report.trials) {
            f << "trial " << t.trial_id << ": ";
            if (t.failed) {
                f << "FAILED (" << t.error << ")\n";
                continue;
            }
            f << "events = " << t.events.size() << ", rate = " << fmt(t.rate)
              << " per ms";
            if (!t.factors.empty()) {
                f << ", factors:";
                for (const auto& [key, value] : t.factors)
                    f << ' ' << key << '=' << fmt(value);
            }
            f << '\n';
        }
    }
    emit_manifest(dir, cfg, command);
}

void run_ensemble_cmd(const ExperimentConfig& cfg, const fs::path& dir,
                      const std::string& command) {
    const ReliabilityReport report =
        run_ensemble(cfg.make_model(), cfg.make_synapse(), cfg.make_ensemble(),
                     cfg.make_solver(), cfg.make_detector());
    write_ensemble_outputs(report, cfg, dir, command);
    std::cout << command << ": matched_fraction = " << fmt(report.matched_fraction)
              << ", mean_isi = " << fmt(report.mean_isi)
              << " ms, max_jitter = " << fmt(report.max_jitter) << " ms, failed = "
              << report.n_failed << " -> " << dir.string() << "\n";
}

void run_fig3(const ExperimentConfig& cfg, const fs::path& dir) {
    const NeuronModel model = cfg.make_model();
    const SynapseParams synapse = cfg.make_synapse();
    const SolverSettings solver = cfg.make_solver();
    const DetectorConfig detector = cfg.make_detector();
    const ImpulseTrain train = cfg.make_train();
    const CompactSet box = compact_set(model, synapse);

    std::vector<svg::Series> series;
    std::vector<std::size_t> event_counts;
    for (long long i = 0; i < cfg.experiment.n_ics; ++i) {
        rng_stream rng(cfg.experiment.seed, static_cast<std::uint64_t>(i));
        const State z0 = sample_uniform_state(model, box, rng);
        const Trajectory traj =
            integrate(model, synapse, z0, train, cfg.experiment.t_end, solver);
        const EventSet events = detect(traj, detector);
        event_counts.push_back(events.size());

        const std::string tag = std::to_string(i);
        { std::ofstream f = open_out(dir, "trajectory_" + tag + ".csv"); csv::write_trajectory(f, traj); }
        { std::ofstream f = open_out(dir, "events_" + tag + ".csv"); csv::write_events(f, events); }
        if (i == 0) {
            std::ofstream f = open_out(dir, "impulses.csv");
            csv::write_impulses(f, traj);
        }
        series.push_back(voltage_series(traj, "ic " + tag));
    }
    {
        std::ofstream f = open_out(dir, "voltages.svg");
        svg::write_lines(f, series, "voltage traces, shared impulse train", "time (ms)",
                         "v (mV)");
    }

    const DivergenceStudy study = forced_divergence_study(
        model, synapse, train, static_cast<int>(cfg.experiment.n_pairs),
        cfg.experiment.t_end, cfg.experiment.seed, solver);

    std::ofstream summary = open_out(dir, "summary.txt");
    for (std::size_t i = 0; i < event_counts.size(); ++i)
        summary << "trajectory " << i << ": " << event_counts[i] << " events\n";
    write_divergence_outputs(study, dir, std::move(summary));
    emit_manifest(dir, cfg, "preset");

    std::cout << "preset " << cfg.experiment.preset << ": verdict "
              << to_string(study.verdict) << ", " << event_counts.size()
              << " trajectories -> " << dir.string() << "\n";
}

void run_preset(const ExperimentConfig& cfg, const fs::path& dir) {
    const std::string& name = cfg.experiment.preset;
    if (name.rfind("fig3", 0) == 0) {
        run_fig3(cfg, dir);
    } else if (name.rfind("fig4", 0) == 0) {
        run_ensemble_cmd(cfg, dir, "preset");
    } else {
        throw ConfigError("preset command requires a preset name in the config");
    }
}

void dispatch(const std::string& command, const ExperimentConfig& cfg,
              const fs::path& dir) {
    if (command == "simulate")
        run_simulate(cfg, dir);
    else if (command == "pair")
        run_pair(cfg, dir);
    else if (command == "contraction")
        run_contraction(cfg, dir);
    else if (command == "synapse")
        run_synapse(cfg, dir);
    else if (command == "ensemble")
        run_ensemble_cmd(cfg, dir, "ensemble");
    else if (command == "preset")
        run_preset(cfg, dir);
    else
        throw ConfigError("unknown command '" + command + "' in manifest");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikelock: impulsively driven conductance-based neuron simulation "
                 "and contraction analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::uint64_t seed_flag = 0;
    int threads_flag = 1;
    double tol_flag = 0.0;

    auto* opt_config =
        app.add_option("-c,--config", config_path, "experiment config file");
    auto* opt_seed = app.add_option("--seed", seed_flag, "override the master seed");
    auto* opt_threads =
        app.add_option("--threads", threads_flag, "worker threads for ensembles")
            ->check(CLI::PositiveNumber);
    auto* opt_tol = app.add_option("--tolerance", tol_flag,
                                   "override rel_tol (abs_tol follows at 1/100)");
    auto* opt_out = app.add_option("-o,--out", out_flag, "output directory");

    app.add_subcommand("simulate", "single trajectory from the rest state, plus events");
    app.add_subcommand("pair", "forced divergence study under the configured train");
    app.add_subcommand("contraction", "estimate (k, lambda) and the dwell criterion");
    app.add_subcommand("synapse", "closed-form periodic synapse analysis sweep");
    app.add_subcommand("ensemble", "multi-trial reliability protocol");

    auto* preset_cmd =
        app.add_subcommand("preset", "run a built-in figure protocol");
    std::string preset_name;
    preset_cmd->add_option("name", preset_name, "fig3-sparse | fig3-dense | fig4-sparse | fig4-dense")
        ->required();

    auto* rerun_cmd = app.add_subcommand("rerun", "repeat a run from its manifest");
    std::string manifest_path;
    rerun_cmd->add_option("manifest", manifest_path, "manifest.ini from a previous run")
        ->required();

    // global flags may trail the subcommand (spikelock simulate --out dir)
    for (CLI::App* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::string sub = app.get_subcommands().at(0)->get_name();

        ExperimentConfig cfg;
        std::string command = sub;
        if (sub == "preset") {
            if (opt_config->count() > 0)
                throw ConfigError("preset takes no --config; put preset = \"" +
                                  preset_name + "\" in the config file instead");
            cfg = parse_config("preset = \"" + preset_name + "\"\n");
        } else if (sub == "rerun") {
            cfg = load_config(manifest_path);
            if (cfg.run.command.empty())
                throw ConfigError("manifest has no [run] command entry");
            command = cfg.run.command;
        } else if (opt_config->count() > 0) {
            cfg = load_config(config_path);
        }

        if (opt_seed->count() > 0)
            cfg.experiment.seed = seed_flag;
        if (opt_threads->count() > 0)
            cfg.threads = threads_flag;
        if (opt_tol->count() > 0) {
            cfg.solver.rel_tol = tol_flag;
            cfg.solver.abs_tol = tol_flag / 100.0;
        }
        if (opt_out->count() > 0)
            cfg.output.dir = out_flag;

        if (cfg.output.dir.empty()) {
            const char* env = std::getenv("SPIKELOCK_OUT");
            cfg.output.dir = env != nullptr && *env != '\0' ? env : "out";
        }
        cfg.validate();

        const fs::path dir(cfg.output.dir);
        fs::create_directories(dir);
        dispatch(command, cfg, dir);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
