#include "spikelock/reliability.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "spikelock/csv.hpp"

namespace spikelock {

void EnsembleConfig::validate() const {
    if (n_trials < 2)
        throw std::invalid_argument("ensemble: n_trials must be at least 2, got " +
                                    std::to_string(n_trials));
    if (!(param_jitter >= 0.0 && param_jitter <= 0.5))
        throw std::invalid_argument("ensemble: param_jitter must lie in [0, 0.5], got " +
                                    std::to_string(param_jitter));
    if (ic_sampling == ICSampling::ball && !(ball_radius > 0.0))
        throw std::invalid_argument("ensemble: ball_radius must be positive, got " +
                                    std::to_string(ball_radius));
    if (!(transient_cut >= 0.0))
        throw std::invalid_argument("ensemble: transient_cut must be nonnegative");
    if (!(t_end > transient_cut))
        throw std::invalid_argument("ensemble: t_end must exceed transient_cut");
    if (!(match_window >= 0.0))
        throw std::invalid_argument("ensemble: match_window must be nonnegative");
    if (threads < 1)
        throw std::invalid_argument("ensemble: threads must be at least 1");
}

namespace {

std::string lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

void scale_param(NeuronModel& model, SynapseParams& synapse, const std::string& key,
                 double factor) {
    if (key == "c") {
        model.C *= factor;
    } else if (key == "g_leak") {
        model.g_leak *= factor;
    } else if (key == "g_s") {
        synapse.g_s *= factor;
    } else if (key == "tau_s") {
        synapse.tau_s *= factor;
    } else if (key == "alpha") {
        synapse.alpha = std::min(synapse.alpha * factor, 1.0);
    } else if (key.rfind("g_", 0) == 0) {
        const std::string name = key.substr(2);
        for (IonicCurrentSpec& cur : model.currents)
            if (lower(cur.name) == name) {
                cur.g_max *= factor;
                return;
            }
        throw std::invalid_argument("jitter key '" + key + "' matches no ionic current");
    } else {
        throw std::invalid_argument("unknown jitter key '" + key +
                                    "' (expected c, g_leak, g_s, tau_s, alpha, or "
                                    "g_<current name>)");
    }
}

} // namespace

JitteredTrial apply_jitter(const NeuronModel& model, const SynapseParams& synapse,
                           const std::vector<std::string>& keys, double jitter,
                           rng_stream& rng) {
    if (!(jitter >= 0.0 && jitter <= 0.5))
        throw std::invalid_argument("param_jitter must lie in [0, 0.5]");
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (std::size_t j = i + 1; j < keys.size(); ++j)
            if (keys[i] == keys[j])
                throw std::invalid_argument("duplicate jitter key '" + keys[i] + "'");

    JitteredTrial trial{model, synapse, {}};
    for (const std::string& key : keys) {
        const double f = rng.uniform(1.0 - jitter, 1.0 + jitter);
        scale_param(trial.model, trial.synapse, lower(key), f);
        trial.factors.emplace_back(key, f);
    }
    if (trial.model.g_leak > 0.0)
        calibrate_leak(trial.model); // rest state stays at v = 0
    return trial;
}

namespace {

State draw_ic(const NeuronModel& model, const SynapseParams& synapse,
              const EnsembleConfig& cfg, rng_stream& rng) {
    const CompactSet box = compact_set(model, synapse);
    const std::size_t m = model.n_gates();
    State z;
    z.x.resize(m);

    if (cfg.ic_sampling == ICSampling::uniform_box)
        return sample_uniform_state(model, box, rng);

    // ball around the rest state: gaussian direction, radius r u^{1/n},
    // then a componentwise clamp back into the box
    const std::size_t n = m + 2;
    std::vector<double> dir(n);
    double norm2 = 0.0;
    for (double& c : dir) {
        c = rng.normal();
        norm2 += c * c;
    }
    const double u = rng.uniform01();
    const double scale =
        norm2 > 0.0 ? cfg.ball_radius * std::pow(u, 1.0 / static_cast<double>(n)) /
                          std::sqrt(norm2)
                    : 0.0;

    z.s = std::clamp(0.0 + scale * dir[0], 0.0, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double xj_star = model.gates[j].mu(0.0);
        z.x[j] = std::clamp(xj_star + scale * dir[1 + j], 0.0, 1.0);
    }
    z.v = std::clamp(0.0 + scale * dir[n - 1], box.E_min, box.E_max);
    return z;
}

TrialOutcome run_trial(const NeuronModel& model, const SynapseParams& synapse,
                       const EnsembleConfig& cfg, const SolverSettings& solver,
                       const DetectorConfig& detector, int trial_id) {
    TrialOutcome out;
    out.trial_id = trial_id;
    try {
        rng_stream rng(cfg.seed, static_cast<std::uint64_t>(trial_id));
        JitteredTrial jt =
            apply_jitter(model, synapse, cfg.jitter_params, cfg.param_jitter, rng);
        out.factors = jt.factors;

        const State z0 = draw_ic(jt.model, jt.synapse, cfg, rng);
        const Trajectory traj =
            integrate(jt.model, jt.synapse, z0, cfg.train, cfg.t_end, solver);
        const EventSet all = detect(traj, detector);

        for (const Event& e : all.events)
            if (e.time >= cfg.transient_cut)
                out.events.events.push_back(e);
        out.rate = static_cast<double>(out.events.size()) / (cfg.t_end - cfg.transient_cut);
    } catch (const IntegrationError& e) {
        out.failed = true;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
    }
    return out;
}

} // namespace

std::vector<Cluster> match_events(const std::vector<std::vector<double>>& event_times,
                                  double window) {
    if (!(window > 0.0))
        throw std::invalid_argument("match_events: window must be positive");

    std::vector<std::pair<double, int>> all; // (time, trial position)
    for (std::size_t t = 0; t < event_times.size(); ++t)
        for (double time : event_times[t])
            all.emplace_back(time, static_cast<int>(t));
    std::sort(all.begin(), all.end());

    std::vector<Cluster> clusters;
    std::vector<char> present(event_times.size(), 0);
    double sum = 0.0;

    auto close_cluster = [&](Cluster& c) {
        const double n = static_cast<double>(c.members.size());
        c.centroid = sum / n;
        double ss = 0.0;
        for (const auto& [trial, time] : c.members)
            ss += (time - c.centroid) * (time - c.centroid);
        c.time_sd = std::sqrt(ss / n);
        c.full = c.members.size() == event_times.size();
        clusters.push_back(std::move(c));
    };

    Cluster open;
    for (const auto& [time, trial] : all) {
        const bool can_absorb =
            !open.members.empty() &&
            std::abs(time - sum / static_cast<double>(open.members.size())) <= window &&
            !present[static_cast<std::size_t>(trial)];
        if (!open.members.empty() && !can_absorb) {
            close_cluster(open);
            open = Cluster{};
            std::fill(present.begin(), present.end(), 0);
            sum = 0.0;
        }
        open.members.emplace_back(trial, time);
        present[static_cast<std::size_t>(trial)] = 1;
        sum += time;
    }
    if (!open.members.empty())
        close_cluster(open);
    return clusters;
}

ReliabilityReport run_ensemble(const NeuronModel& model, const SynapseParams& synapse,
                               const EnsembleConfig& config, const SolverSettings& solver,
                               const DetectorConfig& detector) {
    config.validate();
    model.validate();
    synapse.validate();
    solver.validate();
    detector.validate();
    if (!config.train.empty() && config.train.times().back() >= config.t_end)
        throw std::invalid_argument("ensemble: train extends past t_end");

    ReliabilityReport report;
    report.config = config;
    report.trials.resize(config.n_trials);

    if (config.threads <= 1) {
        for (int t = 0; t < config.n_trials; ++t)
            report.trials[t] = run_trial(model, synapse, config, solver, detector, t);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= config.n_trials)
                    return;
                report.trials[t] = run_trial(model, synapse, config, solver, detector, t);
            }
        };
        const int n_workers = std::min(config.threads, config.n_trials);
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
        for (std::thread& th : pool)
            th.join();
    }

    // pooled inter-event intervals over successful trials
    double isi_sum = 0.0;
    std::size_t isi_count = 0;
    std::size_t total_events = 0;
    std::vector<std::vector<double>> times_by_trial;
    std::vector<int> trial_of_position;
    for (const TrialOutcome& trial : report.trials) {
        if (trial.failed) {
            ++report.n_failed;
            continue;
        }
        std::vector<double> times = trial.events.times();
        for (std::size_t i = 1; i < times.size(); ++i) {
            isi_sum += times[i] - times[i - 1];
            ++isi_count;
        }
        total_events += times.size();
        trial_of_position.push_back(trial.trial_id);
        times_by_trial.push_back(std::move(times));
    }
    report.mean_isi = isi_count > 0 ? isi_sum / static_cast<double>(isi_count) : 0.0;

    report.match_window = config.match_window > 0.0
                              ? config.match_window
                              : (report.mean_isi > 0.0
                                     ? std::min(5.0, report.mean_isi / 4.0)
                                     : 5.0);

    report.clusters = match_events(times_by_trial, report.match_window);
    for (Cluster& c : report.clusters)
        for (auto& [trial, time] : c.members)
            trial = trial_of_position[static_cast<std::size_t>(trial)];

    std::size_t full_events = 0;
    for (const Cluster& c : report.clusters) {
        if (c.full)
            full_events += c.members.size();
        if (c.members.size() >= 2)
            report.max_jitter = std::max(report.max_jitter, c.time_sd);
    }
    if (total_events > 0)
        report.matched_fraction =
            static_cast<double>(full_events) / static_cast<double>(total_events);
    else
        report.matched_fraction = times_by_trial.empty() ? 0.0 : 1.0;
    return report;
}

std::vector<std::pair<int, double>> ReliabilityReport::raster_rows() const {
    std::vector<std::pair<int, double>> rows;
    for (const TrialOutcome& trial : trials) {
        if (trial.failed)
            continue;
        for (const Event& e : trial.events.events)
            rows.emplace_back(trial.trial_id, e.time);
    }
    return rows;
}

void export_raster(const ReliabilityReport& report, std::ostream& out) {
    csv::write_raster(out, report.raster_rows());
}

} // namespace spikelock
