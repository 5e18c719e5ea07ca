#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spikelock/detector.hpp"
#include "spikelock/integrate.hpp"
#include "spikelock/model.hpp"
#include "spikelock/rng.hpp"
#include "spikelock/synapse.hpp"

namespace spikelock {

enum class ICSampling { uniform_box, ball };

// Multi-trial protocol: shared input train, per-trial random initial
// conditions and multiplicative parameter jitter.
struct EnsembleConfig {
    int n_trials = 10;
    ICSampling ic_sampling = ICSampling::uniform_box;
    double ball_radius = 1.0;   // only for ICSampling::ball, state-space units
    double param_jitter = 0.20; // relative amplitude, factors in [1-j, 1+j]
    std::vector<std::string> jitter_params; // subset of: c, g_leak, g_s, tau_s,
                                            // alpha, g_<current name>
    std::uint64_t seed = 0;
    ImpulseTrain train{std::vector<double>{}};
    double transient_cut = 50.0; // events strictly before this are discarded
    double t_end = 300.0;
    double match_window = 0.0;   // 0 = automatic: min(5 ms, mean_isi / 4)
    int threads = 1;

    void validate() const;
};

// One trial's jittered system, with the factors actually applied.
struct JitteredTrial {
    NeuronModel model;
    SynapseParams synapse;
    std::vector<std::pair<std::string, double>> factors;
};

// Draws one uniform factor per declared key (in the declared order) and
// rescales the targeted parameter; alpha is clamped to (0,1] and the leak
// reversal is recalibrated so the rest state stays at v = 0.
JitteredTrial apply_jitter(const NeuronModel& model, const SynapseParams& synapse,
                           const std::vector<std::string>& keys, double jitter,
                           rng_stream& rng);

struct TrialOutcome {
    int trial_id = 0;
    bool failed = false;
    std::string error;
    EventSet events;  // after the transient cut
    double rate = 0.0; // events per ms over (transient_cut, t_end]
    std::vector<std::pair<std::string, double>> factors;
};

struct Cluster {
    std::vector<std::pair<int, double>> members; // (trial id, event time)
    double centroid = 0.0;
    double time_sd = 0.0; // population standard deviation of member times
    bool full = false;    // one member from every successful trial
};

// Greedy single-pass agglomeration over the globally time-sorted events:
// the open cluster absorbs the next event when it lies within the window of
// the running centroid and its trial is not yet represented; otherwise the
// cluster is closed and a new one opened. Member trial ids are positions in
// event_times.
std::vector<Cluster> match_events(const std::vector<std::vector<double>>& event_times,
                                  double window);

struct ReliabilityReport {
    EnsembleConfig config;
    std::vector<TrialOutcome> trials; // indexed by trial id
    std::vector<Cluster> clusters;
    double matched_fraction = 0.0; // events in full clusters / total events
    double mean_isi = 0.0;         // pooled over successful trials; 0 if none
    double max_jitter = 0.0;       // largest time_sd among clusters with >= 2 trials
    double match_window = 0.0;     // window actually used
    int n_failed = 0;

    // (trial id, event time) sorted by trial then time; failed trials omitted
    std::vector<std::pair<int, double>> raster_rows() const;
};

ReliabilityReport run_ensemble(const NeuronModel& model, const SynapseParams& synapse,
                               const EnsembleConfig& config,
                               const SolverSettings& solver = {},
                               const DetectorConfig& detector = {});

// CSV `trial_id,event_time`, one row per event, header always present.
void export_raster(const ReliabilityReport& report, std::ostream& out);

} // namespace spikelock
