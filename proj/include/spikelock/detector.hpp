#pragma once

#include <vector>

#include "spikelock/integrate.hpp"

namespace spikelock {

// Schmitt-trigger detector with dwell time: an event window opens when the
// voltage exceeds v_high while the detector is armed, closes when the
// voltage falls back to v_high or below, and counts only if it lasted at
// least tau_e. After any window (counted or not) the detector re-arms only
// once the voltage has returned to v_low or below.
struct DetectorConfig {
    double v_low = 20.0;   // mV
    double v_high = 51.5;  // mV
    double tau_e = 0.5;    // ms

    void validate() const;
};

struct Event {
    double time = 0.0;          // apex: first sample attaining the window max
    double window_start = 0.0;  // first supra-threshold sample
    double window_end = 0.0;    // last supra-threshold sample
};

struct EventSet {
    std::vector<Event> events;

    bool empty() const { return events.empty(); }
    std::size_t size() const { return events.size(); }
    std::vector<double> times() const;
};

// Detection on a uniformly sampled voltage trace. The sampling grid is the
// resolution: window lengths and apex times are grid-quantized, and
// non-uniform time bases are rejected.
EventSet detect(const std::vector<double>& times, const std::vector<double>& voltage,
                const DetectorConfig& config);

EventSet detect(const Trajectory& traj, const DetectorConfig& config);

// integrate + detect on the voltage component
EventSet event_map(const NeuronModel& model, const SynapseParams& synapse,
                   const State& z0, const ImpulseTrain& train, double t_end,
                   const SolverSettings& solver, const DetectorConfig& detector);

} // namespace spikelock
