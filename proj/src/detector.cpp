#include "spikelock/detector.hpp"

#include <cmath>
#include <stdexcept>

namespace spikelock {

void DetectorConfig::validate() const {
    if (!(v_low > 0.0))
        throw std::invalid_argument("detector: v_low must be > 0");
    if (!(v_low < v_high))
        throw std::invalid_argument("detector: v_low must be < v_high");
    if (!(tau_e > 0.0))
        throw std::invalid_argument("detector: tau_e must be > 0");
}

std::vector<double> EventSet::times() const {
    std::vector<double> out;
    out.reserve(events.size());
    for (const auto& e : events)
        out.push_back(e.time);
    return out;
}

EventSet detect(const std::vector<double>& times, const std::vector<double>& voltage,
                const DetectorConfig& config) {
    config.validate();
    if (times.size() != voltage.size())
        throw std::invalid_argument("detect: time and voltage lengths differ");
    EventSet out;
    if (times.size() < 2)
        return out;

    const double dt = times[1] - times[0];
    if (!(dt > 0.0))
        throw std::invalid_argument("detect: time base must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
            throw std::invalid_argument("detect: sampling must be uniform");

    enum class Phase { armed, in_window, disarmed };
    Phase phase = Phase::armed;
    std::size_t win_start = 0, apex = 0;
    double apex_v = 0.0;

    auto close_window = [&](std::size_t last_supra) {
        double length = times[last_supra] - times[win_start];
        if (length >= config.tau_e)
            out.events.push_back({times[apex], times[win_start], times[last_supra]});
        phase = Phase::disarmed;
    };

    for (std::size_t i = 0; i < times.size(); ++i) {
        double v = voltage[i];
        switch (phase) {
        case Phase::armed:
            if (v > config.v_high) {
                phase = Phase::in_window;
                win_start = apex = i;
                apex_v = v;
            }
            break;
        case Phase::in_window:
            if (v > config.v_high) {
                if (v > apex_v) {  // strict: ties keep the earliest sample
                    apex_v = v;
                    apex = i;
                }
            } else {
                close_window(i - 1);
                if (v <= config.v_low)
                    phase = Phase::armed;
            }
            break;
        case Phase::disarmed:
            if (v <= config.v_low)
                phase = Phase::armed;
            break;
        }
    }
    // a window still open at the end of the trace is not a complete event
    return out;
}

EventSet detect(const Trajectory& traj, const DetectorConfig& config) {
    return detect(traj.times, traj.voltage_trace(), config);
}

EventSet event_map(const NeuronModel& model, const SynapseParams& synapse,
                   const State& z0, const ImpulseTrain& train, double t_end,
                   const SolverSettings& solver, const DetectorConfig& detector) {
    Trajectory traj = integrate(model, synapse, z0, train, t_end, solver);
    return detect(traj, detector);
}

} // namespace spikelock
