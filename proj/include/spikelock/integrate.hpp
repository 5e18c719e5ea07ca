#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikelock/model.hpp"
#include "spikelock/synapse.hpp"

namespace spikelock {

enum class SolverMethod { dopri5, rk4 };

struct SolverSettings {
    SolverMethod method = SolverMethod::dopri5;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    // adaptive step cap; also the fixed step of the rk4 method
    double max_step = 0.1;
    // uniform output grid spacing
    double output_dt = 0.01;

    void validate() const;
};

// Integration failure with the time it occurred at (step-size underflow,
// non-finite state, stiffness escape).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), t_failed(t) {}
    double t_failed;
};

// Left and right limit of s at one applied impulse; the other state
// components are continuous across the jump.
struct ImpulseRecord {
    double t = 0.0;
    double s_minus = 0.0;
    double s_plus = 0.0;
};

// Solution sampled on the uniform grid i * output_dt. Samples at impulse
// instants hold the post-jump state (right-continuous convention); the left
// limits live in impulse_records. Rows are packed as [s, x_1..x_m, v].
struct Trajectory {
    std::size_t dim = 0;  // m + 2
    std::vector<double> times;
    std::vector<double> data;  // times.size() * dim values, row-major
    std::vector<ImpulseRecord> impulse_records;

    std::size_t n_samples() const { return times.size(); }
    const double* row(std::size_t i) const { return data.data() + i * dim; }
    double voltage(std::size_t i) const { return data[i * dim + dim - 1]; }
    State state(std::size_t i) const { return unpack(row(i), dim - 2); }
    std::vector<double> voltage_trace() const;

    // solver effort counters
    std::size_t n_steps = 0;
    std::size_t n_rejected = 0;
    std::size_t n_rhs = 0;
};

// Integrates the flow-and-jump system: smooth dynamics between impulse
// times (which are hard step boundaries, never crossed by the controller),
// exact jump s <- (1-alpha) s + alpha at each impulse. Requires z0 with the
// model's gate count and train times strictly below t_end.
Trajectory integrate(const NeuronModel& model, const SynapseParams& synapse,
                     const State& z0, const ImpulseTrain& train, double t_end,
                     const SolverSettings& settings);

struct PairResult {
    Trajectory a;
    Trajectory b;
    // Euclidean distance between the packed states at each grid time
    std::vector<double> divergence;
};

// Both trajectories driven by the identical train on the shared grid.
PairResult integrate_pair(const NeuronModel& model, const SynapseParams& synapse,
                          const State& z0_a, const State& z0_b,
                          const ImpulseTrain& train, double t_end,
                          const SolverSettings& settings);

} // namespace spikelock
