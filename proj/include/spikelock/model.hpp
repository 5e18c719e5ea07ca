#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spikelock/synapse.hpp"

namespace spikelock {

// One gating variable: tau_j(v) x_j' = -x_j + mu_j(v). The voltage
// derivatives dmu/dtau feed the analytic Jacobian.
struct GateSpec {
    std::string name;
    std::function<double(double)> mu;    // steady state, maps v to (0, 1)
    std::function<double(double)> tau;   // time constant (ms), > 0
    std::function<double(double)> dmu;   // d mu / dv
    std::function<double(double)> dtau;  // d tau / dv
};

// Ohmic ionic current g_max * phi(x) * (v - E) with a monomial activation
// phi(x) = prod_j x_j^{exponents[j]} (Na: m^3 h -> {3, 1, 0}).
struct IonicCurrentSpec {
    std::string name;
    double g_max = 0.0;  // mS/cm^2, > 0
    double E = 0.0;      // reversal potential, mV
    std::vector<int> exponents;

    void validate(std::size_t n_gates) const;
};

struct NeuronModel {
    double C = 1.0;       // uF/cm^2, > 0
    double g_leak = 0.0;  // mS/cm^2, > 0
    double E_leak = 0.0;  // mV; normally set by calibrate_leak
    std::vector<GateSpec> gates;
    std::vector<IonicCurrentSpec> currents;

    std::size_t n_gates() const { return gates.size(); }
    void validate() const;
};

// Composite state z = (s, x, v).
struct State {
    double s = 0.0;
    std::vector<double> x;
    double v = 0.0;
};

// The compact box Z = [0,1] x [0,1]^m x [E_min, E_max]; forward invariant
// for the flow-and-jump dynamics.
struct CompactSet {
    double E_min = 0.0;
    double E_max = 0.0;
    std::size_t m = 0;

    // membership with separate slack for the unit coordinates and the voltage
    bool contains(const State& z, double eps_unit = 0.0, double eps_v = 0.0) const;
};

// E_min/E_max span all reversal potentials including E_leak and E_s.
CompactSet compact_set(const NeuronModel& model, const SynapseParams& synapse);

double steady_state_activation(const GateSpec& gate, double v);

// phi_k(x), in [0, 1] for x in the unit box
double activation(const IonicCurrentSpec& current, const std::vector<double>& x);

// g_max * phi(x) * (v - E)
double ionic_current(const IonicCurrentSpec& current, const std::vector<double>& x,
                     double v);

// Unforced field F(z): s' = -s/tau_s, tau_j(v) x_j' = -x_j + mu_j(v),
// C v' = -g_leak (v - E_leak) - sum_k i_k(x, v) - g_s s (v - E_s).
State vector_field(const NeuronModel& model, const SynapseParams& synapse,
                   const State& z);

// Total conductance and driving-point potential: the voltage dynamics read
// C v' = -G(x, s) (v - E(x, s)) with E a convex combination of reversals.
struct DrivingPoint {
    double G = 0.0;  // mS/cm^2, >= g_leak
    double E = 0.0;  // mV, in [E_min, E_max]
};

DrivingPoint driving_point(const NeuronModel& model, const SynapseParams& synapse,
                           const std::vector<double>& x, double s);

// Sets E_leak so the currents balance exactly at (x*, v* = 0) with
// x_j* = mu_j(0); returns the calibrated value.
double calibrate_leak(NeuronModel& model);

// z* = (0, mu(0), 0); throws if ||F(z*)|| exceeds 1e-12 (uncalibrated or
// inconsistent parameters).
State compute_equilibrium(const NeuronModel& model, const SynapseParams& synapse);

// Uniform draw from the compact box, consuming the stream in the fixed
// order s, x_1..x_m, v so seeded runs are reproducible.
class rng_stream;
State sample_uniform_state(const NeuronModel& model, const CompactSet& box,
                           rng_stream& rng);

// Packed layout [s, x_1..x_m, v] shared by the integrator and linearization.
void pack(const State& z, std::vector<double>& out);
State unpack(const double* z, std::size_t m);

// F in packed form; dz must have room for m + 2 entries. This is the
// integrator's hot path.
void vector_field_packed(const NeuronModel& model, const SynapseParams& synapse,
                         const double* z, double* dz);

} // namespace spikelock
