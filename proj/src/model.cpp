#include "spikelock/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spikelock/rng.hpp"

namespace spikelock {

namespace {

double pow_int(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i)
        r *= base;
    return r;
}

} // namespace

void IonicCurrentSpec::validate(std::size_t n_gates) const {
    if (!(g_max > 0.0))
        throw std::invalid_argument("current '" + name + "': g_max = " +
                                    std::to_string(g_max) + ": must be > 0");
    if (!std::isfinite(E))
        throw std::invalid_argument("current '" + name + "': reversal must be finite");
    if (exponents.size() != n_gates)
        throw std::invalid_argument("current '" + name +
                                    "': exponent list length must equal gate count");
    for (int e : exponents)
        if (e < 0)
            throw std::invalid_argument("current '" + name +
                                        "': exponents must be >= 0");
}

void NeuronModel::validate() const {
    if (!(C > 0.0))
        throw std::invalid_argument("model: C = " + std::to_string(C) +
                                    ": must be > 0");
    if (!(g_leak > 0.0))
        throw std::invalid_argument("model: g_leak = " + std::to_string(g_leak) +
                                    ": must be > 0");
    if (!std::isfinite(E_leak))
        throw std::invalid_argument("model: E_leak must be finite");
    for (const auto& g : gates)
        if (!g.mu || !g.tau)
            throw std::invalid_argument("gate '" + g.name +
                                        "': mu and tau functions are required");
    for (const auto& c : currents)
        c.validate(gates.size());
}

bool CompactSet::contains(const State& z, double eps_unit, double eps_v) const {
    if (z.x.size() != m)
        return false;
    if (z.s < -eps_unit || z.s > 1.0 + eps_unit)
        return false;
    for (double xj : z.x)
        if (xj < -eps_unit || xj > 1.0 + eps_unit)
            return false;
    return z.v >= E_min - eps_v && z.v <= E_max + eps_v;
}

CompactSet compact_set(const NeuronModel& model, const SynapseParams& synapse) {
    CompactSet box;
    box.m = model.n_gates();
    box.E_min = std::min(model.E_leak, synapse.E_s);
    box.E_max = std::max(model.E_leak, synapse.E_s);
    for (const auto& c : model.currents) {
        box.E_min = std::min(box.E_min, c.E);
        box.E_max = std::max(box.E_max, c.E);
    }
    if (!(box.E_min < box.E_max))
        throw std::invalid_argument("compact_set: E_min must be < E_max");
    return box;
}

double steady_state_activation(const GateSpec& gate, double v) {
    return gate.mu(v);
}

double activation(const IonicCurrentSpec& current, const std::vector<double>& x) {
    double phi = 1.0;
    for (std::size_t j = 0; j < current.exponents.size(); ++j)
        phi *= pow_int(x[j], current.exponents[j]);
    return phi;
}

double ionic_current(const IonicCurrentSpec& current, const std::vector<double>& x,
                     double v) {
    return current.g_max * activation(current, x) * (v - current.E);
}

State vector_field(const NeuronModel& model, const SynapseParams& synapse,
                   const State& z) {
    const std::size_t m = model.n_gates();
    std::vector<double> zp, dzp(m + 2);
    pack(z, zp);
    vector_field_packed(model, synapse, zp.data(), dzp.data());
    return unpack(dzp.data(), m);
}

void vector_field_packed(const NeuronModel& model, const SynapseParams& synapse,
                         const double* z, double* dz) {
    const std::size_t m = model.n_gates();
    const double s = z[0];
    const double* x = z + 1;
    const double v = z[m + 1];

    dz[0] = -s / synapse.tau_s;
    for (std::size_t j = 0; j < m; ++j) {
        const auto& g = model.gates[j];
        dz[1 + j] = (g.mu(v) - x[j]) / g.tau(v);
    }

    double i_total = model.g_leak * (v - model.E_leak);
    for (const auto& c : model.currents) {
        double phi = 1.0;
        for (std::size_t j = 0; j < m; ++j)
            phi *= pow_int(x[j], c.exponents[j]);
        i_total += c.g_max * phi * (v - c.E);
    }
    i_total += synapse.g_s * s * (v - synapse.E_s);
    dz[m + 1] = -i_total / model.C;
}

DrivingPoint driving_point(const NeuronModel& model, const SynapseParams& synapse,
                           const std::vector<double>& x, double s) {
    DrivingPoint dp;
    double weighted = model.g_leak * model.E_leak;
    dp.G = model.g_leak;
    for (const auto& c : model.currents) {
        double g = c.g_max * activation(c, x);
        dp.G += g;
        weighted += g * c.E;
    }
    dp.G += synapse.g_s * s;
    weighted += synapse.g_s * s * synapse.E_s;
    dp.E = weighted / dp.G;
    return dp;
}

double calibrate_leak(NeuronModel& model) {
    if (!(model.g_leak > 0.0))
        throw std::invalid_argument("calibrate_leak: g_leak must be > 0");
    std::vector<double> x_star(model.n_gates());
    for (std::size_t j = 0; j < x_star.size(); ++j)
        x_star[j] = model.gates[j].mu(0.0);
    double residual = 0.0;
    for (const auto& c : model.currents)
        residual += c.g_max * activation(c, x_star) * c.E;
    model.E_leak = -residual / model.g_leak;
    return model.E_leak;
}

State compute_equilibrium(const NeuronModel& model, const SynapseParams& synapse) {
    State z;
    z.s = 0.0;
    z.v = 0.0;
    z.x.resize(model.n_gates());
    for (std::size_t j = 0; j < z.x.size(); ++j)
        z.x[j] = model.gates[j].mu(0.0);

    State f = vector_field(model, synapse, z);
    double norm2 = f.s * f.s + f.v * f.v;
    for (double fx : f.x)
        norm2 += fx * fx;
    if (std::sqrt(norm2) > 1e-12)
        throw std::runtime_error(
            "compute_equilibrium: ||F(z*)|| = " + std::to_string(std::sqrt(norm2)) +
            " exceeds 1e-12; model is not leak-calibrated or parameters are inconsistent");
    return z;
}

State sample_uniform_state(const NeuronModel& model, const CompactSet& box,
                           rng_stream& rng) {
    State z;
    z.s = rng.uniform01();
    z.x.resize(model.n_gates());
    for (double& xj : z.x)
        xj = rng.uniform01();
    z.v = rng.uniform(box.E_min, box.E_max);
    return z;
}

void pack(const State& z, std::vector<double>& out) {
    out.resize(z.x.size() + 2);
    out[0] = z.s;
    std::copy(z.x.begin(), z.x.end(), out.begin() + 1);
    out[z.x.size() + 1] = z.v;
}

State unpack(const double* z, std::size_t m) {
    State out;
    out.s = z[0];
    out.x.assign(z + 1, z + 1 + m);
    out.v = z[m + 1];
    return out;
}

} // namespace spikelock
