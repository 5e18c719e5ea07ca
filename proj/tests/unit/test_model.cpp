#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spikelock/hh.hpp"
#include "spikelock/model.hpp"
#include "spikelock/rng.hpp"
#include "spikelock/synapse.hpp"

#include "oracles.hpp"

using namespace spikelock;

namespace {

// one gate with constant kinetics, for harness models
GateSpec constant_gate(const std::string& name, double mu, double tau) {
    GateSpec g;
    g.name = name;
    g.mu = [mu](double) { return mu; };
    g.tau = [tau](double) { return tau; };
    g.dmu = [](double) { return 0.0; };
    g.dtau = [](double) { return 0.0; };
    return g;
}

double packed_norm(const State& z) {
    std::vector<double> p;
    pack(z, p);
    double acc = 0.0;
    for (double c : p) acc += c * c;
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("rate functions at the rest potential") {
    CHECK(hh::alpha_m(25.0) == 1.0); // removable singularity, exact by the guard
    CHECK(hh::alpha_m(0.0) == doctest::Approx(oracles::alpha_m0).epsilon(1e-15));
    CHECK(hh::beta_m(0.0) == 4.0);
    CHECK(hh::alpha_h(0.0) == doctest::Approx(oracles::alpha_h0).epsilon(1e-15));
    CHECK(hh::beta_h(0.0) == doctest::Approx(oracles::beta_h0).epsilon(1e-15));
    CHECK(hh::alpha_n(0.0) == doctest::Approx(oracles::alpha_n0).epsilon(1e-15));
    CHECK(hh::beta_n(0.0) == 0.125);

    // the removable-singularity kernel is continuous through w = 0
    CHECK(hh::x_over_expm1(1e-9) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(hh::x_over_expm1(-1e-9) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(hh::x_over_expm1(1.0) == doctest::Approx(1.0 / std::expm1(1.0)).epsilon(1e-15));
}

TEST_CASE("gate steady states and time constants at v = 0") {
    const NeuronModel model = hh::model();
    REQUIRE(model.n_gates() == 3);

    const double mu0[3] = {oracles::mu_m0, oracles::mu_h0, oracles::mu_n0};
    const double tau0[3] = {oracles::tau_m0, oracles::tau_h0, oracles::tau_n0};
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(model.gates[j].mu(0.0) == doctest::Approx(mu0[j]).epsilon(1e-14));
        CHECK(model.gates[j].tau(0.0) == doctest::Approx(tau0[j]).epsilon(1e-14));
    }

    // steady states stay in (0, 1) across the physiological range
    for (double v = -12.0; v <= 115.0; v += 1.27) {
        for (const auto& g : model.gates) {
            const double m = steady_state_activation(g, v);
            CHECK(m > 0.0);
            CHECK(m < 1.0);
            CHECK(g.tau(v) > 0.0);
        }
    }
}

TEST_CASE("leak calibration balances the rest state") {
    const NeuronModel model = hh::model();
    CHECK(model.E_leak == doctest::Approx(oracles::E_leak).epsilon(1e-14));

    // overriding conductances recalibrates; the rest stays at v = 0
    const NeuronModel scaled = hh::model(1.0, 100.0, 30.0, 0.25);
    const State zs = compute_equilibrium(scaled, SynapseParams{});
    CHECK(zs.v == 0.0);
    CHECK(packed_norm(vector_field(scaled, SynapseParams{}, zs)) <= 1e-12);
}

TEST_CASE("calibration of a single constant current") {
    NeuronModel model;
    model.C = 1.0;
    model.g_leak = 0.3;
    model.gates.push_back(constant_gate("w", 0.5, 1.0));
    IonicCurrentSpec cur;
    cur.name = "flat";
    cur.g_max = 0.1;
    cur.E = 100.0;
    cur.exponents = {0}; // activation identically 1
    model.currents.push_back(cur);

    const double e = calibrate_leak(model);
    CHECK(e == doctest::Approx(oracles::toy_E_leak).epsilon(1e-15));
    CHECK(model.E_leak == e);
}

TEST_CASE("ionic current identities") {
    const NeuronModel model = hh::model();
    const auto& na = model.currents[0];
    const auto& k = model.currents[1];

    // zero driving force, zero current
    std::vector<double> x = {0.3, 0.7, 0.4};
    CHECK(ionic_current(na, x, na.E) == 0.0);
    CHECK(ionic_current(k, x, k.E) == 0.0);

    // fully open sodium at v = 0: 120 * 1 * (0 - 115)
    std::vector<double> open = {1.0, 1.0, 0.3};
    CHECK(ionic_current(na, open, 0.0) == -13800.0);

    // closed gates, no current at any voltage
    std::vector<double> closed = {0.0, 0.0, 0.0};
    CHECK(ionic_current(na, closed, 40.0) == 0.0);
    CHECK(ionic_current(k, closed, 40.0) == 0.0);
}

TEST_CASE("activation is monotone in each gate") {
    const NeuronModel model = hh::model();
    rng_stream rng(99);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        for (const auto& cur : model.currents) {
            const double base = activation(cur, x);
            CHECK(base >= 0.0);
            CHECK(base <= 1.0);
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (cur.exponents[j] == 0) continue;
                std::vector<double> up = x;
                up[j] = std::min(1.0, x[j] + 0.1);
                CHECK(activation(cur, up) >= base);
            }
        }
    }
}

TEST_CASE("equilibrium of the calibrated model") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const State z = compute_equilibrium(model, syn);

    CHECK(z.s == 0.0);
    CHECK(z.v == 0.0);
    CHECK(z.x[0] == doctest::Approx(oracles::mu_m0).epsilon(1e-14));
    CHECK(z.x[1] == doctest::Approx(oracles::mu_h0).epsilon(1e-14));
    CHECK(z.x[2] == doctest::Approx(oracles::mu_n0).epsilon(1e-14));
    CHECK(packed_norm(vector_field(model, syn, z)) <= 1e-12);
}

TEST_CASE("voltage field points inward at the box faces") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    CHECK(box.E_min == -12.0);
    CHECK(box.E_max == 115.0);

    rng_stream rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        State z;
        z.s = rng.uniform01();
        z.x = {rng.uniform01(), rng.uniform01(), rng.uniform01()};

        z.v = box.E_max;
        CHECK(vector_field(model, syn, z).v <= 0.0);
        z.v = box.E_min;
        CHECK(vector_field(model, syn, z).v >= 0.0);

        // gate flux at the unit-interval faces
        State lo = z;
        lo.v = rng.uniform(box.E_min, box.E_max);
        lo.x = {0.0, 0.0, 0.0};
        const State flo = vector_field(model, syn, lo);
        for (double f : flo.x) CHECK(f >= 0.0);
        State hi = lo;
        hi.x = {1.0, 1.0, 1.0};
        const State fhi = vector_field(model, syn, hi);
        for (double f : fhi.x) CHECK(f <= 0.0);
    }
}

TEST_CASE("driving-point reduction reproduces the voltage equation") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;

    // closed system: conductance and reversal collapse to the leak
    const DrivingPoint rest = driving_point(model, syn, {0.0, 0.0, 0.0}, 0.0);
    CHECK(rest.G == doctest::Approx(model.g_leak).epsilon(1e-15));
    CHECK(rest.E == doctest::Approx(model.E_leak).epsilon(1e-14));

    const CompactSet box = compact_set(model, syn);
    rng_stream rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        const State z = sample_uniform_state(model, box, rng);
        const DrivingPoint dp = driving_point(model, syn, z.x, z.s);
        CHECK(dp.G >= model.g_leak);
        CHECK(dp.E >= box.E_min);
        CHECK(dp.E <= box.E_max);

        // C v' = -G (v - E) must agree with the full field
        const double vdot = vector_field(model, syn, z).v;
        CHECK(model.C * vdot ==
              doctest::Approx(-dp.G * (z.v - dp.E)).epsilon(1e-12));
    }
}

TEST_CASE("uniform state sampling stays in the box") {
    const NeuronModel model = hh::model();
    const CompactSet box = compact_set(model, SynapseParams{});
    rng_stream rng(4);
    for (int rep = 0; rep < 500; ++rep) {
        const State z = sample_uniform_state(model, box, rng);
        CHECK(box.contains(z));
    }
    // identical seeds replay the identical draw
    rng_stream a(11, 2), b(11, 2);
    const State za = sample_uniform_state(model, box, a);
    const State zb = sample_uniform_state(model, box, b);
    CHECK(za.v == zb.v);
    CHECK(za.s == zb.s);
    CHECK(za.x == zb.x);
}

TEST_CASE("pack and unpack round trip") {
    State z;
    z.s = 0.25;
    z.x = {0.1, 0.9, 0.5};
    z.v = -3.5;
    std::vector<double> p;
    pack(z, p);
    REQUIRE(p.size() == 5);
    CHECK(p[0] == 0.25);
    CHECK(p[4] == -3.5);
    const State back = unpack(p.data(), 3);
    CHECK(back.s == z.s);
    CHECK(back.x == z.x);
    CHECK(back.v == z.v);
}

TEST_CASE("model validation rejects inconsistent parameters") {
    NeuronModel model = hh::model();
    model.C = 0.0;
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);

    model = hh::model();
    model.g_leak = -0.1;
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);

    model = hh::model();
    model.currents[0].exponents = {3, 1}; // wrong gate count
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);

    model = hh::model();
    model.currents[0].g_max = -1.0;
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}
