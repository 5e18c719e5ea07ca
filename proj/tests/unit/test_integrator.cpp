#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spikelock/hh.hpp"
#include "spikelock/integrate.hpp"
#include "spikelock/rng.hpp"
#include "spikelock/synapse.hpp"

using namespace spikelock;

namespace {

// bare leak model: no gates, no ionic currents, v relaxes to E_leak
NeuronModel leak_model(double g_leak = 0.3, double E_leak = 0.0) {
    NeuronModel model;
    model.C = 1.0;
    model.g_leak = g_leak;
    model.E_leak = E_leak;
    return model;
}

// closed-form flow-and-jump solution for the decoupled synapse, mirroring
// the integrator's right-continuous convention at impulse instants
double closed_form_s(double t, double s0, const std::vector<double>& imps,
                     double alpha, double tau_s) {
    double s = s0;
    double t_prev = 0.0;
    for (double ti : imps) {
        if (ti > t + 1e-9) break;
        s = apply_impulse(decay(s, ti - t_prev, tau_s), alpha);
        t_prev = ti;
    }
    return decay(s, std::max(0.0, t - t_prev), tau_s);
}

double max_abs_row_diff(const Trajectory& traj, std::size_t i,
                        const std::vector<double>& ref) {
    double worst = 0.0;
    for (std::size_t j = 0; j < traj.dim; ++j)
        worst = std::max(worst, std::abs(traj.row(i)[j] - ref[j]));
    return worst;
}

} // namespace

TEST_CASE("equilibrium initial state stays put") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const State zstar = compute_equilibrium(model, syn);
    const SolverSettings settings;

    const Trajectory traj = integrate(model, syn, zstar, ImpulseTrain{}, 50.0, settings);
    std::vector<double> ref;
    pack(zstar, ref);

    double worst = 0.0;
    for (std::size_t i = 0; i < traj.n_samples(); ++i)
        worst = std::max(worst, max_abs_row_diff(traj, i, ref));
    CHECK(worst <= 10.0 * settings.abs_tol);
}

TEST_CASE("decoupled synapse matches the flow-and-jump closed form") {
    const NeuronModel model = leak_model();
    SynapseParams syn;
    syn.alpha = 0.7;
    syn.tau_s = 5.0;
    syn.g_s = 0.0; // keep s out of the voltage equation

    State z0;
    z0.s = 0.3;
    z0.v = 5.0;

    const std::vector<double> imps = {1.0, 2.5, 4.0037, 7.25};
    const SolverSettings settings;
    const Trajectory traj =
        integrate(model, syn, z0, ImpulseTrain{std::vector<double>(imps)}, 10.0, settings);

    REQUIRE(traj.dim == 2);
    REQUIRE(traj.n_samples() == 1001);
    REQUIRE(traj.impulse_records.size() == 4);

    double worst_s = 0.0;
    double worst_v = 0.0;
    for (std::size_t i = 0; i < traj.n_samples(); ++i) {
        const double t = traj.times[i];
        const double s_ref = closed_form_s(t, z0.s, imps, syn.alpha, syn.tau_s);
        worst_s = std::max(worst_s, std::abs(traj.row(i)[0] - s_ref));
        // v rides along independently: dv/dt = -0.3 v
        worst_v = std::max(worst_v, std::abs(traj.voltage(i) - 5.0 * std::exp(-0.3 * t)));
    }
    CHECK(worst_s <= 1e-9);
    CHECK(worst_v <= 1e-7);

    for (std::size_t l = 0; l < traj.impulse_records.size(); ++l) {
        const auto& rec = traj.impulse_records[l];
        CHECK(rec.t == imps[l]);
        CHECK(rec.s_plus == apply_impulse(rec.s_minus, syn.alpha));
    }

    // the grid sample riding on the impulse at t = 1 holds the right limit
    CHECK(traj.times[100] == 1.0);
    CHECK(traj.row(100)[0] == doctest::Approx(traj.impulse_records[0].s_plus)
                                  .epsilon(1e-12));
    CHECK(traj.row(100)[0] > traj.row(99)[0]);
}

TEST_CASE("identical initial pair never separates") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    rng_stream rng(17);
    const State z0 = sample_uniform_state(model, box, rng);

    const ImpulseTrain train = periodic_train(15.0, 15.0, 5);
    const SolverSettings settings;
    const PairResult pr = integrate_pair(model, syn, z0, z0, train, 100.0, settings);

    REQUIRE(pr.divergence.size() == pr.a.n_samples());
    for (double d : pr.divergence)
        CHECK(d <= 10.0 * settings.abs_tol);
}

TEST_CASE("pair divergence starts at the exact initial distance") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    rng_stream rng(18);
    const State za = sample_uniform_state(model, box, rng);
    const State zb = sample_uniform_state(model, box, rng);

    const PairResult pr =
        integrate_pair(model, syn, za, zb, ImpulseTrain{}, 1.0, SolverSettings{});

    std::vector<double> pa, pb;
    pack(za, pa);
    pack(zb, pb);
    double d2 = 0.0;
    for (std::size_t j = 0; j < pa.size(); ++j) d2 += (pa[j] - pb[j]) * (pa[j] - pb[j]);
    CHECK(pr.divergence[0] == std::sqrt(d2));
}

TEST_CASE("unforced pairs contract over long horizons") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    rng_stream rng(19);
    const State za = sample_uniform_state(model, box, rng);
    const State zb = sample_uniform_state(model, box, rng);

    const PairResult pr =
        integrate_pair(model, syn, za, zb, ImpulseTrain{}, 500.0, SolverSettings{});
    CHECK(pr.divergence.back() <= 1e-3 * pr.divergence.front());
}

TEST_CASE("halving the tolerances barely moves the solution") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const State zstar = compute_equilibrium(model, syn);
    const ImpulseTrain train = periodic_train(15.0, 15.0, 6);

    SolverSettings coarse;
    SolverSettings fine;
    fine.rel_tol = coarse.rel_tol / 2;
    fine.abs_tol = coarse.abs_tol / 2;

    const Trajectory a = integrate(model, syn, zstar, train, 100.0, coarse);
    const Trajectory b = integrate(model, syn, zstar, train, 100.0, fine);
    REQUIRE(a.n_samples() == b.n_samples());

    double worst = 0.0;
    for (std::size_t j = 0; j < a.dim; ++j)
        worst = std::max(worst, std::abs(a.row(a.n_samples() - 1)[j] -
                                         b.row(b.n_samples() - 1)[j]));
    // coarse relative tolerance scaled by the ~100 mV state magnitude
    CHECK(worst <= 1e-6);
}

TEST_CASE("fixed-step rk4 agrees with the adaptive solver") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const State zstar = compute_equilibrium(model, syn);
    const ImpulseTrain train = periodic_train(15.0, 15.0, 3);

    SolverSettings adaptive;
    SolverSettings fixed;
    fixed.method = SolverMethod::rk4;
    fixed.max_step = 0.002;

    const Trajectory a = integrate(model, syn, zstar, train, 50.0, adaptive);
    const Trajectory b = integrate(model, syn, zstar, train, 50.0, fixed);
    REQUIRE(a.n_samples() == b.n_samples());

    double worst = 0.0;
    for (std::size_t j = 0; j < a.dim; ++j)
        worst = std::max(worst, std::abs(a.row(a.n_samples() - 1)[j] -
                                         b.row(b.n_samples() - 1)[j]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("integration is deterministic") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    rng_stream rng(20);
    const State z0 = sample_uniform_state(model, box, rng);
    const ImpulseTrain train = periodic_train(15.0, 15.0, 5);

    const Trajectory a = integrate(model, syn, z0, train, 100.0, SolverSettings{});
    const Trajectory b = integrate(model, syn, z0, train, 100.0, SolverSettings{});
    CHECK(a.times == b.times);
    CHECK(a.data == b.data);
    CHECK(a.n_steps == b.n_steps);
    CHECK(a.n_rhs == b.n_rhs);
}

TEST_CASE("trajectories stay in the compact box") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const CompactSet box = compact_set(model, syn);
    const ImpulseTrain train = periodic_train_until(15.0, 15.0, 100.0);

    for (std::uint64_t i = 0; i < 5; ++i) {
        rng_stream rng(31, i);
        const State z0 = sample_uniform_state(model, box, rng);
        const Trajectory traj = integrate(model, syn, z0, train, 100.0, SolverSettings{});
        for (std::size_t k = 0; k < traj.n_samples(); ++k)
            CHECK(box.contains(traj.state(k), 1e-6, 1e-3));
    }
}

TEST_CASE("integration failures carry a diagnostic") {
    // a gate whose steady state is undefined above v = -1 poisons the field
    NeuronModel model = leak_model(0.3, 10.0);
    GateSpec bad;
    bad.name = "w";
    bad.mu = [](double v) { return std::sqrt(-1.0 - v); };
    bad.tau = [](double) { return 1.0; };
    bad.dmu = [](double) { return 0.0; };
    bad.dtau = [](double) { return 0.0; };
    model.gates.push_back(bad);

    State z0;
    z0.x = {0.5};
    z0.v = 5.0;
    CHECK_THROWS_AS(
        integrate(model, SynapseParams{}, z0, ImpulseTrain{}, 10.0, SolverSettings{}),
        IntegrationError);
}

TEST_CASE("precondition violations are rejected up front") {
    const NeuronModel model = hh::model();
    const SynapseParams syn;
    const State zstar = compute_equilibrium(model, syn);

    // train reaching past the horizon
    CHECK_THROWS_AS(integrate(model, syn, zstar, ImpulseTrain({5.0, 60.0}), 50.0,
                              SolverSettings{}),
                    std::invalid_argument);

    // wrong gate count
    State bad = zstar;
    bad.x.pop_back();
    CHECK_THROWS_AS(integrate(model, syn, bad, ImpulseTrain{}, 50.0, SolverSettings{}),
                    std::invalid_argument);

    // unusable solver settings
    SolverSettings s;
    s.output_dt = 0.0;
    CHECK_THROWS_AS(integrate(model, syn, zstar, ImpulseTrain{}, 50.0, s),
                    std::invalid_argument);
    s = SolverSettings{};
    s.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(model, syn, zstar, ImpulseTrain{}, 50.0, s),
                    std::invalid_argument);
}

TEST_CASE("uniform grid construction") {
    const NeuronModel model = leak_model();
    SynapseParams syn;
    syn.g_s = 0.0;
    State z0;
    z0.s = 1.0;
    z0.v = 0.0;

    SolverSettings settings;
    settings.output_dt = 0.25;
    const Trajectory traj = integrate(model, syn, z0, ImpulseTrain{}, 2.0, settings);
    REQUIRE(traj.n_samples() == 9);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(traj.times[i] == doctest::Approx(0.25 * static_cast<double>(i)).epsilon(1e-12));
}
