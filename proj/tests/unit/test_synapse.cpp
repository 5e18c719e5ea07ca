#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spikelock/rng.hpp"
#include "spikelock/synapse.hpp"

#include "oracles.hpp"

using namespace spikelock;

TEST_CASE("impulse jump map") {
    CHECK(apply_impulse(0.0, 0.8) == 0.8);
    CHECK(apply_impulse(1.0, 0.3) == 1.0); // saturated input stays saturated
    CHECK(apply_impulse(1.0, 1.0) == 1.0);
    CHECK(apply_impulse(0.5, 1.0) == 1.0);

    // [0, 1] is invariant under the jump for any admissible alpha
    rng_stream rng(1);
    for (int rep = 0; rep < 1000; ++rep) {
        const double s = rng.uniform01();
        const double a = std::nextafter(rng.uniform01(), 1.0); // keep a > 0
        const double s2 = apply_impulse(s, a);
        CHECK(s2 >= s);
        CHECK(s2 >= 0.0);
        CHECK(s2 <= 1.0);
    }
}

TEST_CASE("free decay") {
    CHECK(decay(1.0, 5.0, 5.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(decay(0.7, 0.0, 5.0) == 0.7);
    CHECK(decay(0.0, 12.0, 5.0) == 0.0);

    // semigroup property: decaying in two legs equals one leg of the sum
    rng_stream rng(2);
    for (int rep = 0; rep < 500; ++rep) {
        const double s = rng.uniform01();
        const double a = rng.uniform(0.0, 10.0);
        const double b = rng.uniform(0.0, 10.0);
        const double tau = rng.uniform(0.5, 8.0);
        CHECK(decay(decay(s, a, tau), b, tau) ==
              doctest::Approx(decay(s, a + b, tau)).epsilon(1e-14));
    }
}

TEST_CASE("periodic regime closed form") {
    SynapseParams syn;
    syn.alpha = 0.8;
    syn.tau_s = 5.0;
    PeriodicAnalysis pa = periodic_analysis(syn, 15.0);
    CHECK(pa.a_T == doctest::Approx(oracles::fig3_a_T).epsilon(1e-14));
    CHECK(pa.s_T_star == doctest::Approx(oracles::fig3_s_star).epsilon(1e-14));
    CHECK(pa.gamma_T == doctest::Approx(oracles::fig3_gamma_T).epsilon(1e-14));
    CHECK(pa.bound == doctest::Approx(15.0 / (0.8 * 5.0)).epsilon(1e-15));

    syn.alpha = 0.5;
    syn.tau_s = 2.0;
    pa = periodic_analysis(syn, 1.0);
    CHECK(pa.a_T == doctest::Approx(oracles::toy_a_T).epsilon(1e-14));
    CHECK(pa.s_T_star == doctest::Approx(oracles::toy_s_star).epsilon(1e-14));
    CHECK(pa.gamma_T == doctest::Approx(oracles::toy_gamma_T).epsilon(1e-14));

    // alpha = 1 resets s exactly: the affine map degenerates
    syn.alpha = 1.0;
    syn.tau_s = 4.0;
    pa = periodic_analysis(syn, 0.5);
    CHECK(pa.a_T == 0.0);
    CHECK(pa.s_T_star == 1.0);
    CHECK(std::isinf(pa.gamma_T));
}

TEST_CASE("periodic fixed point attracts the jump-decay iteration") {
    rng_stream rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        SynapseParams syn;
        syn.alpha = rng.uniform(0.05, 1.0);
        syn.tau_s = rng.uniform(0.5, 10.0);
        const double T = rng.uniform(0.05, 30.0);
        const PeriodicAnalysis pa = periodic_analysis(syn, T);

        double s = 0.0;
        for (int l = 0; l < 200; ++l)
            s = apply_impulse(decay(s, T, syn.tau_s), syn.alpha);
        CHECK(std::abs(s - pa.s_T_star) <= 1e-12);

        // the uniform high-rate bound covers the whole periodic cycle: the
        // right limit is s_T* and the cycle minimum is its decayed value
        const double cycle_min = decay(pa.s_T_star, T, syn.tau_s);
        CHECK(1.0 - cycle_min <= pa.bound + 1e-15);
    }
}

TEST_CASE("fixed point decreases with the period") {
    SynapseParams syn;
    syn.alpha = 0.8;
    syn.tau_s = 5.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double T = 0.01; T < 60.0; T *= 1.7) {
        const double s = periodic_analysis(syn, T).s_T_star;
        CHECK(s < prev);
        CHECK(s >= 0.8); // never below the bare jump height
        CHECK(s <= 1.0);
        prev = s;
    }
}

TEST_CASE("train constructors") {
    const ImpulseTrain t = periodic_train(15.0, 15.0, 3);
    REQUIRE(t.size() == 3);
    CHECK(t.times()[0] == 15.0);
    CHECK(t.times()[1] == 30.0);
    CHECK(t.times()[2] == 45.0);

    const ImpulseTrain u = periodic_train_until(15.0, 15.0, 500.0);
    REQUIRE(u.size() == 33);
    CHECK(u.times().back() == 495.0);

    CHECK(ImpulseTrain{}.empty());
    CHECK_THROWS_AS(ImpulseTrain({2.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ImpulseTrain({1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(periodic_train(0.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("random trains respect the dead time") {
    const ImpulseTrain t = random_dead_time_train(0.02, 20.0, 7, 2000.0);
    REQUIRE(t.size() > 5);
    const auto& times = t.times();
    for (std::size_t i = 1; i < times.size(); ++i)
        CHECK(times[i] - times[i - 1] >= 20.0);
    CHECK(times.back() < 2000.0);
    CHECK(times.front() >= 0.0);

    // seeded reproducibility, and sensitivity to the seed
    const ImpulseTrain t2 = random_dead_time_train(0.02, 20.0, 7, 2000.0);
    CHECK(t.times() == t2.times());
    const ImpulseTrain t3 = random_dead_time_train(0.02, 20.0, 8, 2000.0);
    CHECK(t.times() != t3.times());
}

TEST_CASE("average dwell time on hand-built trains") {
    // periodic trains meet N0 = 1, tau_a = T with equality on every window
    const ImpulseTrain periodic = periodic_train(15.0, 15.0, 20);
    CHECK(check_average_dwell_time(periodic, 1, 15.0).satisfied);
    CHECK_FALSE(check_average_dwell_time(periodic, 1, 15.0 * (1 + 1e-9)).satisfied);

    // a burst of three breaks N0 = 0 at tau_a = 5; the maximal violation
    // window spans exactly the burst
    const ImpulseTrain burst({0.0, 0.1, 0.2, 10.0});
    const DwellTimeCertificate cert = check_average_dwell_time(burst, 0, 5.0);
    CHECK_FALSE(cert.satisfied);
    CHECK(cert.witness_t1 == 0.0);
    CHECK(cert.witness_t2 == 0.2);

    CHECK(check_average_dwell_time(ImpulseTrain{}, 0, 1.0).satisfied);
    CHECK_THROWS_AS(check_average_dwell_time(burst, -1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(check_average_dwell_time(burst, 0, 0.0), std::invalid_argument);
}

TEST_CASE("tightest certifiable dwell time") {
    const ImpulseTrain periodic = periodic_train(15.0, 15.0, 20);
    auto tau = min_tau_a(periodic, 1);
    REQUIRE(tau.has_value());
    CHECK(*tau == 15.0);

    // one impulse can never exceed N0 = 1: every tau_a works
    CHECK_FALSE(min_tau_a(ImpulseTrain({3.0}), 1).has_value());
    CHECK_FALSE(min_tau_a(ImpulseTrain{}, 1).has_value());

    // four unit-spaced impulses against N0 = 2: the whole-train window
    // [0, 3] holds 4 impulses, giving 3/(4-2)
    const ImpulseTrain quad({0.0, 1.0, 2.0, 3.0});
    tau = min_tau_a(quad, 2);
    REQUIRE(tau.has_value());
    CHECK(*tau == doctest::Approx(1.5).epsilon(1e-15));

    CHECK_THROWS_AS(min_tau_a(quad, 0), std::invalid_argument);
}

TEST_CASE("min_tau_a is the exact certification boundary") {
    rng_stream rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform01() * 10);
        std::vector<double> times;
        for (int i = 0; i < n; ++i) times.push_back(rng.uniform(0.0, 20.0));
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        const ImpulseTrain train(std::move(times));
        const int N0 = 1 + static_cast<int>(rng.uniform01() * 2);

        const auto tau = min_tau_a(train, N0);
        if (!tau) {
            // nothing exceeds N0, so even an absurdly long window works
            CHECK(check_average_dwell_time(train, N0, 1e6).satisfied);
            continue;
        }
        // the returned value is the boundary: a hair below certifies, a hair
        // above fails (the exact boundary is a 1-ulp coin flip in general)
        CHECK(check_average_dwell_time(train, N0, *tau * (1 - 1e-9)).satisfied);
        CHECK_FALSE(check_average_dwell_time(train, N0, *tau * (1 + 1e-9)).satisfied);
    }
}

namespace {

// Independent window scan: evaluates the dwell inequality directly on a
// dense endpoint grid plus perturbed impulse-endpoint windows, instead of
// reasoning about where the binding window can be.
bool scan_windows(const std::vector<double>& impulses, int N0, double tau_a) {
    if (impulses.empty()) return true;
    std::vector<double> endpoints;
    const double lo = impulses.front() - 0.5;
    const double hi = impulses.back() + 0.5;
    for (double a = lo; a <= hi; a += 0.01) endpoints.push_back(a);
    for (double t : impulses)
        for (double d : {-1e-9, 0.0, 1e-9}) endpoints.push_back(t + d);
    std::sort(endpoints.begin(), endpoints.end());

    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const double a = endpoints[i];
        auto first = std::lower_bound(impulses.begin(), impulses.end(), a);
        for (std::size_t j = i; j < endpoints.size(); ++j) {
            const double b = endpoints[j];
            auto last = std::upper_bound(first, impulses.end(), b);
            const double count = static_cast<double>(last - first);
            if (count > N0 + (b - a) / tau_a + 1e-12) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("dwell certificate agrees with a blind window scan") {
    rng_stream rng(6);
    for (int rep = 0; rep < 8; ++rep) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 11);
        std::vector<double> times;
        for (int i = 0; i < n; ++i) times.push_back(rng.uniform(0.0, 20.0));
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());

        const int N0 = static_cast<int>(rng.uniform01() * 3);
        const double tau_a = rng.uniform(0.2, 8.0);
        const ImpulseTrain train{std::vector<double>(times)};
        const DwellTimeCertificate cert = check_average_dwell_time(train, N0, tau_a);
        CHECK(cert.satisfied == scan_windows(times, N0, tau_a));
        if (!cert.satisfied) {
            // the reported witness violates the inequality on its own
            auto first = std::lower_bound(times.begin(), times.end(), cert.witness_t1);
            auto last = std::upper_bound(times.begin(), times.end(), cert.witness_t2);
            const double count = static_cast<double>(last - first);
            CHECK(count > N0 + (cert.witness_t2 - cert.witness_t1) / tau_a);
        }
    }
}

TEST_CASE("synapse parameter validation") {
    SynapseParams syn;
    syn.alpha = 0.0;
    CHECK_THROWS_AS(syn.validate(), std::invalid_argument);
    syn.alpha = 1.5;
    CHECK_THROWS_AS(syn.validate(), std::invalid_argument);
    syn = SynapseParams{};
    syn.tau_s = 0.0;
    CHECK_THROWS_AS(syn.validate(), std::invalid_argument);
    syn = SynapseParams{};
    syn.g_s = -1.0;
    CHECK_THROWS_AS(syn.validate(), std::invalid_argument);
    syn = SynapseParams{};
    CHECK_NOTHROW(syn.validate());
    syn.g_s = 0.0; // disabled synapse is legal
    CHECK_NOTHROW(syn.validate());
}
