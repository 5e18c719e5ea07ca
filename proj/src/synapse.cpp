#include "spikelock/synapse.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spikelock/rng.hpp"

namespace spikelock {

void SynapseParams::validate() const {
    if (!(alpha > 0.0) || !(alpha <= 1.0))
        throw std::invalid_argument("synapse: alpha = " + std::to_string(alpha) +
                                    ": must be in (0, 1]");
    if (!(tau_s > 0.0))
        throw std::invalid_argument("synapse: tau_s = " + std::to_string(tau_s) +
                                    ": must be > 0");
    if (!(g_s >= 0.0))
        throw std::invalid_argument("synapse: g_s = " + std::to_string(g_s) +
                                    ": must be >= 0");
    if (!std::isfinite(E_s))
        throw std::invalid_argument("synapse: E_s must be finite");
}

double apply_impulse(double s, double alpha) {
    return (1.0 - alpha) * s + alpha;
}

double decay(double s, double dt, double tau_s) {
    return s * std::exp(-dt / tau_s);
}

PeriodicAnalysis periodic_analysis(const SynapseParams& params, double T) {
    params.validate();
    if (!(T > 0.0))
        throw std::invalid_argument("periodic_analysis: T must be > 0");
    PeriodicAnalysis out;
    out.a_T = (1.0 - params.alpha) * std::exp(-T / params.tau_s);
    out.s_T_star = params.alpha / (1.0 - out.a_T);
    out.gamma_T = out.a_T > 0.0 ? -std::log(out.a_T) / T
                                : std::numeric_limits<double>::infinity();
    out.bound = T / (params.alpha * params.tau_s);
    return out;
}

ImpulseTrain::ImpulseTrain(std::vector<double> times) : times_(std::move(times)) {
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]))
            throw std::invalid_argument("impulse train: time at index " +
                                        std::to_string(i) + " is not finite");
        if (i > 0 && !(times_[i] > times_[i - 1]))
            throw std::invalid_argument(
                "impulse train: times must be strictly increasing (index " +
                std::to_string(i) + ")");
    }
}

ImpulseTrain periodic_train(double T, double t_start, std::size_t count) {
    if (!(T > 0.0))
        throw std::invalid_argument("periodic_train: T must be > 0");
    std::vector<double> times(count);
    for (std::size_t l = 0; l < count; ++l)
        times[l] = t_start + static_cast<double>(l) * T;
    return ImpulseTrain(std::move(times));
}

ImpulseTrain periodic_train_until(double T, double t_start, double horizon) {
    if (!(T > 0.0))
        throw std::invalid_argument("periodic_train: T must be > 0");
    std::vector<double> times;
    for (std::size_t l = 0;; ++l) {
        double t = t_start + static_cast<double>(l) * T;
        if (t >= horizon)
            break;
        times.push_back(t);
    }
    return ImpulseTrain(std::move(times));
}

ImpulseTrain random_dead_time_train(double rate, double dead_time,
                                    std::uint64_t seed, double horizon) {
    rng_stream rng(seed);
    return random_dead_time_train(rate, dead_time, rng, horizon);
}

ImpulseTrain random_dead_time_train(double rate, double dead_time, rng_stream& rng,
                                    double horizon) {
    if (!(rate > 0.0))
        throw std::invalid_argument("random_dead_time_train: rate must be > 0");
    if (!(dead_time >= 0.0))
        throw std::invalid_argument("random_dead_time_train: dead_time must be >= 0");
    std::vector<double> times;
    double t = 0.0;
    double last_accepted = -std::numeric_limits<double>::infinity();
    while (true) {
        t += rng.exponential(rate);
        if (t >= horizon)
            break;
        if (t - last_accepted >= dead_time) {
            times.push_back(t);
            last_accepted = t;
        }
    }
    return ImpulseTrain(std::move(times));
}

DwellTimeCertificate check_average_dwell_time(const ImpulseTrain& train,
                                              int N0, double tau_a) {
    if (N0 < 0)
        throw std::invalid_argument("check_average_dwell_time: N0 must be >= 0");
    if (!(tau_a > 0.0))
        throw std::invalid_argument("check_average_dwell_time: tau_a must be > 0");

    DwellTimeCertificate cert;
    cert.N0 = N0;
    cert.tau_a = tau_a;
    cert.satisfied = true;

    const auto& t = train.times();
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i; j < t.size(); ++j) {
            double count = static_cast<double>(j - i + 1);
            double violation = count - (N0 + (t[j] - t[i]) / tau_a);
            if (violation > 0.0 && violation > worst) {
                worst = violation;
                cert.satisfied = false;
                cert.witness_t1 = t[i];
                cert.witness_t2 = t[j];
            }
        }
    }
    return cert;
}

std::optional<double> min_tau_a(const ImpulseTrain& train, int N0) {
    if (N0 < 1)
        throw std::invalid_argument("min_tau_a: N0 must be >= 1");
    const auto& t = train.times();
    std::optional<double> best;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            int count = static_cast<int>(j - i + 1);
            if (count <= N0)
                continue;
            double ratio = (t[j] - t[i]) / static_cast<double>(count - N0);
            if (!best || ratio < *best)
                best = ratio;
        }
    }
    return best;
}

} // namespace spikelock
