#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spikelock/integrate.hpp"
#include "spikelock/model.hpp"
#include "spikelock/synapse.hpp"

namespace spikelock {

// Linearization of the unforced field at a state, packed order (s, x, v).
// P and Q are empty until a Lyapunov certificate is attached.
struct Linearization {
    Eigen::MatrixXd A;
    double spectral_abscissa = 0.0;
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;
};

// Analytic Jacobian (monomial activations keep it closed-form); requires
// the gates' dmu/dtau derivatives.
Eigen::MatrixXd jacobian(const NeuronModel& model, const SynapseParams& synapse,
                         const State& z);

// central finite differences, for cross-checking the analytic form
Eigen::MatrixXd jacobian_fd(const NeuronModel& model, const SynapseParams& synapse,
                            const State& z, double step = 1e-6);

Linearization linearize(const NeuronModel& model, const SynapseParams& synapse,
                        const State& z);

// Solves for P with the given Q (identity when empty) and stores both in
// the linearization. Requires a negative spectral abscissa.
void attach_certificate(Linearization& lin, const Eigen::MatrixXd& Q = {});

// Solves A^T P + P A = -Q through the vectorized (Kronecker) linear system.
// Requires A Hurwitz; the result is symmetrized and checked: relative
// residual <= 1e-8 and P positive definite.
Eigen::MatrixXd lyapunov_certificate(const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& Q);

// Empirical incremental-stability constants: ||z_a(t) - z_b(t)|| <=
// k e^{-lambda t} ||z_a(0) - z_b(0)|| for every sampled pair, exact by
// construction of k.
struct ContractionEstimate {
    double k = 1.0;
    double lambda = 0.0;  // 1/ms
    double fit_t_min = 0.0;
    double fit_t_max = 0.0;
    int sample_pairs = 0;
    double residual = 0.0;  // RMS deviation of ln(sup ratio) from the fit line
};

// Least-squares fit of the decay rate on the sup-over-pairs ratio curve,
// plus the exactly-majorizing overshoot constant. Godunov zeros (ratio
// exactly 0 after full floating-point convergence) are excluded from the
// log fit; the bound holds trivially there.
ContractionEstimate fit_contraction(const std::vector<double>& times,
                                    const std::vector<std::vector<double>>& d_curves,
                                    const std::vector<double>& d0,
                                    double fit_t_min, double fit_t_max);

// Draws n_pairs random state pairs in the compact box, integrates both of
// each pair unforced, and fits (k, lambda) on the default window
// [t_end/4, t_end]. Fails if some pair never decays below half its initial
// separation (local exponential stability is then in doubt). The optional
// metric replaces the Euclidean norm by sqrt(delta^T M delta).
ContractionEstimate estimate_contraction(const NeuronModel& model,
                                         const SynapseParams& synapse, int n_pairs,
                                         double t_end, std::uint64_t seed,
                                         const SolverSettings& settings = {},
                                         const Eigen::MatrixXd* metric = nullptr);

// Sufficient dwell-time condition for contraction under impulses:
// lambda > ln(k) / tau_a, i.e. input rate below lambda / ln k. Failure of
// the criterion proves nothing (the condition is one-directional).
struct DwellCriterion {
    double threshold_rate = 0.0;  // lambda / ln k; +inf when k = 1
    double min_period = 0.0;      // ln k / lambda
    double input_rate = 0.0;      // 1/T, or 1/tau_a for explicit trains
    bool satisfied = false;
};

DwellCriterion dwell_criterion(const ContractionEstimate& est, double period_T);

// Uses the train's tightest certifiable average dwell time (min_tau_a with
// N0 = 1); a train that never exceeds the chatter bound satisfies the
// criterion at any rate.
DwellCriterion dwell_criterion(const ContractionEstimate& est,
                               const ImpulseTrain& train);

enum class DivergenceVerdict { contracting, non_contracting, inconclusive };

struct DivergenceStudy {
    std::vector<double> times;
    std::vector<std::vector<double>> d;  // per pair, mV-scale Euclidean norm
    std::vector<double> d0;
    std::vector<double> trailing_mean;  // mean of d over the last quarter
    DivergenceVerdict verdict = DivergenceVerdict::inconclusive;
};

// Pairs under a shared impulse train. Verdict "contracting" when every pair
// ends below 0.01 of its initial separation; "non-contracting" when some
// pair's trailing-window mean exceeds 0.1 x spike_scale; otherwise
// inconclusive (and reported as such).
DivergenceStudy forced_divergence_study(const NeuronModel& model,
                                        const SynapseParams& synapse,
                                        const ImpulseTrain& train, int n_pairs,
                                        double t_end, std::uint64_t seed,
                                        const SolverSettings& settings = {},
                                        double spike_scale = 100.0);

// Same study on caller-chosen initial pairs.
DivergenceStudy forced_divergence_study(const NeuronModel& model,
                                        const SynapseParams& synapse,
                                        const ImpulseTrain& train,
                                        const std::vector<std::pair<State, State>>& pairs,
                                        double t_end, const SolverSettings& settings = {},
                                        double spike_scale = 100.0);

const char* to_string(DivergenceVerdict v);

} // namespace spikelock
