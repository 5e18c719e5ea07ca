#include "spikelock/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "spikelock/rng.hpp"

namespace spikelock {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// d(phi_k)/d(x_j) for the monomial activation; exact at x_j = 0 as well
// (the e-1 power is only formed when e >= 1).
double activation_partial(const IonicCurrentSpec& cur, const std::vector<double>& x,
                          std::size_t j) {
    const int e = cur.exponents[j];
    if (e == 0)
        return 0.0;
    double p = static_cast<double>(e);
    for (std::size_t i = 0; i < x.size(); ++i) {
        int q = cur.exponents[i];
        if (i == j)
            q -= 1;
        for (int r = 0; r < q; ++r)
            p *= x[i];
    }
    return p;
}

} // namespace

Eigen::MatrixXd jacobian(const NeuronModel& model, const SynapseParams& synapse,
                         const State& z) {
    model.validate();
    synapse.validate();
    const std::size_t m = model.n_gates();
    if (z.x.size() != m)
        throw std::invalid_argument("jacobian: state has " + std::to_string(z.x.size()) +
                                    " gates, model expects " + std::to_string(m));

    const std::size_t n = m + 2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const std::size_t iv = n - 1;

    A(0, 0) = -1.0 / synapse.tau_s;

    for (std::size_t j = 0; j < m; ++j) {
        const GateSpec& g = model.gates[j];
        const double tau = g.tau(z.v);
        const double dtau = g.dtau(z.v);
        const double mu = g.mu(z.v);
        const double dmu = g.dmu(z.v);
        A(1 + j, 1 + j) = -1.0 / tau;
        A(1 + j, iv) = dmu / tau - (mu - z.x[j]) * dtau / (tau * tau);
    }

    // conductance row: dv/dt = -(1/C) [g_leak (v-E_leak) + sum g phi (v-E) + g_s s (v-E_s)]
    double g_total = model.g_leak + synapse.g_s * z.s;
    for (const IonicCurrentSpec& cur : model.currents) {
        g_total += cur.g_max * activation(cur, z.x);
        for (std::size_t j = 0; j < m; ++j)
            A(iv, 1 + j) -=
                cur.g_max * activation_partial(cur, z.x, j) * (z.v - cur.E) / model.C;
    }
    A(iv, 0) = -synapse.g_s * (z.v - synapse.E_s) / model.C;
    A(iv, iv) = -g_total / model.C;
    return A;
}

Eigen::MatrixXd jacobian_fd(const NeuronModel& model, const SynapseParams& synapse,
                            const State& z, double step) {
    const std::size_t m = model.n_gates();
    const std::size_t n = m + 2;
    std::vector<double> y(n), fp(n), fm(n);
    pack(z, y);
    Eigen::MatrixXd A(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> yp = y, ym = y;
        yp[j] += step;
        ym[j] -= step;
        vector_field_packed(model, synapse, yp.data(), fp.data());
        vector_field_packed(model, synapse, ym.data(), fm.data());
        for (std::size_t i = 0; i < n; ++i)
            A(i, j) = (fp[i] - fm[i]) / (2.0 * step);
    }
    return A;
}

Linearization linearize(const NeuronModel& model, const SynapseParams& synapse,
                        const State& z) {
    Linearization lin;
    lin.A = jacobian(model, synapse, z);
    Eigen::EigenSolver<Eigen::MatrixXd> es(lin.A, false);
    lin.spectral_abscissa = es.eigenvalues().real().maxCoeff();
    return lin;
}

Eigen::MatrixXd lyapunov_certificate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("lyapunov_certificate: dimension mismatch");

    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    if (!(abscissa < 0.0))
        throw std::runtime_error(
            "lyapunov_certificate: A is not Hurwitz (spectral abscissa " +
            std::to_string(abscissa) + ")");

    // vec(A^T P + P A) = (I (x) A^T + A^T (x) I) vec(P); n is tiny, so the
    // n^2-dimensional dense solve is the simplest correct tool.
    const Eigen::Index nn = n * n;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nn, nn);
    const Eigen::MatrixXd At = A.transpose();
    for (Eigen::Index bi = 0; bi < n; ++bi)
        M.block(bi * n, bi * n, n, n) += At;  // I (x) A^T
    for (Eigen::Index bi = 0; bi < n; ++bi)
        for (Eigen::Index bj = 0; bj < n; ++bj)
            for (Eigen::Index d = 0; d < n; ++d)
                M(bi * n + d, bj * n + d) += At(bi, bj);  // A^T (x) I

    Eigen::VectorXd q(nn);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            q(j * n + i) = -Q(i, j);

    const Eigen::VectorXd p = M.fullPivLu().solve(q);
    Eigen::MatrixXd P(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            P(i, j) = p(j * n + i);
    P = ((P + P.transpose()) / 2.0).eval();

    const double residual = (A.transpose() * P + P * A + Q).norm() / Q.norm();
    if (!(residual <= 1e-8))
        throw std::runtime_error("lyapunov_certificate: residual " +
                                 std::to_string(residual) + " exceeds 1e-8");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sa(P);
    if (!(sa.eigenvalues().minCoeff() > 0.0))
        throw std::runtime_error("lyapunov_certificate: P is not positive definite");
    return P;
}

void attach_certificate(Linearization& lin, const Eigen::MatrixXd& Q) {
    Eigen::MatrixXd rhs = Q;
    if (rhs.size() == 0)
        rhs = Eigen::MatrixXd::Identity(lin.A.rows(), lin.A.cols());
    lin.P = lyapunov_certificate(lin.A, rhs);
    lin.Q = rhs;
}

ContractionEstimate fit_contraction(const std::vector<double>& times,
                                    const std::vector<std::vector<double>>& d_curves,
                                    const std::vector<double>& d0, double fit_t_min,
                                    double fit_t_max) {
    if (d_curves.empty() || d_curves.size() != d0.size())
        throw std::invalid_argument("fit_contraction: need matching curves and d0");
    for (const auto& c : d_curves)
        if (c.size() != times.size())
            throw std::invalid_argument("fit_contraction: curve length mismatch");
    if (!(fit_t_min < fit_t_max))
        throw std::invalid_argument("fit_contraction: empty fit window");

    const std::size_t n_t = times.size();
    const std::size_t n_p = d_curves.size();

    // sup over pairs of the normalized separation at each sample
    std::vector<double> ratio(n_t, 0.0);
    for (std::size_t p = 0; p < n_p; ++p) {
        if (!(d0[p] > 0.0))
            throw std::invalid_argument("fit_contraction: pair with zero initial separation");
        for (std::size_t i = 0; i < n_t; ++i)
            ratio[i] = std::max(ratio[i], d_curves[p][i] / d0[p]);
    }

    // least squares on ln(ratio) within the window; fully converged samples
    // (ratio rounded to 0) carry no slope information and are left out
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n_t; ++i) {
        if (times[i] < fit_t_min || times[i] > fit_t_max || ratio[i] <= 0.0)
            continue;
        const double lx = times[i];
        const double ly = std::log(ratio[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt < 2)
        throw std::runtime_error("fit_contraction: fewer than two usable samples in the fit window");
    const double denom = cnt * sxx - sx * sx;
    const double slope = (cnt * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / cnt;

    ContractionEstimate est;
    est.lambda = -slope;
    est.fit_t_min = fit_t_min;
    est.fit_t_max = fit_t_max;
    est.sample_pairs = static_cast<int>(n_p);

    double rss = 0.0;
    for (std::size_t i = 0; i < n_t; ++i) {
        if (times[i] < fit_t_min || times[i] > fit_t_max || ratio[i] <= 0.0)
            continue;
        const double e = std::log(ratio[i]) - (intercept + slope * times[i]);
        rss += e * e;
    }
    est.residual = std::sqrt(rss / cnt);

    // overshoot constant chosen so that k e^{-lambda t} majorizes every
    // sample of every pair; the t = 0 sample pins k >= 1
    double max_log = 0.0;
    for (std::size_t p = 0; p < n_p; ++p)
        for (std::size_t i = 0; i < n_t; ++i) {
            const double r = d_curves[p][i] / d0[p];
            if (r > 0.0)
                max_log = std::max(max_log, std::log(r) + est.lambda * times[i]);
        }
    est.k = std::exp(max_log);
    return est;
}

namespace {

double pair_distance(const Trajectory& a, const Trajectory& b, std::size_t i,
                     const Eigen::MatrixXd* metric) {
    const double* ra = a.row(i);
    const double* rb = b.row(i);
    if (metric == nullptr) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.dim; ++j) {
            const double d = ra[j] - rb[j];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    Eigen::VectorXd delta(a.dim);
    for (std::size_t j = 0; j < a.dim; ++j)
        delta(j) = ra[j] - rb[j];
    return std::sqrt(delta.dot(*metric * delta));
}

} // namespace

ContractionEstimate estimate_contraction(const NeuronModel& model,
                                         const SynapseParams& synapse, int n_pairs,
                                         double t_end, std::uint64_t seed,
                                         const SolverSettings& settings,
                                         const Eigen::MatrixXd* metric) {
    if (n_pairs < 10)
        throw std::invalid_argument("estimate_contraction: need at least 10 pairs, got " +
                                    std::to_string(n_pairs));
    const CompactSet box = compact_set(model, synapse);
    const ImpulseTrain empty;

    std::vector<double> times;
    std::vector<std::vector<double>> curves;
    std::vector<double> d0;
    curves.reserve(n_pairs);
    d0.reserve(n_pairs);

    for (int p = 0; p < n_pairs; ++p) {
        rng_stream rng(seed, static_cast<std::uint64_t>(p));
        const State za = sample_uniform_state(model, box, rng);
        const State zb = sample_uniform_state(model, box, rng);
        const Trajectory ta = integrate(model, synapse, za, empty, t_end, settings);
        const Trajectory tb = integrate(model, synapse, zb, empty, t_end, settings);
        if (times.empty())
            times = ta.times;

        std::vector<double> d(ta.times.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = pair_distance(ta, tb, i, metric);
        if (!(d[0] > 0.0))
            throw std::runtime_error("estimate_contraction: drew a coincident pair");

        const double floor_half =
            *std::min_element(d.begin(), d.end()) / d[0];
        if (!(floor_half < 0.5))
            throw std::runtime_error(
                "estimate_contraction: pair " + std::to_string(p) +
                " never decays below half its initial separation; local exponential "
                "stability is in doubt for these parameters");

        d0.push_back(d[0]);
        curves.push_back(std::move(d));
    }

    return fit_contraction(times, curves, d0, t_end / 4.0, t_end);
}

namespace {

DwellCriterion make_criterion(const ContractionEstimate& est, double input_rate) {
    DwellCriterion c;
    c.input_rate = input_rate;
    const double lnk = std::log(std::max(est.k, 1.0));
    if (est.lambda > 0.0 && lnk == 0.0) {
        c.threshold_rate = inf;
        c.min_period = 0.0;
        c.satisfied = true;
    } else if (est.lambda > 0.0) {
        c.threshold_rate = est.lambda / lnk;
        c.min_period = lnk / est.lambda;
        c.satisfied = input_rate < c.threshold_rate;
    } else {
        // no decay rate at all: the sufficient condition can never hold
        c.threshold_rate = 0.0;
        c.min_period = inf;
        c.satisfied = false;
    }
    return c;
}

} // namespace

DwellCriterion dwell_criterion(const ContractionEstimate& est, double period_T) {
    if (!(period_T > 0.0))
        throw std::invalid_argument("dwell_criterion: period must be positive");
    return make_criterion(est, 1.0 / period_T);
}

DwellCriterion dwell_criterion(const ContractionEstimate& est, const ImpulseTrain& train) {
    const auto tau_a = min_tau_a(train, 1);
    if (!tau_a.has_value()) {
        // at most one impulse in every window: no sustained rate to bound
        DwellCriterion c = make_criterion(est, 0.0);
        if (est.lambda > 0.0)
            c.satisfied = true;
        return c;
    }
    return make_criterion(est, 1.0 / *tau_a);
}

DivergenceStudy forced_divergence_study(const NeuronModel& model,
                                        const SynapseParams& synapse,
                                        const ImpulseTrain& train, int n_pairs,
                                        double t_end, std::uint64_t seed,
                                        const SolverSettings& settings,
                                        double spike_scale) {
    if (n_pairs < 1)
        throw std::invalid_argument("forced_divergence_study: need at least one pair");
    const CompactSet box = compact_set(model, synapse);
    std::vector<std::pair<State, State>> pairs;
    pairs.reserve(n_pairs);
    for (int p = 0; p < n_pairs; ++p) {
        rng_stream rng(seed, static_cast<std::uint64_t>(p));
        State za = sample_uniform_state(model, box, rng);
        State zb = sample_uniform_state(model, box, rng);
        pairs.emplace_back(std::move(za), std::move(zb));
    }
    return forced_divergence_study(model, synapse, train, pairs, t_end, settings,
                                   spike_scale);
}

DivergenceStudy forced_divergence_study(const NeuronModel& model,
                                        const SynapseParams& synapse,
                                        const ImpulseTrain& train,
                                        const std::vector<std::pair<State, State>>& pairs,
                                        double t_end, const SolverSettings& settings,
                                        double spike_scale) {
    if (pairs.empty())
        throw std::invalid_argument("forced_divergence_study: need at least one pair");
    if (train.empty())
        throw std::invalid_argument("forced_divergence_study: train must be nonempty");

    DivergenceStudy study;
    for (const auto& [za, zb] : pairs) {
        const Trajectory ta = integrate(model, synapse, za, train, t_end, settings);
        const Trajectory tb = integrate(model, synapse, zb, train, t_end, settings);
        if (study.times.empty())
            study.times = ta.times;

        std::vector<double> d(ta.times.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = pair_distance(ta, tb, i, nullptr);
        study.d0.push_back(d[0]);
        study.d.push_back(std::move(d));
    }

    const double trail_start = 0.75 * t_end;
    bool all_decayed = true;
    bool any_large = false;
    for (std::size_t p = 0; p < study.d.size(); ++p) {
        const auto& d = study.d[p];
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < study.times.size(); ++i)
            if (study.times[i] >= trail_start) {
                acc += d[i];
                ++cnt;
            }
        const double trail = cnt > 0 ? acc / cnt : 0.0;
        study.trailing_mean.push_back(trail);
        if (!(d.back() <= 0.01 * study.d0[p]))
            all_decayed = false;
        if (trail > 0.1 * spike_scale)
            any_large = true;
    }

    if (all_decayed)
        study.verdict = DivergenceVerdict::contracting;
    else if (any_large)
        study.verdict = DivergenceVerdict::non_contracting;
    else
        study.verdict = DivergenceVerdict::inconclusive;
    return study;
}

const char* to_string(DivergenceVerdict v) {
    switch (v) {
    case DivergenceVerdict::contracting:
        return "contracting";
    case DivergenceVerdict::non_contracting:
        return "non-contracting";
    case DivergenceVerdict::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

} // namespace spikelock
