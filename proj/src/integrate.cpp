#include "spikelock/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikelock {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0,
                 a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0,
                 a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0,
                 a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0, a71 = 35.0 / 384.0,
                 a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;

// embedded 4th-order error coefficients
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// dense-output coefficients of the quartic interpolant
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

// step controller constants (Lund stabilization)
constexpr double safe = 0.9, facl = 0.2, facr = 10.0, ctrl_beta = 0.04;

constexpr std::size_t max_total_steps = 100'000'000;

// Interpolant over one accepted step [t0, t0 + h]:
//   u(th) = c1 + th (c2 + (1-th)(c3 + th (c4 + (1-th) c5)))
// with th = (t - t0)/h. The dopri5 dense output fills all five coefficient
// vectors; the cubic Hermite used with rk4 has c5 = 0.
struct DenseStep {
    double t0 = 0.0, h = 0.0;
    std::vector<double> c1, c2, c3, c4, c5;

    void resize(std::size_t n) {
        c1.resize(n);
        c2.resize(n);
        c3.resize(n);
        c4.resize(n);
        c5.resize(n);
    }

    void eval(double t, double* out) const {
        double th = (t - t0) / h;
        th = std::clamp(th, 0.0, 1.0);
        const double th1 = 1.0 - th;
        for (std::size_t i = 0; i < c1.size(); ++i)
            out[i] = c1[i] +
                     th * (c2[i] + th1 * (c3[i] + th * (c4[i] + th1 * c5[i])));
    }
};

struct StepCounters {
    std::size_t n_steps = 0, n_rejected = 0, n_rhs = 0;
};

class Dopri5 {
public:
    Dopri5(const NeuronModel& model, const SynapseParams& synapse,
           const SolverSettings& settings, std::size_t dim)
        : model_(model), synapse_(synapse), set_(settings), dim_(dim) {
        k1_.resize(dim);
        k2_.resize(dim);
        k3_.resize(dim);
        k4_.resize(dim);
        k5_.resize(dim);
        k6_.resize(dim);
        k7_.resize(dim);
        y_tmp_.resize(dim);
        y_new_.resize(dim);
        h_ = 0.0;
        facold_ = 1e-4;
    }

    // Invalidates the cached FSAL derivative; call after a jump changes y.
    void restart() { have_k1_ = false; }

    // One accepted adaptive step from (t, y), never stepping past t_limit.
    // On return y and t are advanced and dense describes the step taken.
    void step(double& t, std::vector<double>& y, double t_limit,
              DenseStep& dense, StepCounters& counters) {
        if (!have_k1_) {
            rhs(t, y.data(), k1_.data(), counters);
            have_k1_ = true;
        }
        if (h_ == 0.0)
            h_ = initial_step(t, y, counters);

        bool rejected = false;
        while (true) {
            if (0.1 * h_ <= std::abs(t) * std::numeric_limits<double>::epsilon())
                throw IntegrationError("integrate: step size underflow", t);

            double h = std::min(h_, set_.max_step);
            bool last = false;
            if (t + 1.01 * h >= t_limit) {
                h = t_limit - t;
                last = true;
            }

            // stages; k1 comes from FSAL
            for (std::size_t i = 0; i < dim_; ++i)
                y_tmp_[i] = y[i] + h * a21 * k1_[i];
            rhs(t + c2 * h, y_tmp_.data(), k2_.data(), counters);

            for (std::size_t i = 0; i < dim_; ++i)
                y_tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            rhs(t + c3 * h, y_tmp_.data(), k3_.data(), counters);

            for (std::size_t i = 0; i < dim_; ++i)
                y_tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            rhs(t + c4 * h, y_tmp_.data(), k4_.data(), counters);

            for (std::size_t i = 0; i < dim_; ++i)
                y_tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] +
                                        a53 * k3_[i] + a54 * k4_[i]);
            rhs(t + c5 * h, y_tmp_.data(), k5_.data(), counters);

            for (std::size_t i = 0; i < dim_; ++i)
                y_tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] +
                                        a64 * k4_[i] + a65 * k5_[i]);
            rhs(t + h, y_tmp_.data(), k6_.data(), counters);

            for (std::size_t i = 0; i < dim_; ++i)
                y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] +
                                        a75 * k5_[i] + a76 * k6_[i]);
            rhs(t + h, y_new_.data(), k7_.data(), counters);

            // scaled RMS error of the embedded 4th-order solution
            double err = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
                double ee = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] +
                                 e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
                double sc = set_.abs_tol +
                            set_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
                err += (ee / sc) * (ee / sc);
            }
            err = std::sqrt(err / static_cast<double>(dim_));

            double fac11 = std::pow(err, 0.2 - ctrl_beta * 0.75);
            if (err > 1.0) {
                h_ = h / std::min(1.0 / facl, fac11 / safe);
                rejected = true;
                ++counters.n_rejected;
                continue;
            }

            // accepted: build the dense-output interpolant
            dense.t0 = t;
            dense.h = h;
            dense.resize(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                double ydiff = y_new_[i] - y[i];
                double bspl = h * k1_[i] - ydiff;
                dense.c1[i] = y[i];
                dense.c2[i] = ydiff;
                dense.c3[i] = bspl;
                dense.c4[i] = ydiff - h * k7_[i] - bspl;
                dense.c5[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] +
                                   d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
            }

            double fac = fac11 / std::pow(facold_, ctrl_beta);
            fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
            double h_next = h / fac;
            if (rejected)
                h_next = std::min(h_next, h);
            facold_ = std::max(err, 1e-4);

            t = last ? t_limit : t + h;
            y = y_new_;
            k1_.swap(k7_);  // FSAL
            h_ = h_next;
            ++counters.n_steps;

            for (double v : y)
                if (!std::isfinite(v))
                    throw IntegrationError("integrate: state became non-finite", t);
            return;
        }
    }

private:
    void rhs(double t, const double* z, double* dz, StepCounters& counters) {
        (void)t;  // autonomous between impulses
        vector_field_packed(model_, synapse_, z, dz);
        ++counters.n_rhs;
    }

    // classical two-evaluation starting-step heuristic
    double initial_step(double t, const std::vector<double>& y,
                        StepCounters& counters) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double sc = set_.abs_tol + set_.rel_tol * std::abs(y[i]);
            dnf += (k1_[i] / sc) * (k1_[i] / sc);
            dny += (y[i] / sc) * (y[i] / sc);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6
                                                  : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, set_.max_step);

        for (std::size_t i = 0; i < dim_; ++i)
            y_tmp_[i] = y[i] + h * k1_[i];
        rhs(t + h, y_tmp_.data(), k2_.data(), counters);

        double der2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double sc = set_.abs_tol + set_.rel_tol * std::abs(y[i]);
            der2 += ((k2_[i] - k1_[i]) / sc) * ((k2_[i] - k1_[i]) / sc);
        }
        der2 = std::sqrt(der2) / h;

        double der12 = std::max(der2, std::sqrt(dnf));
        double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                                   : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * h, h1, set_.max_step});
    }

    const NeuronModel& model_;
    const SynapseParams& synapse_;
    const SolverSettings& set_;
    std::size_t dim_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, y_tmp_, y_new_;
    double h_, facold_;
    bool have_k1_ = false;
};

// Fixed-step classical RK4 with cubic Hermite dense output; the step equals
// max_step, shortened to land exactly on segment boundaries.
class Rk4 {
public:
    Rk4(const NeuronModel& model, const SynapseParams& synapse,
        const SolverSettings& settings, std::size_t dim)
        : model_(model), synapse_(synapse), set_(settings), dim_(dim) {
        k1_.resize(dim);
        k2_.resize(dim);
        k3_.resize(dim);
        k4_.resize(dim);
        f_end_.resize(dim);
        y_tmp_.resize(dim);
        y_new_.resize(dim);
    }

    void restart() { have_k1_ = false; }

    void step(double& t, std::vector<double>& y, double t_limit,
              DenseStep& dense, StepCounters& counters) {
        if (!have_k1_) {
            rhs(y.data(), k1_.data(), counters);
            have_k1_ = true;
        }
        double h = set_.max_step;
        bool last = false;
        if (t + 1.01 * h >= t_limit) {
            h = t_limit - t;
            last = true;
        }
        if (h <= std::abs(t) * std::numeric_limits<double>::epsilon())
            throw IntegrationError("integrate: step size underflow", t);

        for (std::size_t i = 0; i < dim_; ++i)
            y_tmp_[i] = y[i] + 0.5 * h * k1_[i];
        rhs(y_tmp_.data(), k2_.data(), counters);
        for (std::size_t i = 0; i < dim_; ++i)
            y_tmp_[i] = y[i] + 0.5 * h * k2_[i];
        rhs(y_tmp_.data(), k3_.data(), counters);
        for (std::size_t i = 0; i < dim_; ++i)
            y_tmp_[i] = y[i] + h * k3_[i];
        rhs(y_tmp_.data(), k4_.data(), counters);
        for (std::size_t i = 0; i < dim_; ++i)
            y_new_[i] = y[i] + (h / 6.0) * (k1_[i] + 2.0 * k2_[i] +
                                            2.0 * k3_[i] + k4_[i]);
        rhs(y_new_.data(), f_end_.data(), counters);

        dense.t0 = t;
        dense.h = h;
        dense.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            double ydiff = y_new_[i] - y[i];
            double bspl = h * k1_[i] - ydiff;
            dense.c1[i] = y[i];
            dense.c2[i] = ydiff;
            dense.c3[i] = bspl;
            dense.c4[i] = ydiff - h * f_end_[i] - bspl;
            dense.c5[i] = 0.0;
        }

        t = last ? t_limit : t + h;
        y = y_new_;
        k1_.swap(f_end_);  // derivative at the new point seeds the next step
        ++counters.n_steps;

        for (double v : y)
            if (!std::isfinite(v))
                throw IntegrationError("integrate: state became non-finite", t);
    }

private:
    void rhs(const double* z, double* dz, StepCounters& counters) {
        vector_field_packed(model_, synapse_, z, dz);
        ++counters.n_rhs;
    }

    const NeuronModel& model_;
    const SynapseParams& synapse_;
    const SolverSettings& set_;
    std::size_t dim_;
    std::vector<double> k1_, k2_, k3_, k4_, f_end_, y_tmp_, y_new_;
    bool have_k1_ = false;
};

// grid times and impulse instants that differ by less than this are treated
// as coincident (absorbs accumulated rounding in i * output_dt)
constexpr double time_eps = 1e-9;

template <typename Stepper>
Trajectory run(const NeuronModel& model, const SynapseParams& synapse,
               const State& z0, const ImpulseTrain& train, double t_end,
               const SolverSettings& settings) {
    const std::size_t m = model.n_gates();
    const std::size_t dim = m + 2;

    Trajectory traj;
    traj.dim = dim;
    const auto n_out =
        static_cast<std::size_t>(std::floor(t_end / settings.output_dt + time_eps)) + 1;
    traj.times.reserve(n_out);
    traj.data.reserve(n_out * dim);
    traj.impulse_records.reserve(train.size());

    std::vector<double> y;
    pack(z0, y);

    StepCounters counters;
    Stepper stepper(model, synapse, settings, dim);
    DenseStep dense;
    std::vector<double> sample(dim);

    std::size_t next_grid = 0;
    auto grid_time = [&](std::size_t i) {
        return static_cast<double>(i) * settings.output_dt;
    };
    auto emit = [&](double t_g, const double* values) {
        traj.times.push_back(t_g);
        traj.data.insert(traj.data.end(), values, values + dim);
        ++next_grid;
    };

    double t = 0.0;
    // t = 0 sample; if an impulse sits exactly at 0 the jump below replaces it
    if (next_grid < n_out && grid_time(0) <= time_eps)
        emit(grid_time(0), y.data());

    std::size_t next_imp = 0;
    const auto& imp = train.times();

    while (true) {
        // segment from t to the next impulse (or the horizon)
        bool to_impulse = next_imp < imp.size();
        double t_seg = to_impulse ? imp[next_imp] : t_end;

        while (t < t_seg - time_eps) {
            if (counters.n_steps > max_total_steps)
                throw IntegrationError("integrate: step budget exhausted", t);
            stepper.step(t, y, t_seg, dense, counters);
            // emit grid points covered by this step; those riding on the
            // segment-ending impulse wait for the jump (right continuity)
            while (next_grid < n_out) {
                double t_g = grid_time(next_grid);
                if (t_g > t + time_eps)
                    break;
                if (to_impulse && t_g >= t_seg - time_eps)
                    break;
                dense.eval(t_g, sample.data());
                emit(t_g, sample.data());
            }
        }

        if (!to_impulse)
            break;

        // exact jump at the impulse instant
        t = t_seg;
        ImpulseRecord rec;
        rec.t = t_seg;
        rec.s_minus = y[0];
        y[0] = apply_impulse(y[0], synapse.alpha);
        rec.s_plus = y[0];
        traj.impulse_records.push_back(rec);
        stepper.restart();
        ++next_imp;

        // grid samples coincident with the impulse take the post-jump state
        while (next_grid < n_out && grid_time(next_grid) <= t + time_eps)
            emit(grid_time(next_grid), y.data());
    }

    // horizon sample if the grid lands on t_end
    while (next_grid < n_out && grid_time(next_grid) <= t_end + time_eps)
        emit(grid_time(next_grid), y.data());

    traj.n_steps = counters.n_steps;
    traj.n_rejected = counters.n_rejected;
    traj.n_rhs = counters.n_rhs;
    return traj;
}

} // namespace

void SolverSettings::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("solver: tolerances must be > 0");
    if (!(max_step > 0.0))
        throw std::invalid_argument("solver: max_step must be > 0");
    if (!(output_dt > 0.0))
        throw std::invalid_argument("solver: output_dt must be > 0");
}

std::vector<double> Trajectory::voltage_trace() const {
    std::vector<double> v(n_samples());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = voltage(i);
    return v;
}

Trajectory integrate(const NeuronModel& model, const SynapseParams& synapse,
                     const State& z0, const ImpulseTrain& train, double t_end,
                     const SolverSettings& settings) {
    settings.validate();
    synapse.validate();
    model.validate();
    if (z0.x.size() != model.n_gates())
        throw std::invalid_argument("integrate: initial state has wrong gate count");
    if (!(t_end > 0.0))
        throw std::invalid_argument("integrate: t_end must be > 0");
    if (!train.empty() && train.times().back() >= t_end)
        throw std::invalid_argument("integrate: train times must lie strictly below t_end");

    if (settings.method == SolverMethod::dopri5)
        return run<Dopri5>(model, synapse, z0, train, t_end, settings);
    return run<Rk4>(model, synapse, z0, train, t_end, settings);
}

PairResult integrate_pair(const NeuronModel& model, const SynapseParams& synapse,
                          const State& z0_a, const State& z0_b,
                          const ImpulseTrain& train, double t_end,
                          const SolverSettings& settings) {
    PairResult out;
    out.a = integrate(model, synapse, z0_a, train, t_end, settings);
    out.b = integrate(model, synapse, z0_b, train, t_end, settings);
    out.divergence.resize(out.a.n_samples());
    for (std::size_t i = 0; i < out.divergence.size(); ++i) {
        const double* ra = out.a.row(i);
        const double* rb = out.b.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < out.a.dim; ++j)
            d2 += (ra[j] - rb[j]) * (ra[j] - rb[j]);
        out.divergence[i] = std::sqrt(d2);
    }
    return out;
}

} // namespace spikelock
