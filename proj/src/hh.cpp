#include "spikelock/hh.hpp"

#include <cmath>

namespace spikelock::hh {

double x_over_expm1(double w) {
    // first-order series inside the guard band around the removable
    // singularity at w = 0
    if (std::fabs(w) < 1e-7)
        return 1.0 - w / 2.0;
    return w / std::expm1(w);
}

double d_x_over_expm1(double w) {
    // series -1/2 + w/6 + O(w^3); the direct quotient loses half the digits
    // to cancellation near 0, so the guard band is wider here
    if (std::fabs(w) < 1e-4)
        return -0.5 + w / 6.0;
    double em = std::expm1(w);
    return (em - w * std::exp(w)) / (em * em);
}

double alpha_m(double v) { return x_over_expm1((25.0 - v) / 10.0); }
double beta_m(double v) { return 4.0 * std::exp(-v / 18.0); }
double alpha_h(double v) { return 0.07 * std::exp(-v / 20.0); }
double beta_h(double v) { return 1.0 / (std::exp((30.0 - v) / 10.0) + 1.0); }
double alpha_n(double v) { return 0.1 * x_over_expm1((10.0 - v) / 10.0); }
double beta_n(double v) { return 0.125 * std::exp(-v / 80.0); }

namespace {

double d_alpha_m(double v) { return -0.1 * d_x_over_expm1((25.0 - v) / 10.0); }
double d_beta_m(double v) { return -beta_m(v) / 18.0; }
double d_alpha_h(double v) { return -alpha_h(v) / 20.0; }
double d_beta_h(double v) {
    double q = std::exp((30.0 - v) / 10.0);
    return q / (10.0 * (q + 1.0) * (q + 1.0));
}
double d_alpha_n(double v) { return -0.01 * d_x_over_expm1((10.0 - v) / 10.0); }
double d_beta_n(double v) { return -beta_n(v) / 80.0; }

using rate_fn = double (*)(double);

GateSpec make_gate(const char* name, rate_fn a, rate_fn b, rate_fn da, rate_fn db) {
    GateSpec g;
    g.name = name;
    g.mu = [a, b](double v) { return a(v) / (a(v) + b(v)); };
    g.tau = [a, b](double v) { return 1.0 / (a(v) + b(v)); };
    // mu = a/(a+b):  mu' = (a' b - a b') / (a+b)^2
    g.dmu = [a, b, da, db](double v) {
        double av = a(v), bv = b(v), sum = av + bv;
        return (da(v) * bv - av * db(v)) / (sum * sum);
    };
    // tau = 1/(a+b):  tau' = -(a' + b') / (a+b)^2
    g.dtau = [a, b, da, db](double v) {
        double sum = a(v) + b(v);
        return -(da(v) + db(v)) / (sum * sum);
    };
    return g;
}

} // namespace

NeuronModel model() { return model(1.0, 120.0, 36.0, 0.3); }

NeuronModel model(double C, double g_na, double g_k, double g_leak,
                  double E_na, double E_k) {
    NeuronModel m;
    m.C = C;
    m.g_leak = g_leak;
    m.gates.push_back(make_gate("m", alpha_m, beta_m, d_alpha_m, d_beta_m));
    m.gates.push_back(make_gate("h", alpha_h, beta_h, d_alpha_h, d_beta_h));
    m.gates.push_back(make_gate("n", alpha_n, beta_n, d_alpha_n, d_beta_n));
    m.currents.push_back({"Na", g_na, E_na, {3, 1, 0}});
    m.currents.push_back({"K", g_k, E_k, {0, 0, 4}});
    calibrate_leak(m);
    m.validate();
    return m;
}

} // namespace spikelock::hh
