#pragma once

#include "spikelock/model.hpp"

namespace spikelock::hh {

// Classical 1952 rate functions in the shifted convention (rest at 0 mV,
// E_Na = 115, E_K = -12). Removable singularities at v = 25 (alpha_m) and
// v = 10 (alpha_n) are evaluated by series inside a guard band.

// w / (exp(w) - 1), the removable-singularity kernel of alpha_m and alpha_n
double x_over_expm1(double w);
// its derivative, needed by the analytic Jacobian
double d_x_over_expm1(double w);

double alpha_m(double v);
double beta_m(double v);
double alpha_h(double v);
double beta_h(double v);
double alpha_n(double v);
double beta_n(double v);

// Calibrated Hodgkin-Huxley model: C = 1 uF/cm^2, g_Na = 120, g_K = 36,
// g_leak = 0.3 mS/cm^2, with E_leak set by calibrate_leak so the rest state
// is exactly (0, mu(0), 0). Gate order (m, h, n); currents Na = m^3 h, K = n^4.
NeuronModel model();

// Same with overridden conductances/capacitance, re-calibrated.
NeuronModel model(double C, double g_na, double g_k, double g_leak,
                  double E_na = 115.0, double E_k = -12.0);

} // namespace spikelock::hh
