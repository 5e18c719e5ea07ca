#pragma once

// Reference values used across the test suite, computed with
// arbitrary-precision arithmetic (40 significant digits) and rounded to
// double. Where a quantity has a closed form it is written next to the
// number.

namespace oracles {

// rate functions at v = 0 (shifted convention, rest at 0 mV)
inline constexpr double alpha_m0 = 0.22356372458463003;   // 2.5 / (e^2.5 - 1)
inline constexpr double alpha_h0 = 0.07;                  // exact
inline constexpr double beta_h0 = 0.047425873177566781;   // 1 / (e^3 + 1)
inline constexpr double alpha_n0 = 0.058197670686932642;  // 0.1 / (e - 1)

// gate steady states and time constants at v = 0
inline constexpr double mu_m0 = 0.052932485257249575;
inline constexpr double tau_m0 = 0.23676687868568761;
inline constexpr double mu_h0 = 0.59612075350846024;
inline constexpr double tau_h0 = 8.5160107644065749;
inline constexpr double mu_n0 = 0.31767691406069739;
inline constexpr double tau_n0 = 5.4585846875144209;

// leak reversal that balances the ionic currents at (v=0, s=0, x=mu(0)):
// E_leak = -(g_Na mu_m^3 mu_h E_Na + g_K mu_n^4 E_K) / g_leak
inline constexpr double E_leak = 10.598920969391679;

// periodic synapse regime, alpha = 0.8, tau_s = 5, T = 15
inline constexpr double fig3_a_T = 0.0099574136735727886;      // 0.2 e^{-3}
inline constexpr double fig3_s_star = 0.80804604877494813;     // 0.8/(1 - a_T)
inline constexpr double fig3_gamma_T = 0.30729586082894002;    // -ln(a_T)/15

// periodic synapse regime, alpha = 0.5, tau_s = 2, T = 1
inline constexpr double toy_a_T = 0.30326532985631671;         // 0.5 e^{-1/2}
inline constexpr double toy_s_star = 0.71763329919679193;
inline constexpr double toy_gamma_T = 1.1931471805599453;      // 0.5 + ln 2

// high-rate deviation, alpha = 1, tau_s = 4, T = 0.01:
// sup |s - 1| on the periodic orbit = 1 - e^{-T/tau_s}
inline constexpr double dense_deviation = 0.0024968776025398760;

// single calibrated current with constant unit activation, E = 100,
// g = 0.1, g_leak = 0.3: balance gives E_leak = -100/3
inline constexpr double toy_E_leak = -100.0 / 3.0;

// spectral abscissa of the rest-state Jacobian, packed (s, m, h, n, v),
// with the default synapse (tau_s = 5, g_s = 0.3, E_s = 65)
inline constexpr double hh_abscissa = -0.12065949784247396;

// smallest eigenvalue of the Lyapunov solution P for Q = I at the same
// operating point
inline constexpr double hh_P_min_eig = 0.096726448979425843;

} // namespace oracles
