#pragma once

// Reference values computed independently at 40-digit precision (mpmath):
// normal quantiles via erfinv, feasible-set roots via the exact quadratic,
// value-function constants by direct closed-form evaluation, and the
// rederived R-coefficient cross-checked against adaptive quadrature.

namespace oracle {

// Phi^{-1} at assorted probabilities.
inline constexpr double kQuantile001 = -2.326347874040841100886;
inline constexpr double kQuantile0001 = -3.09023230616781354154;
inline constexpr double kQuantile0025 = -1.959963984540054235525;
inline constexpr double kQuantile005 = -1.644853626951472714864;
inline constexpr double kQuantile010 = -1.281551565544600466965;
inline constexpr double kQuantile025 = -0.6744897501960817432022;
inline constexpr double kQuantile040 = -0.2533471031357997987982;
inline constexpr double kQuantile1em10 = -6.361340902404056204695;
inline constexpr double kQuantile049 = -0.02506890825871103576236;

// Benchmark scenario 1: mu=.05 sigma=.3 alpha=.01 beta=.14 rho=.2 gamma=1
// T=10 x0=1 tau=1/260 p=.01 cap=.02.
inline constexpr double kN = 37.51123234544725916626;       // -Phi^{-1}(.01) sqrt(260)
inline constexpr double kM = 5.21;                          // alpha + cap/tau
inline constexpr double kTable1F1 = -0.02129722020370306661262;
inline constexpr double kTable1F2 = -0.1612589720844147977965;
inline constexpr double kTable1VarAtZero = 0.02015989433985621647414;
inline constexpr double kTable1QuantileAtMinusTenth = -0.01977313889420292438135;
inline constexpr double kTable1A = 0.005333333333333333333333;
inline constexpr double kTable1B = -0.01388888888888888888889;  // -1/72
inline constexpr double kTable1C = 0.009408;
inline constexpr double kTable1FStar01 = -0.3942995169082125603865;   // f*(0,1), paper mode
inline constexpr double kTable1VPaper01 = -0.1165126613626415106518;  // V(0,1), paper mode
inline constexpr double kTable1VRederived01 = -0.1462062909437187764327;
inline constexpr double kTable1VConstLower01 = -0.2120582339285498169833;  // clamp at f2
inline constexpr double kTable1D1 = 0.008935138989814846669369;
inline constexpr double kTable1E1 = 0.00964151407176712005451;
inline constexpr double kTable1D2 = 0.001937051395779260110175;
inline constexpr double kTable1E2 = 0.009615625157988408895113;
// Coefficients at remaining horizon s = 4.
inline constexpr double kTable1K2AtS4 = -0.00859045744141794984;
inline constexpr double kTable1K3AtS4 = -0.0170113965226585855;
inline constexpr double kTable1QAtS4 = -0.0381798108507464437;
inline constexpr double kTable1RAtS4 = -0.071640574249290755;
// Spot values away from the start state.
inline constexpr double kTable1VPaperAt37_081 = 0.0534422337951897153;
inline constexpr double kTable1VRedAt37_081 = 0.0421449371498100445;

// Benchmark scenario 2: same but mu=.8 sigma=.02 (N sigma < mu).
inline constexpr double kTable2F1 = 0.06428868066106625368697;
inline constexpr double kTable2F2 = -87.67179702677048650707;
inline constexpr double kTable2A = -1.11;
inline constexpr double kTable2B = -800.0;
inline constexpr double kTable2D1 = 0.06143094452885300294958;
inline constexpr double kTable2E1 = 0.009836828268062425212889;

}  // namespace oracle
