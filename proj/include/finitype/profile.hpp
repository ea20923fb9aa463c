#pragma once

namespace finitype {

// S(x) = int_0^x b / int_0^1 b with b(x) = exp(-1/(x(1-x))); 0 for x <= 0, 1 for x >= 1.
// Evaluated by 8-panel 20-point Gauss-Legendre on the shorter side of 1/2, so
// S(x) + S(1 - x) = 1 holds to roundoff.
double smooth_step(double x);

// S'(x) = b(x) / int_0^1 b.
double smooth_step_derivative(double x);

// Radial low-pass profile: 1 on [0, 1/2], 1 - S(2r - 1) on [1/2, 1], 0 beyond.
double lowpass(double r);

// beta(r) = lowpass(r / 2) - lowpass(r), supported in [1/2, 2].
double bump(double r);

// Exact integrals: int_0^inf lowpass = 3/4, int_R beta = 3/2.
inline constexpr double kLowpassHalfMass = 0.75;
inline constexpr double kBumpIntegral = 1.5;

}  // namespace finitype
