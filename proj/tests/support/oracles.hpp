#pragma once

// Independent reference values used by the unit and acceptance tests. Nothing
// here calls into the library.

#include <cmath>
#include <numbers>

namespace oracle {

// J0 by its power series. Terms are summed in long double; adequate to about
// 1e-10 relative for |x| <= 25 away from zeros.
inline double bessel_j0_series(double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = -0.25L * x * x;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(static_cast<double>(term)) < 1e-22 * std::fabs(static_cast<double>(sum)) && k > 2 * x) break;
    }
    return static_cast<double>(sum);
}

// Hankel asymptotic expansion of J0 for large x, first 8 terms of P and Q.
inline double bessel_j0_asymptotic(double x) {
    double p = 0.0, q = 0.0;
    // a_k(0) = prod_{m=1..k} (-(2m-1)^2) / (k! 8^k) with mu = 0.
    double ak = 1.0;
    for (int k = 0; k < 16; ++k) {
        if (k > 0) ak *= -(2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
        const double term = ak / std::pow(x, k);
        // Even k feed P with sign (-1)^(k/2); odd k feed Q with sign (-1)^((k-1)/2).
        if (k % 2 == 0) p += ((k / 2) % 2 ? -term : term);
        else q += (((k - 1) / 2) % 2 ? -term : term);
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

inline double bessel_j0(double x) {
    x = std::fabs(x);
    return x <= 25.0 ? bessel_j0_series(x) : bessel_j0_asymptotic(x);
}

// Area of the intersection of discs of radii r and R whose centers are d apart.
inline double lens_area(double r, double R, double d) {
    if (d >= r + R) return 0.0;
    if (d <= std::fabs(R - r)) {
        const double m = std::fmin(r, R);
        return std::numbers::pi * m * m;
    }
    const double a = r * r * std::acos((d * d + r * r - R * R) / (2.0 * d * r));
    const double b = R * R * std::acos((d * d + R * R - r * r) / (2.0 * d * R));
    const double c = 0.5 * std::sqrt((-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R));
    return a + b - c;
}

}  // namespace oracle
