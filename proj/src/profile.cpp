#include "finitype/profile.hpp"

#include <cmath>

#include "finitype/quadrature.hpp"

namespace finitype {

namespace {

double raw_bump(double x) { return std::exp(-1.0 / (x * (1.0 - x))); }

// int_0^x raw_bump, x in [0, 1/2].
double partial_integral(double x) {
    const GaussRule& rule = gauss_legendre(20);
    constexpr int panels = 8;
    const double w = x / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            sum += rule.weights[i] * raw_bump(w * (p + 0.5 * (rule.nodes[i] + 1.0)));
        }
        total += 0.5 * w * sum;
    }
    return total;
}

double half_integral() {
    static const double value = partial_integral(0.5);
    return value;
}

}  // namespace

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x <= 0.5) return 0.5 * partial_integral(x) / half_integral();
    return 1.0 - 0.5 * partial_integral(1.0 - x) / half_integral();
}

double smooth_step_derivative(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return raw_bump(x) / (2.0 * half_integral());
}

double lowpass(double r) {
    r = std::abs(r);
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    return 1.0 - smooth_step(2.0 * r - 1.0);
}

double bump(double r) { return lowpass(0.5 * r) - lowpass(r); }

}  // namespace finitype
