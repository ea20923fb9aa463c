#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace finitype {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule, computed once per n and cached.
const GaussRule& gauss_legendre(int n);

struct AdaptiveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int initial_panels = 4;   // per axis
    int max_panels = 1 << 18;
    int points = 16;          // Gauss points per panel per axis
};

struct AdaptiveResult {
    std::complex<double> value;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = false;
};

// Globally adaptive panel Gauss-Legendre quadrature of a complex integrand
// over a box of dimension 1 or 2. Each panel is compared with the sum over its
// children (2 in 1-D, 4 in 2-D); the worst panel is split until the summed
// error estimate is below max(rel_tol |I|, abs_tol). Splitting order is
// deterministic.
AdaptiveResult adaptive_integrate(const std::function<std::complex<double>(const double*)>& f,
                                  const std::vector<double>& lo, const std::vector<double>& hi,
                                  const AdaptiveOptions& options);

}  // namespace finitype
