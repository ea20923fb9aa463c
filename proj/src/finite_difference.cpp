#include "finitype/finite_difference.hpp"

#include <algorithm>
#include <cmath>

namespace finitype {

namespace {

// Second-order central stencil offsets (in units of h) for an m-th derivative.
std::vector<double> central_offsets(int m) {
    const int half = (m + 1) / 2;
    std::vector<double> x;
    for (int i = -half; i <= half; ++i) x.push_back(i);
    return x;
}

}  // namespace

// Fornberg weights for the m-th derivative at 0 on the given nodes.
std::vector<double> fornberg_weights(const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    double c1 = 1.0, c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

double fd_partial(const std::function<double(const std::vector<double>&)>& g, const std::vector<double>& x0,
                  const std::vector<int>& alpha, double h0) {
    int m = 0;
    for (int a : alpha) m += a;
    auto estimate = [&](double h) {
        // Tensor product of 1-D central stencils.
        std::vector<std::vector<double>> offs, wts;
        for (int a : alpha) {
            if (a == 0) {
                offs.push_back({0.0});
                wts.push_back({1.0});
                continue;
            }
            const auto x = central_offsets(a);
            offs.push_back(x);
            wts.push_back(fornberg_weights(x, a));
        }
        double total = 0.0;
        std::vector<std::size_t> idx(alpha.size(), 0);
        while (true) {
            std::vector<double> u = x0;
            double w = 1.0;
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                u[i] += offs[i][idx[i]] * h;
                w *= wts[i][idx[i]];
            }
            if (w != 0.0) total += w * g(u);
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == offs[k].size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
        return total / std::pow(h, m);
    };
    return (4.0 * estimate(0.5 * h0) - estimate(h0)) / 3.0;
}

}  // namespace finitype
