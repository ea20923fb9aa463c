#include "finitype/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace finitype {

const GaussRule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

namespace {

struct Panel {
    double lo[2];
    double hi[2];
    std::complex<double> coarse;
    std::complex<double> children[4];
    std::complex<double> fine;
    double error;
    std::size_t id;
};

struct WorstFirst {
    const std::vector<Panel>* panels;
    bool operator()(std::size_t a, std::size_t b) const {
        const Panel& pa = (*panels)[a];
        const Panel& pb = (*panels)[b];
        if (pa.error != pb.error) return pa.error < pb.error;
        return pa.id > pb.id;
    }
};

}  // namespace

AdaptiveResult adaptive_integrate(const std::function<std::complex<double>(const double*)>& f,
                                  const std::vector<double>& lo, const std::vector<double>& hi,
                                  const AdaptiveOptions& options) {
    const int dim = static_cast<int>(lo.size());
    if (dim < 1 || dim > 2 || hi.size() != lo.size()) {
        throw std::invalid_argument("adaptive_integrate: box must be 1-D or 2-D");
    }
    const GaussRule& rule = gauss_legendre(options.points);
    const int nchild = dim == 1 ? 2 : 4;

    auto rect = [&](const double* a, const double* b) {
        std::complex<double> sum = 0.0;
        double x[2];
        if (dim == 1) {
            const double mid = 0.5 * (a[0] + b[0]), half = 0.5 * (b[0] - a[0]);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                x[0] = mid + half * rule.nodes[i];
                sum += rule.weights[i] * f(x);
            }
            return sum * half;
        }
        const double m0 = 0.5 * (a[0] + b[0]), h0 = 0.5 * (b[0] - a[0]);
        const double m1 = 0.5 * (a[1] + b[1]), h1 = 0.5 * (b[1] - a[1]);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            x[0] = m0 + h0 * rule.nodes[i];
            std::complex<double> row = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                x[1] = m1 + h1 * rule.nodes[j];
                row += rule.weights[j] * f(x);
            }
            sum += rule.weights[i] * row;
        }
        return sum * (h0 * h1);
    };

    auto child_box = [&](const Panel& p, int c, double* a, double* b) {
        for (int d = 0; d < dim; ++d) {
            const double mid = 0.5 * (p.lo[d] + p.hi[d]);
            const bool upper = (c >> d) & 1;
            a[d] = upper ? mid : p.lo[d];
            b[d] = upper ? p.hi[d] : mid;
        }
    };

    std::vector<Panel> panels;
    std::size_t next_id = 0;
    auto refine = [&](Panel& p) {
        p.fine = 0.0;
        for (int c = 0; c < nchild; ++c) {
            double a[2], b[2];
            child_box(p, c, a, b);
            p.children[c] = rect(a, b);
            p.fine += p.children[c];
        }
        p.error = std::abs(p.fine - p.coarse);
    };

    const int n0 = std::max(1, options.initial_panels);
    const int total0 = dim == 1 ? n0 : n0 * n0;
    panels.reserve(static_cast<std::size_t>(total0) * 4);
    for (int k = 0; k < total0; ++k) {
        Panel p{};
        const int i0 = k % n0, i1 = k / n0;
        p.lo[0] = lo[0] + (hi[0] - lo[0]) * i0 / n0;
        p.hi[0] = lo[0] + (hi[0] - lo[0]) * (i0 + 1) / n0;
        if (dim == 2) {
            p.lo[1] = lo[1] + (hi[1] - lo[1]) * i1 / n0;
            p.hi[1] = lo[1] + (hi[1] - lo[1]) * (i1 + 1) / n0;
        }
        p.coarse = rect(p.lo, p.hi);
        p.id = next_id++;
        refine(p);
        panels.push_back(p);
    }

    WorstFirst cmp{&panels};
    std::priority_queue<std::size_t, std::vector<std::size_t>, WorstFirst> queue(cmp);
    std::complex<double> total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        queue.push(i);
        total += panels[i].fine;
        total_error += panels[i].error;
    }

    auto tolerance = [&] { return std::max(options.rel_tol * std::abs(total), options.abs_tol); };
    bool converged = total_error <= tolerance();
    while (!converged && static_cast<int>(panels.size()) + nchild - 1 <= options.max_panels) {
        const std::size_t worst = queue.top();
        queue.pop();
        const Panel parent = panels[worst];
        total -= parent.fine;
        total_error -= parent.error;
        for (int c = 0; c < nchild; ++c) {
            Panel child{};
            child_box(parent, c, child.lo, child.hi);
            child.coarse = parent.children[c];
            child.id = next_id++;
            refine(child);
            total += child.fine;
            total_error += child.error;
            if (c == 0) {
                panels[worst] = child;
                queue.push(worst);
            } else {
                panels.push_back(child);
                queue.push(panels.size() - 1);
            }
        }
        // Re-sum periodically so cancellation in the running totals cannot drift.
        if (panels.size() % 1024 < static_cast<std::size_t>(nchild)) {
            total = 0.0;
            total_error = 0.0;
            for (const Panel& p : panels) {
                total += p.fine;
                total_error += p.error;
            }
        }
        converged = total_error <= tolerance();
    }

    AdaptiveResult result;
    result.value = 0.0;
    result.error_estimate = 0.0;
    for (const Panel& p : panels) {
        result.value += p.fine;
        result.error_estimate += p.error;
    }
    result.panels = static_cast<int>(panels.size());
    result.converged = result.panels <= options.max_panels &&
                       result.error_estimate <= std::max(options.rel_tol * std::abs(result.value), options.abs_tol);
    return result;
}

}  // namespace finitype
