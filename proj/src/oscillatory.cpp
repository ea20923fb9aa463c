#include "finitype/oscillatory.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "finitype/parallel.hpp"
#include "finitype/quadrature.hpp"

namespace finitype {

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Largest column norm of the Jacobian on a coarse sample of the box.
double max_speed(const ParamSurface& surface, const Box& box) {
    const int d = surface.chart_dim();
    constexpr int m = 9;
    const int total = d == 1 ? m : m * m;
    double best = 0.0;
    for (int k = 0; k < total; ++k) {
        Vec u(static_cast<std::size_t>(d));
        int rem = k;
        for (int i = 0; i < d; ++i) {
            u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (rem % m) / (m - 1);
            rem /= m;
        }
        const Eigen::MatrixXd jac = surface.jacobian_unchecked(u);
        for (int c = 0; c < d; ++c) best = std::max(best, jac.col(c).norm());
    }
    return best;
}

}  // namespace

FtResult surface_measure_ft_report(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& xi,
                                   const FtOptions& options) {
    if (static_cast<int>(xi.size()) != surface.ambient_dim()) {
        throw Error(ErrorKind::PreconditionFailed, "frequency has wrong dimension");
    }
    const Box box = cutoff.support(surface.domain());
    const int d = surface.chart_dim();
    if (d > 2) throw Error(ErrorKind::PreconditionFailed, "surface_measure_ft supports chart dimension <= 2");

    // Initial panel count so that every panel sees at most points/ppw wavelengths.
    double width = 0.0;
    for (int i = 0; i < d; ++i) width = std::max(width, box.hi[i] - box.lo[i]);
    const double wavelengths = norm(xi) * max_speed(surface, box) * width / (2.0 * std::numbers::pi);
    const int per_axis = std::max(
        4, static_cast<int>(std::ceil(wavelengths * options.points_per_wavelength / options.gauss_points)));

    AdaptiveOptions ao;
    ao.rel_tol = options.rel_tol;
    ao.abs_tol = options.abs_tol;
    ao.max_panels = options.max_panels;
    ao.points = options.gauss_points;
    ao.initial_panels = per_axis;

    const int n = surface.ambient_dim();
    Vec u(static_cast<std::size_t>(d));
    auto integrand = [&](const double* x) -> std::complex<double> {
        for (int i = 0; i < d; ++i) u[i] = x[i];
        const double rho = cutoff(u);
        if (rho == 0.0) return 0.0;
        const Vec p = surface.point_unchecked(u);
        const Eigen::MatrixXd jac = surface.jacobian_unchecked(u);
        const double area = std::sqrt((jac.transpose() * jac).determinant());
        double phase = 0.0;
        for (int i = 0; i < n; ++i) phase += p[i] * xi[i];
        return std::polar(rho * area, -phase);
    };
    const AdaptiveResult r = adaptive_integrate(integrand, box.lo, box.hi, ao);
    if (!r.converged) {
        throw Error(ErrorKind::QuadratureBudgetExceeded,
                    "Fourier transform of " + surface.label() + " did not converge within the panel cap");
    }
    return {r.value, r.panels, r.error_estimate};
}

std::complex<double> surface_measure_ft(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& xi,
                                        const FtOptions& options) {
    return surface_measure_ft_report(surface, cutoff, xi, options).value;
}

FrequencySamples decay_scan(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& direction,
                            int j_min, int j_max, int per_shell, const ScanOptions& options) {
    if (j_min < 2 || j_max <= j_min || per_shell < 1) {
        throw Error(ErrorKind::PreconditionFailed, "decay_scan needs 2 <= j_min < j_max and per_shell >= 1");
    }
    const double len = norm(direction);
    if (std::abs(len - 1.0) > 1e-12) throw Error(ErrorKind::PreconditionFailed, "direction must be a unit vector");

    // Jitter is drawn up front in (shell, sample) order so it does not depend on threading.
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int shells = j_max - j_min + 1;
    const int total = shells * per_shell;
    std::vector<double> mags(static_cast<std::size_t>(total));
    std::vector<int> shell_of(static_cast<std::size_t>(total));
    for (int s = 0; s < shells; ++s) {
        for (int k = 0; k < per_shell; ++k) {
            const double frac = (k + unit(rng)) / per_shell;
            mags[s * per_shell + k] = std::exp2(j_min + s + frac);
            shell_of[s * per_shell + k] = j_min + s;
        }
    }

    std::vector<FtResult> results(static_cast<std::size_t>(total));
    std::vector<char> failed(static_cast<std::size_t>(total), 0);
    parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
        Vec xi = direction;
        for (double& x : xi) x *= mags[i];
        try {
            results[i] = surface_measure_ft_report(surface, cutoff, xi, options.ft);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::QuadratureBudgetExceeded) throw;
            failed[i] = 1;
        }
    });

    FrequencySamples out;
    out.direction = direction;
    out.j_min = j_min;
    out.j_max = j_max;
    for (int s = 0; s < shells; ++s) {
        bool missing = false;
        for (int k = 0; k < per_shell; ++k) missing = missing || failed[s * per_shell + k];
        if (missing) {
            out.missing_shells.push_back(j_min + s);
            continue;
        }
        for (int k = 0; k < per_shell; ++k) {
            const std::size_t i = static_cast<std::size_t>(s * per_shell + k);
            out.shell.push_back(shell_of[i]);
            out.magnitudes.push_back(mags[i]);
            out.values.push_back(results[i].value);
            out.panels.push_back(results[i].panels);
            out.error_estimates.push_back(results[i].error_estimate);
        }
    }

    // Hermitian spot check on the first, middle and last sample.
    if (!out.values.empty()) {
        const std::size_t m = out.values.size();
        for (std::size_t i : {std::size_t{0}, m / 2, m - 1}) {
            Vec xi = direction;
            for (double& x : xi) x *= -out.magnitudes[i];
            const auto minus = surface_measure_ft(surface, cutoff, xi, options.ft);
            out.hermitian_error = std::max(out.hermitian_error, std::abs(minus - std::conj(out.values[i])));
        }
    }
    return out;
}

DecayFit fit_decay_exponent(const FrequencySamples& samples) {
    std::vector<double> xs, ys;
    std::vector<int> js;
    std::size_t i = 0;
    while (i < samples.shell.size()) {
        const int j = samples.shell[i];
        std::vector<double> abs_vals;
        double log_mag = 0.0;
        std::size_t count = 0;
        while (i < samples.shell.size() && samples.shell[i] == j) {
            abs_vals.push_back(std::abs(samples.values[i]));
            log_mag += std::log(samples.magnitudes[i]);
            ++count;
            ++i;
        }
        std::sort(abs_vals.begin(), abs_vals.end());
        const std::size_t h = abs_vals.size() / 2;
        const double median = abs_vals.size() % 2 ? abs_vals[h] : 0.5 * (abs_vals[h - 1] + abs_vals[h]);
        if (!(median > 0.0)) continue;
        xs.push_back(log_mag / static_cast<double>(count));
        ys.push_back(std::log(median));
        js.push_back(j);
    }
    if (xs.size() < 4) throw Error(ErrorKind::InsufficientShells, "decay fit needs at least 4 shells");

    const double m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (fit.intercept + fit.slope * xs[k]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / m);
    fit.j_min = js.front();
    fit.j_max = js.back();
    fit.shells = static_cast<int>(xs.size());
    return fit;
}

double NormalCone::angle_to(const Vec& direction) const {
    const double len = norm(direction);
    double best = std::numbers::pi;
    for (const Vec& g : generators) {
        double dot = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * direction[i];
        dot = std::clamp(std::abs(dot) / len, 0.0, 1.0);
        best = std::min(best, std::acos(dot));
    }
    return best;
}

NormalCone normal_cone(const ParamSurface& surface, const CutoffProfile& cutoff, int samples_per_axis) {
    const Box box = cutoff.support(surface.domain());
    const int d = surface.chart_dim();
    const int m = d == 1 ? samples_per_axis : std::max(8, static_cast<int>(std::sqrt(samples_per_axis * 64.0)));
    const int total = d == 1 ? m : m * m;
    NormalCone cone;
    for (int k = 0; k < total; ++k) {
        Vec u(static_cast<std::size_t>(d));
        int rem = k;
        for (int i = 0; i < d; ++i) {
            u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (rem % m) / (m - 1);
            rem /= m;
        }
        if (cutoff(u) > 0.0 || cutoff.is_uniform()) cone.generators.push_back(surface.unit_normal(u));
    }
    if (cone.generators.empty()) throw Error(ErrorKind::PreconditionFailed, "cutoff support has no sample points");
    return cone;
}

DecayFit off_cone_check(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& direction,
                        const NormalCone& cone, int j_min, int j_max, int per_shell, const ScanOptions& options) {
    if (cone.angle_to(direction) <= cone.angular_margin) {
        throw Error(ErrorKind::DirectionInsideCone, "direction lies within the normal cone margin");
    }
    return fit_decay_exponent(decay_scan(surface, cutoff, direction, j_min, j_max, per_shell, options));
}

std::string samples_to_csv(const FrequencySamples& samples) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "shell_j,xi_magnitude,re,im,abs,panels\n";
    for (std::size_t i = 0; i < samples.values.size(); ++i) {
        os << samples.shell[i] << ',' << samples.magnitudes[i] << ',' << samples.values[i].real() << ','
           << samples.values[i].imag() << ',' << std::abs(samples.values[i]) << ',' << samples.panels[i] << '\n';
    }
    return os.str();
}

std::string fit_to_json(const DecayFit& fit) {
    nlohmann::json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["residual"] = fit.residual;
    j["shells"] = {fit.j_min, fit.j_max};
    j["shell_count"] = fit.shells;
    return j.dump(2);
}

}  // namespace finitype
