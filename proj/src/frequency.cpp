#include "finitype/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace finitype {

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void require_periodic(const GridFunction& f) {
    if (!f.periodic) throw Error(ErrorKind::PreconditionFailed, "frequency projections need a periodic grid");
}

}  // namespace

double lowpass_eval(const Vec& xi) { return lowpass(norm(xi)); }

double dyadic_bump(int j, const Vec& xi) { return bump(std::ldexp(norm(xi), -j)); }

double partition_check(const std::vector<Vec>& xi_set, int J) {
    const double lo = std::ldexp(1.0, -J + 1), hi = std::ldexp(1.0, J - 1);
    double worst = 0.0;
    for (const Vec& xi : xi_set) {
        const double r = norm(xi);
        if (r < lo || r > hi) {
            throw Error(ErrorKind::SampleOutsideCoveredRange, "sample magnitude outside the covered annulus");
        }
        double sum = 0.0;
        for (int j = -J; j <= J; ++j) sum += bump(std::ldexp(r, -j));
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

GridFunction apply_multiplier(const GridFunction& f, const Multiplier& m) {
    require_periodic(f);
    GridFunction out = f;
    fft_forward(out.values, out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= m(lattice_frequency(out, i));
    fft_inverse(out.values, out.shape);
    out.complex_valued = true;
    return out;
}

std::vector<double> lp_multiplier(const GridFunction& f, int k) {
    require_periodic(f);
    if (!(nyquist(f) > std::ldexp(1.0, k + 1))) {
        throw Error(ErrorKind::NyquistViolation, "grid Nyquist frequency does not exceed 2^(k+1)");
    }
    std::vector<double> m(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) m[i] = dyadic_bump(k, lattice_frequency(f, i));
    return m;
}

GridFunction lp_project(const GridFunction& f, int k) {
    const std::vector<double> m = lp_multiplier(f, k);
    GridFunction out = f;
    fft_forward(out.values, out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= m[i];
    fft_inverse(out.values, out.shape);
    out.complex_valued = true;
    return out;
}

GridFunction lp_band(const GridFunction& f, int k_lo, int k_hi) {
    return apply_multiplier(f, [k_lo, k_hi](const Vec& xi) -> std::complex<double> {
        const double r = norm(xi);
        return lowpass(std::ldexp(r, -(k_hi + 1))) - lowpass(std::ldexp(r, -k_lo));
    });
}

GridFunction wave_piece(const GridFunction& g, int j, double t, const std::function<double(const Vec&)>& q) {
    const std::vector<double> m = lp_multiplier(g, j);
    GridFunction out = g;
    fft_forward(out.values, out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (m[i] == 0.0) {
            out.values[i] = 0.0;
            continue;
        }
        out.values[i] *= m[i] * std::polar(1.0, t * q(lattice_frequency(out, i)));
    }
    fft_inverse(out.values, out.shape);
    out.complex_valued = true;
    return out;
}

// ---------------------------------------------------------------------------
// Bump transforms

const BumpTransform& BumpTransform::instance() {
    static const BumpTransform table;
    return table;
}

BumpTransform::BumpTransform() {
    // g(w) = int_0^1 e^{iwx} S'(x) dx on w = m / 32 by a zero-padded FFT of
    // the trapezoid sums; S' is flat at both ends so the rule is spectral.
    constexpr int N = 1 << 21;
    constexpr double dw = 1.0 / 32.0;
    const double dx = 2.0 * std::numbers::pi / (N * dw);
    std::vector<std::complex<double>> data(N, 0.0);
    double z = 0.0;
    for (int k = 1; k * dx < 1.0; ++k) {
        const double x = k * dx;
        const double v = std::exp(-1.0 / (x * (1.0 - x)));
        data[static_cast<std::size_t>(k)] = v;
        z += v;
    }
    // Backward transform gives sum_k v_k e^{+2 pi i k m / N} = sum v_k e^{i w_m x_k}.
    fft_inverse(data, {N});
    const double scale = static_cast<double>(N) / z;  // undo 1/N, normalize S'
    auto g = [&](std::size_t m) { return data[m] * scale; };

    // b_Phi(s) = (2/s) Im(e^{is/2} g(s/2)); b_beta(s) = 2 b_Phi(2s) - b_Phi(s).
    auto b_lowpass = [&](std::size_t m16) {  // s = m16 / 16
        if (m16 == 0) return 2.0 * kLowpassHalfMass;
        const double s = m16 * step_;
        const std::complex<double> e = std::polar(1.0, 0.5 * s) * g(m16);  // s/2 = m16 / 32
        return 2.0 / s * e.imag();
    };
    const std::size_t count = static_cast<std::size_t>(s_max_ / step_) + 1;
    beta_.resize(count + 3);
    lowpass_.resize(count + 3);
    for (std::size_t m = 0; m < count + 3; ++m) {
        lowpass_[m] = b_lowpass(m);
        // b_Phi(2s) needs g(s) = g at index 2m on the 1/32 grid, i.e. b_lowpass(2m).
        beta_[m] = 2.0 * b_lowpass(2 * m) - lowpass_[m];
    }
    beta_[0] = kBumpIntegral;

    std::size_t last = 0;
    for (std::size_t m = 0; m < count; ++m) {
        if (std::abs(beta_[m]) > floor_) last = m;
    }
    reliable_ = (last + 1) * step_;
    tail_.assign(7, 0.0);
    for (int n = 0; n <= 6; ++n) {
        for (std::size_t m = 0; m <= last; ++m) {
            tail_[n] = std::max(tail_[n], std::abs(beta_[m]) * std::pow(1.0 + m * step_, n));
        }
    }
}

double BumpTransform::tail_check(int N) const {
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t count = static_cast<std::size_t>(s_max_ / step_) + 1;
    for (std::size_t m = 0; m < count; ++m) {
        const double bound = tail_[static_cast<std::size_t>(N)] * std::pow(1.0 + m * step_, -N) + floor_;
        worst = std::max(worst, std::abs(beta_[m]) - bound);
    }
    return worst;
}

double BumpTransform::interpolate(const std::vector<double>& table, double s) const {
    s = std::abs(s);
    const double x = s / step_;
    const std::size_t i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    // Cubic Lagrange on nodes i-1..i+2; b is even, so node -1 mirrors node 1.
    const double p0 = table[i == 0 ? 1 : i - 1], p1 = table[i], p2 = table[i + 1], p3 = table[i + 2];
    const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3;
}

double BumpTransform::beta(double s) const {
    s = std::abs(s);
    if (s >= reliable_) return 0.0;
    return interpolate(beta_, s);
}

double BumpTransform::lowpass(double s) const {
    s = std::abs(s);
    if (s >= reliable_) return 0.0;
    return interpolate(lowpass_, s);
}

// ---------------------------------------------------------------------------
// Dyadic kernels

double extended_weight(const DyadicKernelSpec& spec, const Vec& y) {
    const auto& def = spec.surface->defining();
    if (!def) throw Error(ErrorKind::PreconditionFailed, "surface has no defining function");
    const double phi = def->value(y);
    const double chi = finitype::lowpass(std::abs(phi) / spec.shell);
    if (chi == 0.0) return 0.0;
    const Vec u = def->project(y);
    if (!spec.surface->periodic() && !spec.surface->domain().contains(u, 0.0)) return 0.0;
    const double rho = spec.cutoff(u);
    if (rho == 0.0) return 0.0;
    return rho * norm(def->gradient(y)) * chi;
}

namespace {

template <class B>
double kernel(const DyadicKernelSpec& spec, const Vec& y, B b) {
    if (!spec.surface) throw Error(ErrorKind::PreconditionFailed, "kernel spec has no surface");
    const int n = spec.surface->ambient_dim();
    Vec z = y;
    for (double& v : z) v /= spec.t;
    const double w = extended_weight(spec, z);
    if (w == 0.0) return 0.0;
    const double s = std::ldexp(spec.surface->defining()->value(z), spec.j);
    const BumpTransform& table = BumpTransform::instance();
    if (std::abs(s) > table.s_max()) {
        const double bound = table.tail_constant(6) * std::pow(1.0 + std::abs(s), -6.0);
        if (bound > spec.tail_tolerance) {
            throw Error(ErrorKind::TailModelUnreliable, "kernel argument beyond the table with a loose tail bound");
        }
        return 0.0;
    }
    return std::ldexp(1.0, spec.j) / (2.0 * std::numbers::pi) * std::pow(spec.t, -n) * w * b(table, s);
}

}  // namespace

double dyadic_kernel_eval(const DyadicKernelSpec& spec, const Vec& y) {
    return kernel(spec, y, [](const BumpTransform& t, double s) { return t.beta(s); });
}

double lowpass_kernel_eval(const DyadicKernelSpec& spec, const Vec& y) {
    return kernel(spec, y, [](const BumpTransform& t, double s) { return t.lowpass(s); });
}

}  // namespace finitype
