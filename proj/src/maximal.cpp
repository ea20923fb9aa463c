#include "finitype/maximal.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "finitype/parallel.hpp"
#include "finitype/profile.hpp"
#include "finitype/quadrature.hpp"

namespace finitype {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double min_spacing(const GridFunction& f) {
    double h = std::numeric_limits<double>::infinity();
    for (int a = 0; a < f.dims(); ++a) h = std::min(h, f.spacing(a));
    return h;
}

// Integer-offset kernel: g[i] = sum_k weights[k] f[i + offsets[k]].
struct SparseKernel {
    int dims = 0;
    std::vector<int> offsets;  // dims entries per term
    Vec weights;
    std::size_t terms() const { return weights.size(); }
};

SparseKernel splat(const GridFunction& f, const SurfaceNodes& nodes, int interpolation) {
    const int d = f.dims();
    SparseKernel k;
    k.dims = d;
    if (nodes.weights.empty()) return k;
    // Pass 1: integer bounds.
    std::vector<int> lo(d, std::numeric_limits<int>::max()), hi(d, std::numeric_limits<int>::min());
    std::vector<double> pos(static_cast<std::size_t>(d));
    for (const Vec& off : nodes.offsets) {
        for (int a = 0; a < d; ++a) {
            const int fl = static_cast<int>(std::floor(-off[a] / f.spacing(a)));
            lo[a] = std::min(lo[a], fl - 1);
            hi[a] = std::max(hi[a], fl + 2);
        }
    }
    std::vector<std::size_t> extent(d);
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        extent[a] = static_cast<std::size_t>(hi[a] - lo[a] + 1);
        total *= extent[a];
    }
    Vec dense(total, 0.0);
    std::vector<InterpStencil> st(static_cast<std::size_t>(d));
    std::vector<int> base(static_cast<std::size_t>(d));
    for (std::size_t q = 0; q < nodes.weights.size(); ++q) {
        for (int a = 0; a < d; ++a) {
            const double x = -nodes.offsets[q][a] / f.spacing(a);
            const double fl = std::floor(x);
            base[a] = static_cast<int>(fl);
            st[a] = interp_stencil(x - fl, interpolation);
        }
        const int count = st[0].count;
        int combos = 1;
        for (int a = 0; a < d; ++a) combos *= count;
        for (int c = 0; c < combos; ++c) {
            int rem = c;
            double w = nodes.weights[q];
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) {
                const int s = rem % count;
                rem /= count;
                w *= st[a].w[s];
                flat = flat * extent[a] + static_cast<std::size_t>(base[a] + st[a].first + s - lo[a]);
            }
            dense[flat] += w;
        }
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
        if (dense[flat] == 0.0) continue;
        std::size_t rem = flat;
        std::vector<int> o(static_cast<std::size_t>(d));
        for (int a = d - 1; a >= 0; --a) {
            o[a] = static_cast<int>(rem % extent[a]) + lo[a];
            rem /= extent[a];
        }
        k.offsets.insert(k.offsets.end(), o.begin(), o.end());
        k.weights.push_back(dense[flat]);
    }
    return k;
}

// Applies sparse kernels to a fixed f, by direct summation when cheap and by
// FFT otherwise. Non-periodic grids are zero-padded to twice their size.
class Convolver {
public:
    explicit Convolver(const GridFunction& f) : f_(f) {
        padded_ = f.shape;
        if (!f.periodic) {
            for (int& s : padded_) s *= 2;
        }
    }

    std::vector<std::complex<double>> apply(const SparseKernel& k) const {
        const std::size_t cost = k.terms() * f_.size();
        if (cost <= kDirectBudget) return direct(k);
        return via_fft(k);
    }

private:
    static constexpr std::size_t kDirectBudget = 40'000'000;

    std::vector<std::complex<double>> direct(const SparseKernel& k) const {
        const int d = f_.dims();
        std::vector<std::complex<double>> out(f_.size(), 0.0);
        std::vector<int> idx(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < f_.size(); ++i) {
            const auto base = f_.multi_index(i);
            std::complex<double> sum = 0.0;
            for (std::size_t t = 0; t < k.terms(); ++t) {
                bool inside = true;
                for (int a = 0; a < d; ++a) {
                    int v = base[a] + k.offsets[t * d + a];
                    const int n = f_.shape[a];
                    if (f_.periodic) {
                        v %= n;
                        if (v < 0) v += n;
                    } else if (v < 0 || v >= n) {
                        inside = false;
                        break;
                    }
                    idx[a] = v;
                }
                if (inside) sum += k.weights[t] * f_.values[f_.flat_index(idx)];
            }
            out[i] = sum;
        }
        return out;
    }

    const std::vector<std::complex<double>>& f_hat() const {
        std::call_once(once_, [this] {
            std::size_t total = 1;
            for (int s : padded_) total *= static_cast<std::size_t>(s);
            hat_.assign(total, 0.0);
            for (std::size_t i = 0; i < f_.size(); ++i) hat_[padded_index(f_.multi_index(i))] = f_.values[i];
            fft_forward(hat_, padded_);
        });
        return hat_;
    }

    std::size_t padded_index(const std::vector<int>& idx) const {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const int n = padded_[a];
            int v = idx[a] % n;
            if (v < 0) v += n;
            flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
        }
        return flat;
    }

    std::vector<std::complex<double>> via_fft(const SparseKernel& k) const {
        const int d = f_.dims();
        const auto& fh = f_hat();
        std::vector<std::complex<double>> kern(fh.size(), 0.0);
        std::vector<int> o(static_cast<std::size_t>(d));
        for (std::size_t t = 0; t < k.terms(); ++t) {
            bool keep = true;
            for (int a = 0; a < d; ++a) {
                o[a] = k.offsets[t * d + a];
                // Offsets of a full grid length or more never meet zero-extended data.
                if (!f_.periodic && std::abs(o[a]) >= f_.shape[a]) keep = false;
            }
            if (keep) kern[padded_index(o)] += k.weights[t];
        }
        fft_forward(kern, padded_);
        // Correlation: g = IFFT(f_hat * conj(K_hat)) for real K.
        for (std::size_t i = 0; i < kern.size(); ++i) kern[i] = fh[i] * std::conj(kern[i]);
        fft_inverse(kern, padded_);
        std::vector<std::complex<double>> out(f_.size());
        for (std::size_t i = 0; i < f_.size(); ++i) out[i] = kern[padded_index(f_.multi_index(i))];
        return out;
    }

    const GridFunction& f_;
    std::vector<int> padded_;
    mutable std::once_flag once_;
    mutable std::vector<std::complex<double>> hat_;
};

// Periodic convolution with a kernel sampled at centered lattice offsets.
// FFT of the kernel sampled at centered lattice offsets, times the cell volume.
std::vector<std::complex<double>> sampled_kernel_hat(const GridFunction& f,
                                                     const std::function<double(const Vec&)>& kernel) {
    if (!f.periodic) throw Error(ErrorKind::PreconditionFailed, "dyadic pieces need a periodic grid");
    const double vol = f.cell_volume();
    std::vector<double> samples(f.size());
    parallel_for(f.size(), [&](std::size_t i) {
        const auto idx = f.multi_index(i);
        Vec y(idx.size());
        for (int a = 0; a < f.dims(); ++a) {
            const int n = f.shape[a];
            const int o = idx[a] < n / 2 ? idx[a] : idx[a] - n;
            y[a] = o * f.spacing(a);
        }
        samples[i] = kernel(y) * vol;
    });
    std::vector<std::complex<double>> kern(samples.begin(), samples.end());
    fft_forward(kern, f.shape);
    return kern;
}

GridFunction apply_kernel_hat(const GridFunction& f, const std::vector<std::complex<double>>& kern) {
    std::vector<std::complex<double>> fh = f.values;
    fft_forward(fh, f.shape);
    for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= kern[i];
    fft_inverse(fh, f.shape);
    GridFunction out = f;
    out.values = std::move(fh);
    out.complex_valued = f.complex_valued;
    return out;
}

GridFunction convolve_sampled(const GridFunction& f, const std::function<double(const Vec&)>& kernel) {
    return apply_kernel_hat(f, sampled_kernel_hat(f, kernel));
}

DyadicKernelSpec kernel_spec(const ParamSurface& surface, const CutoffProfile& cutoff, int j, double t,
                             const DyadicOptions& options) {
    DyadicKernelSpec spec;
    spec.surface = &surface;
    spec.cutoff = cutoff;
    spec.j = j;
    spec.t = t;
    spec.shell = options.shell;
    return spec;
}

double real_l2(const GridFunction& g) { return g.lp_norm(2.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Averages

Vec dyadic_t_grid(int l_min, int l_max, int per_octave) {
    if (l_max < l_min || per_octave < 1) throw Error(ErrorKind::ConfigInvalid, "bad t-grid specification");
    Vec t;
    for (int l = l_min; l < l_max; ++l) {
        for (int k = 0; k < per_octave; ++k) t.push_back(std::exp2(l + static_cast<double>(k) / per_octave));
    }
    t.push_back(std::exp2(l_max));
    return t;
}

void AveragingConfig::validate() const {
    if (t_grid.empty()) throw Error(ErrorKind::ConfigInvalid, "empty t-grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0)) throw Error(ErrorKind::ConfigInvalid, "t-grid must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::ConfigInvalid, "t-grid must be increasing");
    }
    if (interpolation != 1 && interpolation != 3) throw Error(ErrorKind::ConfigInvalid, "interpolation must be 1 or 3");
    if (!(nodes_per_cell > 0.0) || min_nodes < 1) throw Error(ErrorKind::ConfigInvalid, "bad quadrature density");
}

SurfaceNodes surface_nodes(const ParamSurface& surface, const CutoffProfile& cutoff, double t, double spacing,
                           const AveragingConfig& config) {
    const Box box = cutoff.support(surface.domain());
    const int d = surface.chart_dim();
    if (d > 2) throw Error(ErrorKind::PreconditionFailed, "averages support chart dimension <= 2");
    // Ambient speed of the chart, sampled coarsely.
    double speed = 0.0;
    constexpr int m = 9;
    for (int k = 0; k < (d == 1 ? m : m * m); ++k) {
        Vec u(static_cast<std::size_t>(d));
        int rem = k;
        for (int i = 0; i < d; ++i) {
            u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (rem % m) / (m - 1);
            rem /= m;
        }
        const Eigen::MatrixXd jac = surface.jacobian_unchecked(u);
        for (int c = 0; c < d; ++c) speed = std::max(speed, jac.col(c).norm());
    }
    constexpr int pts = 8;
    const GaussRule& rule = gauss_legendre(pts);
    std::vector<int> panels(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double len = t * speed * (box.hi[i] - box.lo[i]);
        const int nodes = std::max(config.min_nodes, static_cast<int>(std::ceil(config.nodes_per_cell * len / spacing)));
        panels[i] = (nodes + pts - 1) / pts;
    }
    std::vector<Vec> axis_nodes(static_cast<std::size_t>(d)), axis_weights(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double w = (box.hi[i] - box.lo[i]) / panels[i];
        for (int p = 0; p < panels[i]; ++p) {
            for (int k = 0; k < pts; ++k) {
                axis_nodes[i].push_back(box.lo[i] + w * (p + 0.5 * (rule.nodes[k] + 1.0)));
                axis_weights[i].push_back(0.5 * w * rule.weights[k]);
            }
        }
    }
    SurfaceNodes out;
    const std::size_t n0 = axis_nodes[0].size();
    const std::size_t n1 = d == 2 ? axis_nodes[1].size() : 1;
    Vec u(static_cast<std::size_t>(d));
    for (std::size_t a = 0; a < n0; ++a) {
        for (std::size_t b = 0; b < n1; ++b) {
            u[0] = axis_nodes[0][a];
            double w = axis_weights[0][a];
            if (d == 2) {
                u[1] = axis_nodes[1][b];
                w *= axis_weights[1][b];
            }
            const double rho = cutoff(u);
            if (rho == 0.0) continue;
            const Eigen::MatrixXd jac = surface.jacobian_unchecked(u);
            const double area = std::sqrt((jac.transpose() * jac).determinant());
            Vec p = surface.point_unchecked(u);
            for (double& x : p) x *= t;
            out.offsets.push_back(std::move(p));
            out.weights.push_back(w * rho * area);
        }
    }
    return out;
}

AverageResult average_at(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff, double t,
                         const Vec& x, const AveragingConfig& config) {
    if (!(t > 0.0)) throw Error(ErrorKind::PreconditionFailed, "dilation must be positive");
    if (static_cast<int>(x.size()) != f.dims() || f.dims() != surface.ambient_dim()) {
        throw Error(ErrorKind::PreconditionFailed, "point, grid and surface dimensions differ");
    }
    const SurfaceNodes nodes = surface_nodes(surface, cutoff, t, min_spacing(f), config);
    AverageResult r;
    r.value = 0.0;
    Vec y(static_cast<std::size_t>(f.dims()));
    for (std::size_t q = 0; q < nodes.weights.size(); ++q) {
        for (int a = 0; a < f.dims(); ++a) y[a] = x[a] - nodes.offsets[q][a];
        r.value += nodes.weights[q] * interpolate(f, y, config.interpolation, &r.zero_extended);
    }
    return r;
}

GridFunction average_grid(const GridFunction& f, const SurfaceNodes& nodes, int interpolation) {
    Convolver conv(f);
    GridFunction out = f;
    out.values = conv.apply(splat(f, nodes, interpolation));
    return out;
}

GridFunction maximal_from_nodes(const GridFunction& f, const Vec& t_grid,
                                const std::function<SurfaceNodes(double t)>& nodes, int interpolation) {
    Convolver conv(f);
    const std::size_t T = t_grid.size();
    const std::size_t blocks = std::min<std::size_t>(T, static_cast<std::size_t>(std::max(1, threads())));
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(f.size(), 0.0));
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t begin = T * b / blocks, end = T * (b + 1) / blocks;
        auto& best = partial[b];
        for (std::size_t k = begin; k < end; ++k) {
            const auto g = conv.apply(splat(f, nodes(t_grid[k]), interpolation));
            for (std::size_t i = 0; i < g.size(); ++i) best[i] = std::max(best[i], std::abs(g[i]));
        }
    });
    // Max is exact, so the block count cannot change the result.
    GridFunction out = f;
    out.complex_valued = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double m = 0.0;
        for (const auto& p : partial) m = std::max(m, p[i]);
        out.values[i] = m;
    }
    return out;
}

GridFunction maximal_grid(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                          const AveragingConfig& config) {
    config.validate();
    if (f.dims() != surface.ambient_dim()) throw Error(ErrorKind::PreconditionFailed, "grid and surface dimensions differ");
    const double h = min_spacing(f);
    return maximal_from_nodes(
        f, config.t_grid, [&](double t) { return surface_nodes(surface, cutoff, t, h, config); },
        config.interpolation);
}

GridFunction hl_maximal(const GridFunction& f) {
    const int d = f.dims();
    const double h = min_spacing(f);
    double diameter = 0.0;
    for (int a = 0; a < d; ++a) diameter += std::pow(f.box.hi[a] - f.box.lo[a], 2);
    diameter = std::sqrt(diameter);
    Vec radii;
    for (double r = 0.5 * h; r <= diameter; r *= 2.0) radii.push_back(r);

    Convolver conv(f);
    std::vector<std::vector<std::complex<double>>> results(radii.size());
    parallel_for(radii.size(), [&](std::size_t k) {
        const double r = radii[k];
        SparseKernel ker;
        ker.dims = d;
        std::vector<int> reach(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) reach[a] = static_cast<int>(std::floor(r / f.spacing(a)));
        std::vector<int> o(static_cast<std::size_t>(d));
        std::size_t combos = 1;
        for (int a = 0; a < d; ++a) combos *= static_cast<std::size_t>(2 * reach[a] + 1);
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t rem = c;
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const std::size_t span = static_cast<std::size_t>(2 * reach[a] + 1);
                o[a] = static_cast<int>(rem % span) - reach[a];
                rem /= span;
                dist2 += std::pow(o[a] * f.spacing(a), 2);
            }
            if (dist2 <= r * r * (1.0 + 1e-12)) {
                ker.offsets.insert(ker.offsets.end(), o.begin(), o.end());
                ker.weights.push_back(1.0);
            }
        }
        const double inv = 1.0 / static_cast<double>(ker.terms());
        for (double& w : ker.weights) w = inv;
        results[k] = conv.apply(ker);
    });
    GridFunction out = f;
    out.complex_valued = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double m = 0.0;
        for (const auto& r : results) m = std::max(m, std::abs(r[i]));
        out.values[i] = m;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dyadic pieces

namespace {

// The kernel oscillates at frequencies up to 2^(j+1) and must be sampled above Nyquist.
void require_resolved(const GridFunction& f, int j) {
    if (!(nyquist(f) > std::ldexp(1.0, j + 1))) {
        throw Error(ErrorKind::NyquistViolation, "grid does not resolve the dyadic kernel at this j");
    }
}

}  // namespace

GridFunction dyadic_piece_apply(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                int j, double t, const DyadicOptions& options) {
    require_resolved(f, j);
    const DyadicKernelSpec spec = kernel_spec(surface, cutoff, j, t, options);
    return convolve_sampled(f, [&](const Vec& y) { return dyadic_kernel_eval(spec, y); });
}

GridFunction lowpass_piece_apply(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                 int j, double t, const DyadicOptions& options) {
    require_resolved(f, j - 1);
    const DyadicKernelSpec spec = kernel_spec(surface, cutoff, j, t, options);
    return convolve_sampled(f, [&](const Vec& y) { return lowpass_kernel_eval(spec, y); });
}

namespace {

double rhs_weight(const DyadicKernelSpec& spec, int n, int j, double t, const Vec& y) {
    Vec z = y;
    for (double& v : z) v /= t;
    return std::ldexp(1.0, j) * std::pow(t, -n) * std::abs(extended_weight(spec, z));
}

GridFunction abs_of(const GridFunction& f) {
    GridFunction out = f;
    for (auto& v : out.values) v = std::abs(v);
    out.complex_valued = false;
    return out;
}

}  // namespace

GridFunction kernel_bound_rhs(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff, int j,
                              double t, const DyadicOptions& options) {
    require_resolved(f, j);
    const DyadicKernelSpec spec = kernel_spec(surface, cutoff, j, t, options);
    const int n = surface.ambient_dim();
    return convolve_sampled(abs_of(f), [&](const Vec& y) { return rhs_weight(spec, n, j, t, y); });
}

std::vector<KernelBoundReport> kernel_bound_check(const std::vector<GridFunction>& fs, const ParamSurface& surface,
                                                  const CutoffProfile& cutoff, int j, double t,
                                                  const DyadicOptions& options) {
    std::vector<KernelBoundReport> out;
    if (fs.empty()) return out;
    for (const auto& f : fs) {
        require_resolved(f, j);
        if (f.shape != fs.front().shape || f.box.lo != fs.front().box.lo || f.box.hi != fs.front().box.hi) {
            throw Error(ErrorKind::PreconditionFailed, "kernel bound batch needs a common grid");
        }
    }
    const DyadicKernelSpec spec = kernel_spec(surface, cutoff, j, t, options);
    const int n = surface.ambient_dim();
    const auto piece_hat = sampled_kernel_hat(fs.front(), [&](const Vec& y) { return dyadic_kernel_eval(spec, y); });
    const auto rhs_hat = sampled_kernel_hat(fs.front(), [&](const Vec& y) { return rhs_weight(spec, n, j, t, y); });
    for (const auto& f : fs) {
        const GridFunction mj = apply_kernel_hat(f, piece_hat);
        const GridFunction rhs = apply_kernel_hat(abs_of(f), rhs_hat);
        double top = 0.0;
        for (const auto& v : rhs.values) top = std::max(top, v.real());
        KernelBoundReport r;
        r.j = j;
        r.t = t;
        r.reference = kBumpIntegral / (2.0 * kPi);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double denom = rhs.values[i].real();
            if (denom <= 1e-8 * top) continue;
            r.measured_constant = std::max(r.measured_constant, std::abs(mj.values[i]) / denom);
        }
        out.push_back(r);
    }
    return out;
}

KernelBoundReport kernel_bound_check(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                     int j, double t, const DyadicOptions& options) {
    return kernel_bound_check(std::vector<GridFunction>{f}, surface, cutoff, j, t, options).front();
}

DominationReport low_freq_domination(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                     const DyadicOptions& options) {
    for (const auto& v : f.values) {
        if (v.real() < 0.0 || v.imag() != 0.0) throw Error(ErrorKind::PreconditionFailed, "f must be nonnegative");
    }
    // sum_{j <= 0} beta(2^-j tau) = Phi(tau / 2): the low-pass kernel at j = 1.
    const GridFunction low = lowpass_piece_apply(f, surface, cutoff, 1, 1.0, options);
    const GridFunction hl = hl_maximal(f);
    DominationReport r;
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = hl.values[i].real();
        if (!(m > 0.0)) {
            ++r.excluded;
            continue;
        }
        any = true;
        r.c_obs = std::max(r.c_obs, std::abs(low.values[i]) / m);
    }
    if (!any) throw Error(ErrorKind::DivisionGuard, "Hardy-Littlewood function vanishes everywhere");
    return r;
}

// ---------------------------------------------------------------------------
// Sup over t

double sup_lemma_cutoff(double t) {
    if (t <= 0.5 || t >= 4.0) return 0.0;
    if (t < 1.0) return smooth_step(2.0 * (t - 0.5));
    if (t <= 2.0) return 1.0;
    return 1.0 - smooth_step(0.5 * (t - 2.0));
}

double sup_lemma_cutoff_derivative(double t) {
    if (t <= 0.5 || t >= 4.0) return 0.0;
    if (t < 1.0) return 2.0 * smooth_step_derivative(2.0 * (t - 0.5));
    if (t <= 2.0) return 0.0;
    return -0.5 * smooth_step_derivative(0.5 * (t - 2.0));
}

namespace {

struct SupIntegrals {
    double f_p;   // int |F|^p
    double dg_p;  // int |(psi F)'|^p
};

SupIntegrals sup_integrals(const Vec& F, std::size_t stride, double p) {
    const std::size_t m = (F.size() - 1) / stride;
    const double dt = 3.5 / static_cast<double>(m);
    Vec g(m + 1), dg(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const double t = 0.5 + k * dt;
        const double fk = F[k * stride];
        double df;
        if (k == 0) df = (-3.0 * F[0] + 4.0 * F[stride] - F[2 * stride]) / (2.0 * dt);
        else if (k == m) df = (3.0 * F[m * stride] - 4.0 * F[(m - 1) * stride] + F[(m - 2) * stride]) / (2.0 * dt);
        else df = (F[(k + 1) * stride] - F[(k - 1) * stride]) / (2.0 * dt);
        g[k] = sup_lemma_cutoff(t) * fk;
        dg[k] = sup_lemma_cutoff_derivative(t) * fk + sup_lemma_cutoff(t) * df;
    }
    SupIntegrals s{0.0, 0.0};
    for (std::size_t k = 0; k <= m; ++k) {
        const double w = (k == 0 || k == m) ? 0.5 * dt : dt;
        s.f_p += w * std::pow(std::abs(F[k * stride]), p);
        s.dg_p += w * std::pow(std::abs(dg[k]), p);
    }
    return s;
}

}  // namespace

SupLemmaReport sup_lemma_check(const Vec& samples, double p) {
    if (!(p > 1.0)) throw Error(ErrorKind::PreconditionFailed, "sup lemma needs p > 1");
    if (samples.size() < 17 || (samples.size() - 1) % 2 != 0) {
        throw Error(ErrorKind::PreconditionFailed, "sup lemma needs an even number (>= 16) of sample intervals");
    }
    const SupIntegrals fine = sup_integrals(samples, 1, p);
    const SupIntegrals coarse = sup_integrals(samples, 2, p);
    auto disagree = [](double a, double b) { return std::abs(a) > 0.0 && std::abs(a - b) > 0.01 * std::abs(a); };
    if (disagree(fine.f_p, coarse.f_p) || disagree(fine.dg_p, coarse.dg_p)) {
        throw Error(ErrorKind::UnderResolved, "sup lemma integrals change by more than 1% under step doubling");
    }
    SupLemmaReport r;
    r.p = p;
    r.constant = 2.0 * smooth_step_derivative(0.5);
    const std::size_t m = samples.size() - 1;
    const double dt = 3.5 / static_cast<double>(m);
    for (std::size_t k = 0; k <= m; ++k) {
        const double t = 0.5 + k * dt;
        if (t >= 1.0 - 1e-12 && t <= 2.0 + 1e-12) r.lhs = std::max(r.lhs, std::pow(std::abs(samples[k]), p));
    }
    r.rhs = p * std::pow(fine.f_p, (p - 1.0) / p) * std::pow(fine.dg_p, 1.0 / p) + r.constant * p * fine.f_p;
    r.slack = r.rhs - r.lhs;
    return r;
}

TimeScaleReport time_deriv_scale(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                 int j, double t, const DyadicOptions& options) {
    if (t < 1.0 || t > 2.0) throw Error(ErrorKind::PreconditionFailed, "time_deriv_scale needs t in [1, 2]");
    const GridFunction centre = dyadic_piece_apply(f, surface, cutoff, j, t, options);
    const double base = real_l2(centre);
    const double f2 = f.lp_norm(2.0);
    if (!(base > 1e-9 * std::ldexp(1.0, j) * f2)) {
        throw Error(ErrorKind::DivisionGuard, "dyadic piece vanishes; ratio undefined");
    }
    auto ratio = [&](double step) {
        const GridFunction plus = dyadic_piece_apply(f, surface, cutoff, j, t + step, options);
        const GridFunction minus = dyadic_piece_apply(f, surface, cutoff, j, t - step, options);
        GridFunction d = plus;
        for (std::size_t i = 0; i < d.size(); ++i) d.values[i] = (plus.values[i] - minus.values[i]) / (2.0 * step);
        return real_l2(d) / (std::ldexp(1.0, j) * base);
    };
    TimeScaleReport r;
    r.step = std::ldexp(1.0, -j - 3);
    r.ratio = ratio(r.step);
    r.ratio_half_step = ratio(0.5 * r.step);
    // A t-independent piece (f constant) has no time scale to measure.
    if (std::max(r.ratio, r.ratio_half_step) < 1e-3) {
        throw Error(ErrorKind::DivisionGuard, "dyadic piece does not depend on t; ratio undefined");
    }
    if (std::abs(r.ratio - r.ratio_half_step) > 0.3 * r.ratio) {
        throw Error(ErrorKind::UnderResolved, "time derivative changes by more than 30% under step halving");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Probes

double sharpness_profile(double p, double s) {
    s = std::abs(s);
    return std::pow(s, -1.0 / p) * std::pow(std::log(2.0 / s), -2.0 / p);
}

GridFunction sharpness_family(double p, const Vec& nu, int N, double half_side) {
    if (!(p > 1.0)) throw Error(ErrorKind::PreconditionFailed, "sharpness family needs p > 1");
    const int n = static_cast<int>(nu.size());
    const double len = norm(nu);
    GridFunction g(std::vector<int>(static_cast<std::size_t>(n), N),
                   Box{Vec(static_cast<std::size_t>(n), -half_side), Vec(static_cast<std::size_t>(n), half_side)},
                   false);
    const double h = g.spacing(0);
    g.fill([&](const Vec& y) {
        double r2 = 0.0, s = 0.0;
        for (int a = 0; a < n; ++a) {
            r2 += y[a] * y[a];
            s += y[a] * nu[a] / len;
        }
        if (r2 >= 1.0) return 0.0;
        return sharpness_profile(p, std::max(std::abs(s), h));
    });
    return g;
}

ProbeReport ratio_probe(double p, const std::string& family_name, const FamilyFn& family,
                        const std::vector<int>& resolutions, const MaximalFn& maximal) {
    if (resolutions.size() < 2) throw Error(ErrorKind::PreconditionFailed, "ratio probe needs two resolutions");
    ProbeReport r;
    r.p = p;
    r.family = family_name;
    r.resolutions = resolutions;
    for (int N : resolutions) {
        const GridFunction f = family(N);
        const GridFunction mf = maximal(f);
        r.norm_f.push_back(f.lp_norm(p));
        r.norm_mf.push_back(mf.lp_norm(p));
        r.ratios.push_back(r.norm_mf.back() / r.norm_f.back());
    }
    // Geometric mean of successive quotients.
    r.trend = std::pow(r.ratios.back() / r.ratios.front(), 1.0 / static_cast<double>(r.ratios.size() - 1));
    return r;
}

ProbeReport ratio_probe(double p, const ParamSurface& surface, const CutoffProfile& cutoff,
                        const std::string& family_name, const FamilyFn& family, const std::vector<int>& resolutions,
                        const AveragingConfig& config) {
    return ratio_probe(p, family_name, family, resolutions,
                       [&](const GridFunction& f) { return maximal_grid(f, surface, cutoff, config); });
}

TrendClass classify_trend(double trend) {
    if (trend <= 1.1) return TrendClass::Plateau;
    if (trend >= 1.2) return TrendClass::Growth;
    return TrendClass::Inconclusive;
}

std::string to_string(TrendClass c) {
    switch (c) {
        case TrendClass::Plateau: return "plateau";
        case TrendClass::Growth: return "growth";
        case TrendClass::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

double fit_slope(const std::vector<int>& xs, const Vec& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

}  // namespace

LocalSmoothingReport local_smoothing_probe(const std::vector<int>& j_range, double p,
                                           const std::function<double(const Vec&)>& q,
                                           const LocalSmoothingOptions& options) {
    if (!(p > 2.0)) throw Error(ErrorKind::PreconditionFailed, "local smoothing probe needs p > 2");
    if (j_range.size() < 2) throw Error(ErrorKind::PreconditionFailed, "local smoothing probe needs two scales");
    GridFunction grid = periodic_grid(2, options.grid, options.side);
    LocalSmoothingReport report;
    report.p = p;
    report.j = j_range;
    for (int j : j_range) {
        if (!(nyquist(grid) > std::ldexp(1.0, j + 1))) {
            throw Error(ErrorKind::NyquistViolation, "local smoothing grid does not resolve 2^(j+1)");
        }
        const double scale = std::ldexp(1.0, j);
        std::vector<Vec> freqs(grid.size());
        Vec beta(grid.size()), qv(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            freqs[i] = lattice_frequency(grid, i);
            beta[i] = dyadic_bump(j, freqs[i]);
            qv[i] = beta[i] != 0.0 ? q(freqs[i]) : 0.0;
        }
        std::vector<std::size_t> support;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (beta[i] != 0.0) support.push_back(i);
        }
        // Family: a Knapp plate along xi_1 of width 2^(j/2), and data focusing at t = focus_time.
        std::vector<std::vector<std::complex<double>>> members;
        {
            std::vector<std::complex<double>> plate(grid.size()), focus(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const Vec& xi = freqs[i];
                plate[i] = xi[0] > 0.0 ? bump(xi[0] / scale) * lowpass(std::abs(xi[1]) / std::sqrt(scale)) : 0.0;
                focus[i] = beta[i] * std::polar(1.0, -options.focus_time * qv[i]);
            }
            members.push_back(std::move(plate));
            members.push_back(std::move(focus));
        }
        const double dt = std::ldexp(1.0, -j) / options.steps_per_wavelength;
        const std::size_t K = static_cast<std::size_t>(std::llround(3.5 / dt));
        double best_fix = 0.0, best_st = 0.0;
        for (const auto& ghat : members) {
            std::vector<std::complex<double>> g = ghat;
            fft_inverse(g, grid.shape);
            GridFunction gg = grid;
            gg.values = g;
            const double gnorm = gg.lp_norm(p);
            Vec norms(K + 1);
            parallel_for(K + 1, [&](std::size_t k) {
                const double t = 0.5 + 3.5 * static_cast<double>(k) / static_cast<double>(K);
                GridFunction w = grid;
                for (std::size_t i : support) w.values[i] = ghat[i] * beta[i] * std::polar(1.0, t * qv[i]);
                fft_inverse(w.values, w.shape);
                norms[k] = w.lp_norm(p);
            });
            double fix = 0.0, st = 0.0;
            for (std::size_t k = 0; k <= K; ++k) {
                const double t = 0.5 + 3.5 * static_cast<double>(k) / static_cast<double>(K);
                if (t >= 1.0 - 1e-12 && t <= 2.0 + 1e-12) fix = std::max(fix, norms[k]);
                const double w = (k == 0 || k == K) ? 0.5 * dt : dt;
                st += w * std::pow(norms[k], p);
            }
            best_fix = std::max(best_fix, fix / gnorm);
            best_st = std::max(best_st, std::pow(st, 1.0 / p) / gnorm);
        }
        report.fixed_time.push_back(best_fix);
        report.space_time.push_back(best_st);
    }
    Vec lf, ls;
    for (std::size_t i = 0; i < j_range.size(); ++i) {
        lf.push_back(std::log2(report.fixed_time[i]));
        ls.push_back(std::log2(report.space_time[i]));
    }
    report.a_fix = fit_slope(j_range, lf);
    report.a_st = fit_slope(j_range, ls);
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

std::string probe_to_json(const ProbeReport& r) {
    nlohmann::json j;
    j["p"] = r.p;
    j["family"] = r.family;
    j["resolutions"] = r.resolutions;
    j["norm_f"] = r.norm_f;
    j["norm_Mf"] = r.norm_mf;
    j["ratios"] = r.ratios;
    j["trend"] = r.trend;
    j["classification"] = to_string(classify_trend(r.trend));
    return j.dump(2);
}

std::string probe_to_csv(const ProbeReport& r) {
    std::ostringstream os;
    os << std::setprecision(17) << "resolution,norm_f,norm_Mf,ratio\n";
    for (std::size_t i = 0; i < r.ratios.size(); ++i) {
        os << r.resolutions[i] << ',' << r.norm_f[i] << ',' << r.norm_mf[i] << ',' << r.ratios[i] << '\n';
    }
    return os.str();
}

std::string sup_lemma_to_json(const SupLemmaReport& r) {
    nlohmann::json j;
    j["p"] = r.p;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["slack"] = r.slack;
    j["constant"] = r.constant;
    return j.dump(2);
}

}  // namespace finitype
