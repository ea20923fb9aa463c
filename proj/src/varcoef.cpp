#include "finitype/varcoef.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "finitype/finite_difference.hpp"
#include "finitype/parallel.hpp"
#include "finitype/quadrature.hpp"

namespace finitype {

namespace {

constexpr double kFdStep = 1e-3;

Vec concat(const Vec& a, const Vec& b) {
    Vec out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Vec tail(const Vec& y) { return Vec(y.begin() + 1, y.end()); }

void require_time(const CurveDistribution& dist, double t) {
    if (!dist.t_range().contains(t)) {
        throw Error(ErrorKind::PreconditionFailed, "t outside the t-range of " + dist.label());
    }
}

// Tensor Gauss-Legendre nodes on a box of dimension 1 or 2.
struct BoxRule {
    std::vector<Vec> nodes;
    Vec weights;
};

BoxRule box_rule(const Box& box, const std::vector<int>& nodes_per_axis) {
    constexpr int pts = 8;
    const GaussRule& rule = gauss_legendre(pts);
    const int d = box.dim();
    std::vector<Vec> axis_nodes(static_cast<std::size_t>(d)), axis_weights(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const int panels = (nodes_per_axis[i] + pts - 1) / pts;
        const double w = (box.hi[i] - box.lo[i]) / panels;
        for (int p = 0; p < panels; ++p) {
            for (int k = 0; k < pts; ++k) {
                axis_nodes[i].push_back(box.lo[i] + w * (p + 0.5 * (rule.nodes[k] + 1.0)));
                axis_weights[i].push_back(0.5 * w * rule.weights[k]);
            }
        }
    }
    BoxRule out;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= axis_nodes[i].size();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        Vec u(static_cast<std::size_t>(d));
        double w = 1.0;
        for (int i = d - 1; i >= 0; --i) {
            const std::size_t k = rem % axis_nodes[i].size();
            rem /= axis_nodes[i].size();
            u[i] = axis_nodes[i][k];
            w *= axis_weights[i][k];
        }
        out.nodes.push_back(std::move(u));
        out.weights.push_back(w);
    }
    return out;
}

// Quadrature over the y' support with density psi * w(y').
struct FibreRule {
    std::vector<Vec> points;  // y on S_{x,t}
    Vec weights;
};

FibreRule fibre_rule(const CurveDistribution& dist, const Vec& x, double t, double spacing,
                     const VarcoefConfig& config) {
    const Box box = dist.support(x, t);
    const int d = box.dim();
    // Sampled slope of A bounds the arclength per unit y'.
    double speed = 1.0;
    constexpr int m = 9;
    int samples = 1;
    for (int i = 0; i < d; ++i) samples *= m;
    for (int k = 0; k < samples; ++k) {
        Vec yp(static_cast<std::size_t>(d));
        int rem = k;
        for (int i = 0; i < d; ++i) {
            yp[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (rem % m) / (m - 1);
            rem /= m;
        }
        double g2 = 1.0;
        for (double g : dist.grad_yp_A(x, yp, t)) g2 += g * g;
        speed = std::max(speed, std::sqrt(g2));
    }
    std::vector<int> per_axis(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const double len = speed * (box.hi[i] - box.lo[i]);
        per_axis[i] = std::max(config.min_nodes, static_cast<int>(std::ceil(config.nodes_per_cell * len / spacing)));
    }
    const BoxRule rule = box_rule(box, per_axis);
    FibreRule out;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const Vec& yp = rule.nodes[q];
        const Vec y = dist.surface_point(x, yp, t);
        const double psi = dist.psi(x, y, t);
        if (psi == 0.0) continue;
        double density = 1.0;
        if (config.convention == MeasureConvention::Surface) {
            double g2 = 1.0;
            for (double g : dist.grad_yp_A(x, yp, t)) g2 += g * g;
            density = std::sqrt(g2);
        }
        out.points.push_back(y);
        out.weights.push_back(rule.weights[q] * psi * density);
    }
    return out;
}

double grid_min_spacing(const GridFunction& f) {
    double h = f.spacing(0);
    for (int a = 1; a < f.dims(); ++a) h = std::min(h, f.spacing(a));
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// CurveDistribution

CurveDistribution CurveDistribution::from_function(ValueFn a, int n, CutoffFn psi, SupportFn support,
                                                   Interval t_range, std::string label) {
    CurveDistribution d;
    d.n_ = n;
    d.a_ = std::move(a);
    d.psi_ = std::move(psi);
    d.support_ = std::move(support);
    d.t_range_ = t_range;
    d.label_ = std::move(label);
    return d;
}

Vec CurveDistribution::surface_point(const Vec& x, const Vec& yp, double t) const {
    Vec y(static_cast<std::size_t>(n_));
    y[0] = x[0] - a_(x, yp, t);
    for (int i = 1; i < n_; ++i) y[i] = yp[i - 1];
    return y;
}

CurveDistribution::PhiDerivs CurveDistribution::phi_derivs(const Vec& x, const Vec& y, double t,
                                                           bool finite_difference) const {
    const int n = n_;
    PhiDerivs out;
    out.dx.assign(static_cast<std::size_t>(n), 0.0);
    out.dy.assign(static_cast<std::size_t>(n), 0.0);
    out.dxy = Eigen::MatrixXd::Zero(n, n);
    if (jet_ && !finite_difference) {
        auto set = MultiIndexSet::get(2 * n, 2);
        std::vector<Jet> xj, ypj;
        for (int i = 0; i < n; ++i) xj.push_back(Jet::variable(set, i, x[i]));
        const Jet y1 = Jet::variable(set, n, y[0]);
        for (int i = 1; i < n; ++i) ypj.push_back(Jet::variable(set, n + i, y[i]));
        const Jet phi = xj[0] - y1 - jet_(xj, ypj, Jet(t));
        std::vector<int> alpha(static_cast<std::size_t>(2 * n), 0);
        out.value = phi.value();
        for (int i = 0; i < n; ++i) {
            alpha.assign(alpha.size(), 0);
            alpha[i] = 1;
            out.dx[i] = phi.derivative(alpha);
            alpha.assign(alpha.size(), 0);
            alpha[n + i] = 1;
            out.dy[i] = phi.derivative(alpha);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                alpha.assign(alpha.size(), 0);
                alpha[n + i] += 1;
                alpha[j] += 1;
                out.dxy(i, j) = phi.derivative(alpha);
            }
        }
        return out;
    }
    auto phi = [&](const Vec& v) {
        const Vec xv(v.begin(), v.begin() + n);
        const Vec yv(v.begin() + n, v.end());
        return xv[0] - yv[0] - a_(xv, tail(yv), t);
    };
    const Vec v0 = concat(x, y);
    out.value = phi(v0);
    std::vector<int> alpha(static_cast<std::size_t>(2 * n), 0);
    for (int i = 0; i < n; ++i) {
        alpha.assign(alpha.size(), 0);
        alpha[i] = 1;
        out.dx[i] = fd_partial(phi, v0, alpha, kFdStep);
        alpha.assign(alpha.size(), 0);
        alpha[n + i] = 1;
        out.dy[i] = fd_partial(phi, v0, alpha, kFdStep);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            alpha.assign(alpha.size(), 0);
            alpha[n + i] += 1;
            alpha[j] += 1;
            out.dxy(i, j) = fd_partial(phi, v0, alpha, kFdStep);
        }
    }
    for (double v : out.dx) {
        if (!std::isfinite(v)) throw Error(ErrorKind::DerivUnavailable, "A is not differentiable here");
    }
    return out;
}

Vec CurveDistribution::grad_yp_A(const Vec& x, const Vec& yp, double t, bool finite_difference) const {
    const int m = n_ - 1;
    Vec g(static_cast<std::size_t>(m));
    if (jet_ && !finite_difference) {
        auto set = MultiIndexSet::get(m, 1);
        std::vector<Jet> xj, ypj;
        for (double v : x) xj.emplace_back(v);
        for (int i = 0; i < m; ++i) ypj.push_back(Jet::variable(set, i, yp[i]));
        const Jet a = jet_(xj, ypj, Jet(t));
        std::vector<int> alpha(static_cast<std::size_t>(m), 0);
        for (int i = 0; i < m; ++i) {
            alpha.assign(alpha.size(), 0);
            alpha[i] = 1;
            g[i] = a.is_constant() ? 0.0 : a.derivative(alpha);
        }
        return g;
    }
    auto a = [&](const Vec& v) { return a_(x, v, t); };
    std::vector<int> alpha(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i) {
        alpha.assign(alpha.size(), 0);
        alpha[i] = 1;
        g[i] = fd_partial(a, yp, alpha, kFdStep);
    }
    return g;
}

ParamSurface CurveDistribution::frozen_curve(const Vec& x0, double t0, double half_width) const {
    if (static_cast<int>(x0.size()) != n_) throw Error(ErrorKind::PreconditionFailed, "base point has wrong dimension");
    require_time(*this, t0);
    if (frozen_) return frozen_(x0, t0, half_width);
    const auto a = a_;
    const int n = n_;
    return ParamSurface::from_function(
        [a, x0, t0, n](const Vec& u) {
            Vec yp(static_cast<std::size_t>(n - 1), 0.0);
            yp[0] = u[0];
            return Vec{x0[0] - a(x0, yp, t0), u[0]};
        },
        2, Box{{-half_width}, {half_width}}, label_ + "-frozen");
}

void CurveDistribution::validate(int samples_per_axis) const {
    const int m = std::max(2, samples_per_axis);
    for (int k = 0; k < m; ++k) {
        const double t = t_range_.lo + (t_range_.hi - t_range_.lo) * k / (m - 1);
        const Vec x(static_cast<std::size_t>(n_), 0.0);
        const Box box = support_(x, t);
        const BoxRule rule = box_rule(box, std::vector<int>(static_cast<std::size_t>(box.dim()), 8));
        for (const Vec& yp : rule.nodes) {
            const double a = a_(x, yp, t);
            if (!std::isfinite(a)) throw Error(ErrorKind::DegenerateChart, "A is not finite on the support of psi");
            // d Phi / d y_1 = -1, so grad_y Phi never vanishes; the slope must be finite.
            for (double g : grad_yp_A(x, yp, t)) {
                if (!std::isfinite(g)) throw Error(ErrorKind::DegenerateChart, "grad_y Phi is not finite");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gallery

namespace {

struct PowerFold {
    int k;
    template <class T>
    T operator()(const T* x, const T* yp, const T& t) const {
        return t + ipow(x[1] - yp[0], k);
    }
};

struct LinearFold {
    double slope;
    template <class T>
    T operator()(const T* x, const T* yp, const T& t) const {
        return t + slope * (x[1] - yp[0]);
    }
};

struct CircleFamily {
    template <class T>
    T operator()(const T* x, const T* yp, const T& t) const {
        using std::sqrt;
        const T d = x[1] - yp[0];
        return t * sqrt(1.0 - d * d);
    }
};

template <class Formula>
CurveDistribution planar(Formula formula, double radius, std::string label) {
    const CutoffProfile bump = CutoffProfile::bump({0.0}, radius);
    auto psi = [bump](const Vec& x, const Vec& y, double) { return bump({x[1] - y[1]}); };
    auto support = [radius](const Vec& x, double) { return Box{{x[1] - radius}, {x[1] + radius}}; };
    auto d = CurveDistribution::from_formula(formula, 2, psi, support, Interval{0.0625, 16.0}, std::move(label));
    d.set_translation_invariant(true);
    return d;
}

bool parse_fold(std::string_view name, int& k) {
    if (name.rfind("fold-k", 0) != 0) return false;
    const auto rest = name.substr(6);
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    return res.ec == std::errc() && res.ptr == rest.data() + rest.size() && k >= 1;
}

}  // namespace

CurveDistribution fold_distribution(int k, double radius) {
    if (k < 1) throw Error(ErrorKind::PreconditionFailed, "fold power must be positive");
    return planar(PowerFold{k}, radius, "fold-k" + std::to_string(k));
}

CurveDistribution gallery_distribution(std::string_view name) {
    int k = 0;
    if (name == "parabolas") return planar(PowerFold{2}, 0.5, "parabolas");
    if (name == "cubic-fold") return planar(PowerFold{3}, 0.5, "cubic-fold");
    if (name == "quartic-fold") return planar(PowerFold{4}, 0.5, "quartic-fold");
    if (name == "circles") return planar(CircleFamily{}, 0.5, "circles");
    if (name == "linear-degenerate") return planar(LinearFold{0.5}, 0.5, "linear-degenerate");
    if (parse_fold(name, k)) return fold_distribution(k);
    throw Error(ErrorKind::ConfigInvalid, "unknown distribution '" + std::string(name) + "'");
}

bool is_gallery_distribution(std::string_view name) {
    int k = 0;
    return name == "parabolas" || name == "cubic-fold" || name == "quartic-fold" || name == "circles" ||
           name == "linear-degenerate" || parse_fold(name, k);
}

// ---------------------------------------------------------------------------
// Diagnostics

double defining_eval(const CurveDistribution& dist, const Vec& x, const Vec& y, double t) {
    require_time(dist, t);
    return x[0] - y[0] - dist.A(x, tail(y), t);
}

double monge_ampere(const CurveDistribution& dist, const Vec& x, const Vec& y, double t,
                    const MongeAmpereOptions& options) {
    require_time(dist, t);
    const int n = dist.ambient_dim();
    const auto d = dist.phi_derivs(x, y, t, options.finite_difference);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    const Vec& border_row = options.swap_roles ? d.dy : d.dx;
    const Vec& border_col = options.swap_roles ? d.dx : d.dy;
    for (int i = 0; i < n; ++i) {
        m(0, i + 1) = border_row[i];
        m(i + 1, 0) = border_col[i];
        for (int j = 0; j < n; ++j) m(i + 1, j + 1) = options.swap_roles ? d.dxy(j, i) : d.dxy(i, j);
    }
    return m.determinant();
}

namespace {

// Point of the incidence manifold in (x, y') coordinates.
struct Incidence {
    Vec x;
    Vec yp;
};

Incidence split(const Vec& p, int n) { return {Vec(p.begin(), p.begin() + n), Vec(p.begin() + n, p.end())}; }

double j_at(const CurveDistribution& dist, const Vec& p, double t) {
    const int n = dist.ambient_dim();
    const Incidence q = split(p, n);
    return monge_ampere(dist, q.x, dist.surface_point(q.x, q.yp, t), t);
}

bool lex_less(const SigmaSample& a, const SigmaSample& b) {
    const Vec pa = concat(a.x, tail(a.y)), pb = concat(b.x, tail(b.y));
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
}

}  // namespace

CanonicalDiagnostics nondegeneracy_scan(const CurveDistribution& dist, const ScanRegion& region, double t,
                                        double threshold) {
    require_time(dist, t);
    const int n = dist.ambient_dim();
    if (region.x.dim() != n || region.points < 2) throw Error(ErrorKind::ConfigInvalid, "bad scan region");
    const int m = region.points;

    std::size_t xcount = 1;
    for (int i = 0; i < n; ++i) xcount *= static_cast<std::size_t>(m);
    std::size_t ycount = 1;
    for (int i = 0; i < n - 1; ++i) ycount *= static_cast<std::size_t>(m);

    auto lattice = [m](const Box& box, std::size_t flat) {
        Vec p(static_cast<std::size_t>(box.dim()));
        for (int i = box.dim() - 1; i >= 0; --i) {
            p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(flat % m) / (m - 1);
            flat /= m;
        }
        return p;
    };

    // J on the (x, y') lattice; NaN marks psi = 0.
    struct Row {
        Vec x;
        Box ybox;
        Vec J;
    };
    std::vector<Row> rows(xcount);
    parallel_for(xcount, [&](std::size_t xi) {
        Row& row = rows[xi];
        row.x = lattice(region.x, xi);
        row.ybox = dist.support(row.x, t);
        row.J.assign(ycount, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t yi = 0; yi < ycount; ++yi) {
            const Vec yp = lattice(row.ybox, yi);
            const Vec y = dist.surface_point(row.x, yp, t);
            if (!(dist.psi(row.x, y, t) > 0.0)) continue;
            row.J[yi] = monge_ampere(dist, row.x, y, t);
        }
    });

    CanonicalDiagnostics out;
    Vec all;
    for (const Row& row : rows) {
        for (double j : row.J) {
            if (!std::isnan(j)) all.push_back(std::abs(j));
        }
    }
    out.scanned = all.size();
    if (all.empty()) throw Error(ErrorKind::PreconditionFailed, "scan region misses the cutoff support");
    std::sort(all.begin(), all.end());
    out.min_abs_J = all.front();
    out.median_abs_J = all[all.size() / 2];
    out.threshold = threshold > 0.0 ? threshold : std::max(1e-4 * out.median_abs_J, 1e-12);

    for (const Row& row : rows) {
        for (std::size_t yi = 0; yi < ycount; ++yi) {
            const double j0 = row.J[yi];
            if (std::isnan(j0)) continue;
            const Vec yp0 = lattice(row.ybox, yi);
            if (std::abs(j0) < out.threshold) {
                out.sigma_samples.push_back({row.x, dist.surface_point(row.x, yp0, t), j0});
                continue;
            }
            // Forward edges along each y' axis; bisect sign changes.
            std::size_t stride = 1;
            for (int a = n - 2; a >= 0; --a) {
                const std::size_t coord = (yi / stride) % m;
                if (coord + 1 < static_cast<std::size_t>(m)) {
                    const std::size_t yj = yi + stride;
                    const double j1 = row.J[yj];
                    if (!std::isnan(j1) && std::abs(j1) >= out.threshold && (j0 < 0.0) != (j1 < 0.0)) {
                        Vec lo = yp0, hi = lattice(row.ybox, yj);
                        double jlo = j0;
                        Vec mid = lo;
                        double jm = j0;
                        for (int it = 0; it < 60; ++it) {
                            for (std::size_t c = 0; c < mid.size(); ++c) mid[c] = 0.5 * (lo[c] + hi[c]);
                            jm = monge_ampere(dist, row.x, dist.surface_point(row.x, mid, t), t);
                            if (std::abs(jm) < 1e-3 * out.threshold) break;
                            if ((jm < 0.0) == (jlo < 0.0)) {
                                lo = mid;
                                jlo = jm;
                            } else {
                                hi = mid;
                            }
                        }
                        out.sigma_samples.push_back({row.x, dist.surface_point(row.x, mid, t), jm});
                    }
                }
                stride *= static_cast<std::size_t>(m);
            }
        }
    }
    std::sort(out.sigma_samples.begin(), out.sigma_samples.end(), lex_less);
    return out;
}

VanishingReport vanishing_order(const CurveDistribution& dist, const SigmaSample& sigma_point, const Vec& direction,
                                double t, const VanishingOptions& options) {
    require_time(dist, t);
    const int n = dist.ambient_dim();
    if (static_cast<int>(direction.size()) != 2 * n - 1) {
        throw Error(ErrorKind::PreconditionFailed, "transversal must live in (x, y') coordinates");
    }
    double len = 0.0;
    for (double v : direction) len += v * v;
    len = std::sqrt(len);
    if (!(len > 0.0)) throw Error(ErrorKind::PreconditionFailed, "transversal must be nonzero");
    Vec v = direction;
    for (double& c : v) c /= len;

    const Vec p0 = concat(sigma_point.x, tail(sigma_point.y));
    auto along = [&](double s) {
        Vec p = p0;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += s * v[i];
        return j_at(dist, p, t);
    };
    const double j0 = along(0.0);
    const double jmax = std::abs(along(options.s_max));
    if (!(std::abs(j0) <= options.sigma_threshold * jmax)) {
        throw Error(ErrorKind::PreconditionFailed, "base point is not on the singular set");
    }

    // grad J can vanish on Sigma itself for folds of order >= 2, so test
    // transversality a little way off it.
    const double s_off = options.s_max * std::pow(10.0, -0.5 * options.decades);
    Vec p_off = p0;
    for (std::size_t i = 0; i < p_off.size(); ++i) p_off[i] += s_off * v[i];
    Vec grad(p_off.size());
    const double h = 1e-3 * s_off;
    for (std::size_t i = 0; i < p_off.size(); ++i) {
        Vec a = p_off, b = p_off;
        a[i] += h;
        b[i] -= h;
        grad[i] = (j_at(dist, a, t) - j_at(dist, b, t)) / (2.0 * h);
    }
    double gnorm = 0.0, dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        gnorm += grad[i] * grad[i];
        dot += grad[i] * v[i];
    }
    gnorm = std::sqrt(gnorm);
    VanishingReport r;
    r.transversality = gnorm > 0.0 ? std::abs(dot) / gnorm : 0.0;
    if (r.transversality <= options.transversality) {
        throw Error(ErrorKind::PreconditionFailed, "direction is not transversal to the singular set");
    }

    Vec ls, lj;
    for (int k = 0; k < options.points; ++k) {
        const double s = options.s_max * std::pow(10.0, -options.decades * k / (options.points - 1));
        const double j = std::abs(along(s) - j0);
        if (!(j > 0.0)) throw Error(ErrorKind::OrderAmbiguous, "J vanishes identically along the transversal");
        ls.push_back(std::log(s));
        lj.push_back(std::log(j));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        mx += ls[i];
        my += lj[i];
    }
    mx /= static_cast<double>(ls.size());
    my /= static_cast<double>(ls.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        sxx += (ls[i] - mx) * (ls[i] - mx);
        sxy += (ls[i] - mx) * (lj[i] - my);
    }
    r.slope = sxy / sxx;
    const long m = std::lround(r.slope);
    if (m < 1 || std::abs(r.slope - static_cast<double>(m)) > options.tolerance) {
        throw Error(ErrorKind::OrderAmbiguous, "no integer order fits the log-log slope " + std::to_string(r.slope));
    }
    r.order = static_cast<int>(m);
    return r;
}

int cone_corank(const std::function<double(const Vec&)>& q, const Vec& xi) {
    double len = 0.0;
    for (double v : xi) len += v * v;
    len = std::sqrt(len);
    if (!(len > 0.0)) throw Error(ErrorKind::PreconditionFailed, "xi must be nonzero");
    const double q1 = q(xi);
    Vec xi2 = xi;
    for (double& v : xi2) v *= 2.0;
    if (std::abs(q(xi2) - 2.0 * q1) > 1e-9 * std::abs(q1)) {
        throw Error(ErrorKind::NotHomogeneous, "symbol is not homogeneous of degree 1");
    }
    const int n = static_cast<int>(xi.size());
    const double h = 1e-3 * len;
    Eigen::MatrixXd hess(n, n);
    double grad2 = 0.0;
    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        alpha.assign(alpha.size(), 0);
        alpha[i] = 1;
        const double g = fd_partial(q, xi, alpha, h);
        grad2 += g * g;
        for (int j = 0; j <= i; ++j) {
            alpha.assign(alpha.size(), 0);
            alpha[i] += 1;
            alpha[j] += 1;
            hess(i, j) = hess(j, i) = fd_partial(q, xi, alpha, h);
        }
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(hess).singularValues();
    // A degree-1 symbol has Hessian entries of size |grad q| / |xi|.
    const double scale = std::max(sv(0), std::sqrt(grad2) / len);
    int corank = 0;
    for (int i = 0; i < n; ++i) {
        if (sv(i) < 1e-7 * scale) ++corank;
    }
    return corank;
}

// ---------------------------------------------------------------------------
// Averages

AverageResult varcoef_average(const GridFunction& f, const CurveDistribution& dist, double t, const Vec& x,
                              const VarcoefConfig& config) {
    require_time(dist, t);
    if (f.dims() != dist.ambient_dim() || static_cast<int>(x.size()) != f.dims()) {
        throw Error(ErrorKind::PreconditionFailed, "grid, point and distribution dimensions differ");
    }
    const FibreRule rule = fibre_rule(dist, x, t, grid_min_spacing(f), config);
    AverageResult r;
    r.value = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        r.value += rule.weights[q] * interpolate(f, rule.points[q], config.interpolation, &r.zero_extended);
    }
    return r;
}

SurfaceNodes varcoef_nodes(const CurveDistribution& dist, double t, double spacing, const VarcoefConfig& config) {
    require_time(dist, t);
    if (!dist.translation_invariant()) {
        throw Error(ErrorKind::PreconditionFailed, dist.label() + " is not translation invariant");
    }
    const Vec origin(static_cast<std::size_t>(dist.ambient_dim()), 0.0);
    const FibreRule rule = fibre_rule(dist, origin, t, spacing, config);
    SurfaceNodes nodes;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        Vec off = rule.points[q];
        for (double& c : off) c = -c;
        nodes.offsets.push_back(std::move(off));
        nodes.weights.push_back(rule.weights[q]);
    }
    return nodes;
}

GridFunction varcoef_maximal(const GridFunction& f, const CurveDistribution& dist, const Vec& t_grid,
                             const VarcoefConfig& config) {
    if (t_grid.empty()) throw Error(ErrorKind::ConfigInvalid, "empty t-grid");
    for (double t : t_grid) require_time(dist, t);
    const double h = grid_min_spacing(f);
    if (dist.translation_invariant()) {
        return maximal_from_nodes(
            f, t_grid, [&](double t) { return varcoef_nodes(dist, t, h, config); }, config.interpolation);
    }
    GridFunction out = f;
    out.complex_valued = false;
    parallel_for(f.size(), [&](std::size_t i) {
        const Vec x = f.point(i);
        double m = 0.0;
        for (double t : t_grid) m = std::max(m, std::abs(varcoef_average(f, dist, t, x, config).value));
        out.values[i] = m;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string diagnostics_to_json(const CanonicalDiagnostics& d) {
    nlohmann::json j;
    j["min_abs_J"] = d.min_abs_J;
    j["median_abs_J"] = d.median_abs_J;
    j["threshold"] = d.threshold;
    j["scanned"] = d.scanned;
    j["sigma_count"] = d.sigma_samples.size();
    j["vanishing_orders"] = d.vanishing_orders;
    j["cone_coranks"] = d.cone_coranks;
    return j.dump(2);
}

std::string sigma_to_csv(const CanonicalDiagnostics& d) {
    std::ostringstream os;
    os << std::setprecision(17);
    const std::size_t n = d.sigma_samples.empty() ? 0 : d.sigma_samples.front().x.size();
    for (std::size_t i = 0; i < n; ++i) os << "x_" << i + 1 << ',';
    for (std::size_t i = 0; i < n; ++i) os << "y_" << i + 1 << ',';
    os << "J\n";
    for (const auto& s : d.sigma_samples) {
        for (double v : s.x) os << v << ',';
        for (double v : s.y) os << v << ',';
        os << s.J << '\n';
    }
    return os.str();
}

}  // namespace finitype
