#include "finitype/geometry.hpp"

#include "finitype/finite_difference.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "finitype/profile.hpp"
#include "finitype/quadrature.hpp"

namespace finitype {

bool Box::contains(const Vec& u, double slack) const {
    if (u.size() != lo.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < lo[i] - slack || u[i] > hi[i] + slack) return false;
    }
    return true;
}

namespace {

std::vector<std::vector<int>> multi_indices_up_to(int vars, int order) {
    auto set = MultiIndexSet::get(vars, order);
    std::vector<std::vector<int>> out;
    for (std::size_t k = 1; k < set->size(); ++k) out.push_back(set->index(k));
    return out;
}

int degree_of(const std::vector<int>& alpha) {
    int d = 0;
    for (int a : alpha) d += a;
    return d;
}

}  // namespace

void ParamSurface::require_in_chart(const Vec& u) const {
    if (static_cast<int>(u.size()) != chart_dim()) {
        throw Error(ErrorKind::OutOfChart, "chart point has wrong dimension");
    }
    if (periodic_) return;
    if (!domain_.contains(u)) throw Error(ErrorKind::OutOfChart, "chart point outside the domain of " + label_);
}

Vec ParamSurface::point(const Vec& u) const {
    require_in_chart(u);
    return point_(u);
}

Eigen::MatrixXd ParamSurface::jacobian(const Vec& u) const {
    require_in_chart(u);
    return jacobian_(u);
}

double ParamSurface::area_element(const Vec& u) const {
    const Eigen::MatrixXd jac = jacobian(u);
    const double det = (jac.transpose() * jac).determinant();
    const double scale = std::max(1.0, jac.squaredNorm());
    if (!(det > 1e-14 * std::pow(scale, chart_dim()))) {
        throw Error(ErrorKind::DegenerateChart, "Gram determinant vanishes on " + label_);
    }
    return std::sqrt(det);
}

Vec ParamSurface::unit_normal(const Vec& u) const {
    const Eigen::MatrixXd jac = jacobian(u);
    Eigen::VectorXd nrm(ambient_dim_);
    if (ambient_dim_ == 2) {
        nrm << -jac(1, 0), jac(0, 0);
    } else if (ambient_dim_ == 3) {
        const Eigen::Vector3d a = jac.col(0), b = jac.col(1);
        nrm = a.cross(b);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac.transpose(), Eigen::ComputeFullV);
        nrm = svd.matrixV().col(ambient_dim_ - 1);
    }
    const double len = nrm.norm();
    if (!(len > 0.0)) throw Error(ErrorKind::DegenerateChart, "normal undefined on " + label_);
    Vec out(static_cast<std::size_t>(ambient_dim_));
    for (int i = 0; i < ambient_dim_; ++i) out[i] = nrm(i) / len;
    return out;
}

double ParamSurface::fd_derivative(const Vec& u0, const Vec& eta, const std::vector<int>& alpha) const {
    const int m = degree_of(alpha);
    double width = 0.0;
    for (int i = 0; i < chart_dim(); ++i) width = std::max(width, domain_.hi[i] - domain_.lo[i]);
    const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (m + 2)) * 0.5 * width;

    auto g = [&](const Vec& u) {
        const Vec p = point_(u);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * eta[i];
        return s;
    };
    return fd_partial(g, u0, alpha, h0);
}

DerivTable ParamSurface::directional_table(const Vec& u0, const Vec& eta, int max_order) const {
    require_in_chart(u0);
    if (static_cast<int>(eta.size()) != ambient_dim_) {
        throw Error(ErrorKind::PreconditionFailed, "direction has wrong dimension");
    }
    double norm2 = 0.0;
    for (double e : eta) norm2 += e * e;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
        throw Error(ErrorKind::PreconditionFailed, "direction must be a unit vector");
    }
    if (max_order < 1 || max_order > max_deriv_order()) {
        throw Error(ErrorKind::DerivUnavailable,
                    "derivative oracle of " + label_ + " supports orders 1.." + std::to_string(max_deriv_order()));
    }
    DerivTable table;
    if (jets_) {
        auto set = MultiIndexSet::get(chart_dim(), max_order);
        std::vector<Jet> u;
        for (int i = 0; i < chart_dim(); ++i) u.push_back(Jet::variable(set, i, u0[i]));
        const std::vector<Jet> out = jets_(u);
        Jet combined(set, 0.0);
        for (int i = 0; i < ambient_dim_; ++i) combined += out[static_cast<std::size_t>(i)] * Jet(eta[i]);
        for (std::size_t k = 1; k < set->size(); ++k) table[set->index(k)] = combined.derivative(set->index(k));
        return table;
    }
    for (const auto& alpha : multi_indices_up_to(chart_dim(), max_order)) {
        table[alpha] = fd_derivative(u0, eta, alpha);
    }
    return table;
}

ParamSurface ParamSurface::from_function(PointFn point, int ambient_dim, Box domain, std::string label) {
    ParamSurface s;
    s.ambient_dim_ = ambient_dim;
    s.domain_ = std::move(domain);
    s.label_ = std::move(label);
    s.point_ = std::move(point);
    const int d = ambient_dim - 1;
    double width = 0.0;
    for (int i = 0; i < d; ++i) width = std::max(width, s.domain_.hi[i] - s.domain_.lo[i]);
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * 0.5 * width;
    auto pt = s.point_;
    s.jacobian_ = [pt, ambient_dim, d, h](const Vec& u) {
        Eigen::MatrixXd jac(ambient_dim, d);
        for (int c = 0; c < d; ++c) {
            Vec up = u, um = u;
            up[c] += h;
            um[c] -= h;
            const Vec a = pt(up), b = pt(um);
            for (int r = 0; r < ambient_dim; ++r) jac(r, c) = (a[r] - b[r]) / (2.0 * h);
        }
        return jac;
    };
    return s;
}

ParamSurface ParamSurface::rotated(const Eigen::MatrixXd& rotation) const {
    ParamSurface s = *this;
    s.label_ = label_ + "/rotated";
    const int n = ambient_dim_;
    auto pt = point_;
    auto jac = jacobian_;
    s.point_ = [pt, rotation, n](const Vec& u) {
        const Vec p = pt(u);
        const Eigen::VectorXd q = rotation * Eigen::Map<const Eigen::VectorXd>(p.data(), n);
        return Vec(q.data(), q.data() + n);
    };
    s.jacobian_ = [jac, rotation](const Vec& u) -> Eigen::MatrixXd { return rotation * jac(u); };
    if (jets_) {
        auto jets = jets_;
        s.jets_ = [jets, rotation, n](const std::vector<Jet>& u) {
            const std::vector<Jet> p = jets(u);
            std::vector<Jet> out(static_cast<std::size_t>(n), Jet(0.0));
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) out[r] += p[static_cast<std::size_t>(c)] * Jet(rotation(r, c));
            }
            return out;
        };
    }
    if (defining_) {
        const DefiningFunction base = *defining_;
        const Eigen::MatrixXd rt = rotation.transpose();
        auto back = [rt, n](const Vec& y) {
            const Eigen::VectorXd q = rt * Eigen::Map<const Eigen::VectorXd>(y.data(), n);
            return Vec(q.data(), q.data() + n);
        };
        DefiningFunction f;
        f.value = [base, back](const Vec& y) { return base.value(back(y)); };
        f.gradient = [base, back, rotation, n](const Vec& y) {
            const Vec g = base.gradient(back(y));
            const Eigen::VectorXd q = rotation * Eigen::Map<const Eigen::VectorXd>(g.data(), n);
            return Vec(q.data(), q.data() + n);
        };
        f.project = [base, back](const Vec& y) { return base.project(back(y)); };
        s.defining_ = f;
    }
    return s;
}

ParamSurface ParamSurface::translated(const Vec& shift) const {
    ParamSurface s = *this;
    s.label_ = label_ + "/translated";
    auto pt = point_;
    s.point_ = [pt, shift](const Vec& u) {
        Vec p = pt(u);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += shift[i];
        return p;
    };
    if (jets_) {
        auto jets = jets_;
        s.jets_ = [jets, shift](const std::vector<Jet>& u) {
            std::vector<Jet> p = jets(u);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] += Jet(shift[i]);
            return p;
        };
    }
    if (defining_) {
        const DefiningFunction base = *defining_;
        auto back = [shift](Vec y) {
            for (std::size_t i = 0; i < y.size(); ++i) y[i] -= shift[i];
            return y;
        };
        s.defining_ = DefiningFunction{[base, back](const Vec& y) { return base.value(back(y)); },
                                       [base, back](const Vec& y) { return base.gradient(back(y)); },
                                       [base, back](const Vec& y) { return base.project(back(y)); }};
    }
    return s;
}

ParamSurface ParamSurface::dilated(double t) const {
    ParamSurface s = *this;
    s.label_ = label_ + "/dilated";
    auto pt = point_;
    auto jac = jacobian_;
    s.point_ = [pt, t](const Vec& u) {
        Vec p = pt(u);
        for (double& x : p) x *= t;
        return p;
    };
    s.jacobian_ = [jac, t](const Vec& u) -> Eigen::MatrixXd { return t * jac(u); };
    if (jets_) {
        auto jets = jets_;
        s.jets_ = [jets, t](const std::vector<Jet>& u) {
            std::vector<Jet> p = jets(u);
            for (Jet& x : p) x *= Jet(t);
            return p;
        };
    }
    if (defining_) {
        const DefiningFunction base = *defining_;
        auto back = [t](Vec y) {
            for (double& x : y) x /= t;
            return y;
        };
        s.defining_ = DefiningFunction{[base, back, t](const Vec& y) { return t * base.value(back(y)); },
                                       [base, back](const Vec& y) { return base.gradient(back(y)); },
                                       [base, back](const Vec& y) { return base.project(back(y)); }};
    }
    return s;
}

double area_element(const ParamSurface& surface, const Vec& u) { return surface.area_element(u); }

Vec chart_eval(const ParamSurface& surface, const Vec& u) { return surface.point(u); }

DerivTable directional_deriv_table(const ParamSurface& surface, const Vec& u0, const Vec& eta, int max_order) {
    return surface.directional_table(u0, eta, max_order);
}

void validate_chart(const ParamSurface& surface, int samples_per_axis, double c_min) {
    const int d = surface.chart_dim();
    const Box& box = surface.domain();
    std::vector<Vec> us;
    std::vector<Vec> ps;
    const int total = d == 1 ? samples_per_axis : samples_per_axis * samples_per_axis;
    for (int k = 0; k < total; ++k) {
        Vec u(static_cast<std::size_t>(d));
        int rem = k;
        for (int i = 0; i < d; ++i) {
            const int idx = rem % samples_per_axis;
            rem /= samples_per_axis;
            // Periodic charts: leave out the far endpoint, which repeats the first.
            const int denom = surface.periodic() ? samples_per_axis : samples_per_axis - 1;
            u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx / denom;
        }
        surface.area_element(u);
        us.push_back(u);
        ps.push_back(surface.point(u));
    }
    double delta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) delta = std::min(delta, (box.hi[i] - box.lo[i]) / samples_per_axis);
    for (std::size_t a = 0; a < us.size(); ++a) {
        for (std::size_t b = a + 1; b < us.size(); ++b) {
            double chart_dist = 0.0, ambient = 0.0;
            for (int i = 0; i < d; ++i) {
                double diff = std::abs(us[a][i] - us[b][i]);
                if (surface.periodic()) diff = std::min(diff, (box.hi[i] - box.lo[i]) - diff);
                chart_dist += diff * diff;
            }
            for (std::size_t i = 0; i < ps[a].size(); ++i) ambient += (ps[a][i] - ps[b][i]) * (ps[a][i] - ps[b][i]);
            if (std::sqrt(chart_dist) >= delta * 0.999 && std::sqrt(ambient) < c_min * delta) {
                throw Error(ErrorKind::DegenerateChart, "chart of " + surface.label() + " is not injective");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Cutoffs

CutoffProfile CutoffProfile::bump(Vec center, double radius, double amplitude, int order) {
    if (!(radius > 0.0) || !(amplitude > 0.0)) {
        throw Error(ErrorKind::PreconditionFailed, "cutoff radius and amplitude must be positive");
    }
    CutoffProfile c;
    c.center_ = std::move(center);
    c.radius_ = radius;
    c.amplitude_ = amplitude;
    c.order_ = order;
    return c;
}

CutoffProfile CutoffProfile::uniform(double amplitude) {
    CutoffProfile c;
    c.amplitude_ = amplitude;
    c.uniform_ = true;
    c.radius_ = std::numeric_limits<double>::infinity();
    return c;
}

CutoffProfile CutoffProfile::plateau(Vec center, double radius, double amplitude) {
    CutoffProfile c = bump(std::move(center), radius, amplitude);
    c.plateau_ = true;
    return c;
}

double CutoffProfile::operator()(const Vec& u) const {
    if (uniform_) return amplitude_;
    double r2 = 0.0;
    for (std::size_t i = 0; i < center_.size(); ++i) {
        const double d = (u[i] - center_[i]) / radius_;
        r2 += d * d;
    }
    if (r2 >= 1.0) return 0.0;
    if (plateau_) return amplitude_ * lowpass(std::sqrt(r2));
    if (order_ == kSmooth) return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - r2));
    return amplitude_ * std::pow(1.0 - r2, order_ + 1);
}

Box CutoffProfile::support(const Box& domain) const {
    if (uniform_) return domain;
    Box b = domain;
    for (std::size_t i = 0; i < center_.size(); ++i) {
        b.lo[i] = std::max(domain.lo[i], center_[i] - radius_);
        b.hi[i] = std::min(domain.hi[i], center_[i] + radius_);
    }
    return b;
}

double cutoff_mass(const ParamSurface& surface, const CutoffProfile& cutoff) {
    const Box box = cutoff.support(surface.domain());
    const int d = surface.chart_dim();
    if (d > 2) throw Error(ErrorKind::PreconditionFailed, "cutoff_mass supports chart dimension <= 2");
    AdaptiveOptions options;
    options.rel_tol = 1e-13;
    options.abs_tol = 1e-15;
    Vec u(static_cast<std::size_t>(d));
    auto integrand = [&](const double* x) -> std::complex<double> {
        for (int i = 0; i < d; ++i) u[i] = x[i];
        const double rho = cutoff(u);
        return rho == 0.0 ? 0.0 : rho * surface.area_element(u);
    };
    const AdaptiveResult r = adaptive_integrate(integrand, box.lo, box.hi, options);
    if (!r.converged) throw Error(ErrorKind::QuadratureBudgetExceeded, "cutoff mass did not converge");
    return r.value.real();
}

// ---------------------------------------------------------------------------
// Type detection

std::vector<Vec> sample_directions(int ambient_dim, int count) {
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    if (ambient_dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = std::numbers::pi * (i + 0.5) / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else if (ambient_dim == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = (i + 0.5) / count;
            const double r = std::sqrt(1.0 - z * z);
            dirs.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
        }
    } else {
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> normal;
        for (int i = 0; i < count; ++i) {
            Vec v(static_cast<std::size_t>(ambient_dim));
            double len = 0.0;
            for (double& x : v) {
                x = normal(rng);
                len += x * x;
            }
            len = std::sqrt(len);
            const double sign = v[0] < 0 ? -1.0 : 1.0;
            for (double& x : v) x *= sign / len;
            dirs.push_back(v);
        }
    }
    return dirs;
}

TypeReport detect_type_order(const ParamSurface& surface, const Vec& u0, const TypeOptions& options) {
    if (options.k_max < 1) throw Error(ErrorKind::PreconditionFailed, "k_max must be >= 1");
    const int n = surface.ambient_dim();
    const int count = options.n_directions > 0 ? options.n_directions : (n == 2 ? 512 : 2048);

    // Component tables: entry (alpha) of phi_i.
    std::vector<DerivTable> components;
    for (int i = 0; i < n; ++i) {
        Vec e(static_cast<std::size_t>(n), 0.0);
        e[i] = 1.0;
        components.push_back(surface.directional_table(u0, e, options.k_max));
    }
    // The largest entry over all unit directions is the Euclidean norm of the
    // vector-valued derivative.
    double largest = 0.0;
    for (const auto& [alpha, v0] : components[0]) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += components[i].at(alpha) * components[i].at(alpha);
        largest = std::max(largest, std::sqrt(s));
    }
    TypeReport report;
    report.k_max = options.k_max;
    report.threshold_used = options.relative_threshold * largest;

    std::vector<Vec> dirs;
    dirs.push_back(surface.unit_normal(u0));
    for (auto& d : sample_directions(n, count)) dirs.push_back(std::move(d));

    int worst = 0;
    bool any_exceeds = false;
    for (const Vec& eta : dirs) {
        int min_order = -1;
        for (int k = 1; k <= options.k_max && min_order < 0; ++k) {
            for (const auto& [alpha, v0] : components[0]) {
                if (degree_of(alpha) != k) continue;
                double v = 0.0;
                for (int i = 0; i < n; ++i) v += eta[i] * components[i].at(alpha);
                if (std::abs(v) > report.threshold_used) {
                    min_order = k;
                    break;
                }
            }
        }
        report.table.push_back({eta, min_order});
        if (min_order < 0) {
            if (!any_exceeds) report.worst_direction = eta;
            any_exceeds = true;
        } else if (!any_exceeds && min_order > worst) {
            worst = min_order;
            report.worst_direction = eta;
        }
    }
    if (!any_exceeds) report.order = worst;
    return report;
}

// ---------------------------------------------------------------------------
// Gallery

namespace {

template <class T>
T horner(const Vec& coeffs, const T& x) {
    T acc(coeffs.back());
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = acc * x + T(coeffs[i]);
    return acc;
}

struct CircleChart {
    template <class T>
    void operator()(const T* u, T* out) const {
        using std::cos;
        using std::sin;
        out[0] = cos(u[0]);
        out[1] = sin(u[0]);
    }
};

struct ModelCurveChart {
    int k;
    Vec gamma;
    double offset;
    template <class T>
    void operator()(const T* u, T* out) const {
        out[0] = u[0];
        out[1] = horner(gamma, u[0]) * ipow(u[0], k) + T(offset);
    }
};

struct SegmentChart {
    template <class T>
    void operator()(const T* u, T* out) const {
        out[0] = u[0];
        out[1] = T(0.0);
    }
};

struct PowerGraphChart {
    int k1, k2;
    template <class T>
    void operator()(const T* u, T* out) const {
        out[0] = u[0];
        out[1] = u[1];
        out[2] = ipow(u[0], k1) + ipow(u[1], k2);
    }
};

struct SphereCapChart {
    template <class T>
    void operator()(const T* u, T* out) const {
        using std::sqrt;
        out[0] = u[0];
        out[1] = u[1];
        out[2] = sqrt(T(1.0) - u[0] * u[0] - u[1] * u[1]);
    }
};

struct PolynomialChart {
    struct Term {
        double coef;
        std::vector<int> powers;
    };
    std::vector<std::vector<Term>> components;
    template <class T>
    void operator()(const T* u, T* out) const {
        for (std::size_t c = 0; c < components.size(); ++c) {
            T acc(0.0);
            for (const Term& term : components[c]) {
                T prod(term.coef);
                for (std::size_t i = 0; i < term.powers.size(); ++i) {
                    if (term.powers[i] > 0) prod = prod * ipow(u[i], term.powers[i]);
                }
                acc = acc + prod;
            }
            out[c] = acc;
        }
    }
};

// Graph surfaces y_n = h(y'): defining function y_n - h(y').
template <int D, class Chart>
DefiningFunction graph_defining(Chart chart) {
    constexpr int n = D + 1;
    DefiningFunction f;
    f.value = [chart](const Vec& y) {
        Vec out(static_cast<std::size_t>(n));
        chart(y.data(), out.data());
        return y[static_cast<std::size_t>(n - 1)] - out[static_cast<std::size_t>(n - 1)];
    };
    f.gradient = [chart](const Vec& y) {
        const Eigen::MatrixXd jac = detail::dual_jacobian<Chart, D>(chart, n, y);
        Vec g(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n - 1; ++i) g[i] = -jac(n - 1, i);
        g[static_cast<std::size_t>(n - 1)] = 1.0;
        return g;
    };
    f.project = [](const Vec& y) { return Vec(y.begin(), y.begin() + (n - 1)); };
    return f;
}

DefiningFunction sphere_defining(int n) {
    DefiningFunction f;
    f.value = [](const Vec& y) {
        double s = 0.0;
        for (double v : y) s += v * v;
        return std::sqrt(s) - 1.0;
    };
    f.gradient = [](const Vec& y) {
        double s = 0.0;
        for (double v : y) s += v * v;
        s = std::sqrt(s);
        Vec g = y;
        for (double& v : g) v /= s;
        return g;
    };
    if (n == 2) {
        f.project = [](const Vec& y) { return Vec{std::atan2(y[1], y[0])}; };
    } else {
        f.project = [n](const Vec& y) { return Vec(y.begin(), y.begin() + (n - 1)); };
    }
    return f;
}

bool parse_int(std::string_view s, int& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_curve_k(std::string_view name, int& k) {
    if (name.rfind("curve-k", 0) != 0) return false;
    return parse_int(name.substr(7), k) && k >= 2;
}

bool parse_graph(std::string_view name, int& k1, int& k2) {
    if (name.rfind("graph-k", 0) != 0) return false;
    const auto rest = name.substr(7);
    const auto dash = rest.find("-k");
    if (dash == std::string_view::npos) return false;
    return parse_int(rest.substr(0, dash), k1) && parse_int(rest.substr(dash + 2), k2) && k1 >= 1 && k2 >= 1;
}

}  // namespace

ParamSurface model_curve(int k, Vec gamma, double offset, double half_width) {
    if (gamma.empty() || gamma[0] == 0.0) {
        throw Error(ErrorKind::PreconditionFailed, "model curve needs gamma(0) != 0");
    }
    ModelCurveChart chart{k, std::move(gamma), offset};
    auto s = ParamSurface::from_chart(chart, 2, Box{{-half_width}, {half_width}}, "curve-k" + std::to_string(k));
    s.set_defining(graph_defining<1>(chart));
    return s;
}

bool is_gallery_name(std::string_view name) {
    int a = 0, b = 0;
    return name == "circle" || name == "sphere" || name == "parabola" || name == "segment" ||
           parse_curve_k(name, a) || parse_graph(name, a, b);
}

ParamSurface gallery_surface(std::string_view name) {
    int k = 0, k2 = 0;
    if (name == "circle") {
        auto s = ParamSurface::from_chart(CircleChart{}, 2, Box{{-std::numbers::pi}, {std::numbers::pi}}, "circle", true);
        s.set_defining(sphere_defining(2));
        return s;
    }
    if (name == "sphere") {
        auto s = ParamSurface::from_chart(SphereCapChart{}, 3, Box{{-0.7, -0.7}, {0.7, 0.7}}, "sphere");
        s.set_defining(sphere_defining(3));
        return s;
    }
    if (name == "parabola") {
        ModelCurveChart chart{2, {1.0}, 0.0};
        auto s = ParamSurface::from_chart(chart, 2, Box{{-1.0}, {1.0}}, "parabola");
        s.set_defining(graph_defining<1>(chart));
        return s;
    }
    if (name == "segment") {
        auto s = ParamSurface::from_chart(SegmentChart{}, 2, Box{{-1.0}, {1.0}}, "segment");
        s.set_defining(graph_defining<1>(SegmentChart{}));
        return s;
    }
    if (parse_curve_k(name, k)) return model_curve(k);
    if (parse_graph(name, k, k2)) {
        PowerGraphChart chart{k, k2};
        auto s = ParamSurface::from_chart(chart, 3, Box{{-1.0, -1.0}, {1.0, 1.0}}, std::string(name));
        s.set_defining(graph_defining<2>(chart));
        return s;
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown gallery surface '" + std::string(name) + "'");
}

ParamSurface surface_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("chart JSON: ") + e.what());
    }
    try {
        const int n = j.at("ambient_dim").get<int>();
        Box box;
        for (const auto& iv : j.at("domain")) {
            box.lo.push_back(iv.at(0).get<double>());
            box.hi.push_back(iv.at(1).get<double>());
        }
        if (n < 2 || box.dim() != n - 1) throw Error(ErrorKind::ConfigInvalid, "domain must have ambient_dim - 1 intervals");
        PolynomialChart chart;
        for (const auto& comp : j.at("polynomial")) {
            std::vector<PolynomialChart::Term> terms;
            for (const auto& t : comp) {
                PolynomialChart::Term term{t.at("coef").get<double>(), t.at("powers").get<std::vector<int>>()};
                if (static_cast<int>(term.powers.size()) != n - 1) {
                    throw Error(ErrorKind::ConfigInvalid, "term powers must have ambient_dim - 1 entries");
                }
                terms.push_back(std::move(term));
            }
            chart.components.push_back(std::move(terms));
        }
        if (static_cast<int>(chart.components.size()) != n) {
            throw Error(ErrorKind::ConfigInvalid, "polynomial must list ambient_dim components");
        }
        return ParamSurface::from_chart(chart, n, box, j.value("label", std::string("user-polynomial")));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("chart JSON: ") + e.what());
    }
}

}  // namespace finitype
