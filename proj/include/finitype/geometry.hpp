#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finitype/autodiff.hpp"
#include "finitype/errors.hpp"

namespace finitype {

using Vec = std::vector<double>;

struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& u, double slack = 1e-12) const;
};

// Implicit description {y : value(y) = 0} of a chart image, valid on a
// neighbourhood of the cutoff support. `project` maps an ambient point near
// the surface to the chart parameter of the corresponding surface point.
struct DefiningFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Vec(const Vec&)> project;
};

// Derivatives of u -> phi(u).eta at a base point, keyed by multi-index.
using DerivTable = std::map<std::vector<int>, double>;

// A hypersurface given by a single chart phi : U -> R^n, U an axis-aligned
// box in R^{n-1}. Gallery and polynomial charts carry exact derivatives via
// forward-mode jets; charts built from plain functions fall back to
// Richardson-extrapolated central differences.
class ParamSurface {
public:
    using PointFn = std::function<Vec(const Vec&)>;
    using JacobianFn = std::function<Eigen::MatrixXd(const Vec&)>;
    using JetFn = std::function<std::vector<Jet>(const std::vector<Jet>&)>;

    // Chart must provide `template <class T> void operator()(const T* u, T* out) const`.
    template <class Chart>
    static ParamSurface from_chart(Chart chart, int ambient_dim, Box domain, std::string label,
                                   bool periodic = false);

    // User chart without derivative rules.
    static ParamSurface from_function(PointFn point, int ambient_dim, Box domain, std::string label);

    int ambient_dim() const { return ambient_dim_; }
    int chart_dim() const { return ambient_dim_ - 1; }
    const Box& domain() const { return domain_; }
    bool periodic() const { return periodic_; }
    const std::string& label() const { return label_; }
    bool exact_derivatives() const { return static_cast<bool>(jets_); }
    int max_deriv_order() const { return exact_derivatives() ? 24 : 6; }

    Vec point(const Vec& u) const;
    Eigen::MatrixXd jacobian(const Vec& u) const;
    double area_element(const Vec& u) const;
    Vec unit_normal(const Vec& u) const;
    DerivTable directional_table(const Vec& u0, const Vec& eta, int max_order) const;

    const std::optional<DefiningFunction>& defining() const { return defining_; }
    void set_defining(DefiningFunction f) { defining_ = std::move(f); }

    // R o phi for an orthogonal R.
    ParamSurface rotated(const Eigen::MatrixXd& rotation) const;
    ParamSurface translated(const Vec& shift) const;
    // t * phi.
    ParamSurface dilated(double t) const;

    // Unchecked fast paths used by quadrature loops.
    Vec point_unchecked(const Vec& u) const { return point_(u); }
    Eigen::MatrixXd jacobian_unchecked(const Vec& u) const { return jacobian_(u); }

private:
    ParamSurface() = default;
    void require_in_chart(const Vec& u) const;
    double fd_derivative(const Vec& u0, const Vec& eta, const std::vector<int>& alpha) const;

    int ambient_dim_ = 0;
    Box domain_;
    bool periodic_ = false;
    std::string label_;
    PointFn point_;
    JacobianFn jacobian_;
    JetFn jets_;
    std::optional<DefiningFunction> defining_;
};

double area_element(const ParamSurface& surface, const Vec& u);
Vec chart_eval(const ParamSurface& surface, const Vec& u);
DerivTable directional_deriv_table(const ParamSurface& surface, const Vec& u0, const Vec& eta,
                                   int max_order);

// Samples the chart domain: throws DegenerateChart if the area element
// vanishes or two samples at chart distance >= delta land closer than
// c_min * delta in the ambient space.
void validate_chart(const ParamSurface& surface, int samples_per_axis = 24, double c_min = 1e-3);

// Cutoff rho on the chart domain. Smooth profiles use the rescaled bump
// exp(1 - 1/(1 - r^2)); a finite `order` m selects the C^m spline
// (1 - r^2)^(m+1). The plateau profile is the low-pass profile in r / radius,
// identically equal to the amplitude on the inner half ball. The uniform
// profile (for periodic charts) is constant.
class CutoffProfile {
public:
    static constexpr int kSmooth = -1;

    static CutoffProfile bump(Vec center, double radius, double amplitude = 1.0, int order = kSmooth);
    static CutoffProfile uniform(double amplitude = 1.0);
    static CutoffProfile plateau(Vec center, double radius, double amplitude = 1.0);

    double operator()(const Vec& u) const;
    bool is_uniform() const { return uniform_; }
    bool is_plateau() const { return plateau_; }
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }
    double amplitude() const { return amplitude_; }
    int order() const { return order_; }
    // Bounding box of the support intersected with the chart domain.
    Box support(const Box& domain) const;

private:
    Vec center_;
    double radius_ = 1.0;
    double amplitude_ = 1.0;
    int order_ = kSmooth;
    bool uniform_ = false;
    bool plateau_ = false;
};

// Total mass of rho * dsigma, by tensor Gauss-Legendre on the support.
double cutoff_mass(const ParamSurface& surface, const CutoffProfile& cutoff);

struct TypeReport {
    std::optional<int> order;  // empty: exceeds k_max
    Vec worst_direction;
    struct Entry {
        Vec direction;
        int min_order;  // -1 when nothing up to k_max clears the threshold
    };
    std::vector<Entry> table;
    double threshold_used = 0.0;
    int k_max = 0;

    bool exceeds() const { return !order.has_value(); }
};

struct TypeOptions {
    int k_max = 8;
    int n_directions = 0;  // 0: 512 for n = 2, 2048 for n = 3
    double relative_threshold = 1e-7;
};

// Unit directions on the half sphere (antipodes identified).
std::vector<Vec> sample_directions(int ambient_dim, int count);

TypeReport detect_type_order(const ParamSurface& surface, const Vec& u0, const TypeOptions& options = {});

// Gallery: "circle", "sphere", "parabola", "curve-k{K}", "graph-k{K1}-k{K2}", "segment".
ParamSurface gallery_surface(std::string_view name);
bool is_gallery_name(std::string_view name);

// C(s) = (s, gamma(s) s^k + c), gamma a polynomial with gamma(0) != 0.
ParamSurface model_curve(int k, Vec gamma = {1.0}, double offset = 0.0, double half_width = 1.0);

// Chart from the JSON description {ambient_dim, domain, polynomial}; see README.
ParamSurface surface_from_json(const std::string& json_text);

// ---------------------------------------------------------------------------

namespace detail {

template <class Chart, int D>
Eigen::MatrixXd dual_jacobian(const Chart& chart, int n, const Vec& u) {
    std::vector<Dual<D>> in(D), out(static_cast<std::size_t>(n));
    for (int i = 0; i < D; ++i) in[i] = Dual<D>::variable(u[static_cast<std::size_t>(i)], i);
    chart(in.data(), out.data());
    Eigen::MatrixXd jac(n, D);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < D; ++c) jac(r, c) = out[static_cast<std::size_t>(r)].d[c];
    }
    return jac;
}

}  // namespace detail

template <class Chart>
ParamSurface ParamSurface::from_chart(Chart chart, int ambient_dim, Box domain, std::string label, bool periodic) {
    ParamSurface s;
    s.ambient_dim_ = ambient_dim;
    s.domain_ = std::move(domain);
    s.periodic_ = periodic;
    s.label_ = std::move(label);
    const int n = ambient_dim;
    s.point_ = [chart, n](const Vec& u) {
        Vec out(static_cast<std::size_t>(n));
        chart(u.data(), out.data());
        return out;
    };
    switch (n - 1) {
        case 1: s.jacobian_ = [chart, n](const Vec& u) { return detail::dual_jacobian<Chart, 1>(chart, n, u); }; break;
        case 2: s.jacobian_ = [chart, n](const Vec& u) { return detail::dual_jacobian<Chart, 2>(chart, n, u); }; break;
        case 3: s.jacobian_ = [chart, n](const Vec& u) { return detail::dual_jacobian<Chart, 3>(chart, n, u); }; break;
        default: throw Error(ErrorKind::DegenerateChart, "charts of dimension > 3 are not supported");
    }
    s.jets_ = [chart, n](const std::vector<Jet>& u) {
        std::vector<Jet> out(static_cast<std::size_t>(n));
        chart(u.data(), out.data());
        return out;
    };
    return s;
}

}  // namespace finitype
