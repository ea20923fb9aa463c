#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "finitype/autodiff.hpp"
#include "finitype/geometry.hpp"
#include "finitype/grid.hpp"
#include "finitype/maximal.hpp"

namespace finitype {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double t) const { return t >= lo && t <= hi; }
};

// Surface distribution D_t = {(x, y) : x_1 - y_1 = A(x, y', t)} with cutoff
// psi(x, y, t). S_{x,t} is parametrized by y' with y_1 = x_1 - A(x, y', t).
class CurveDistribution {
public:
    using ValueFn = std::function<double(const Vec& x, const Vec& yp, double t)>;
    using JetFn = std::function<Jet(const std::vector<Jet>& x, const std::vector<Jet>& yp, const Jet& t)>;
    using CutoffFn = std::function<double(const Vec& x, const Vec& y, double t)>;
    // Box in y' outside of which psi(x, ., t) vanishes.
    using SupportFn = std::function<Box(const Vec& x, double t)>;

    // Formula must provide `template <class T> T operator()(const T* x, const T* yp, const T& t) const`.
    template <class Formula>
    static CurveDistribution from_formula(Formula formula, int n, CutoffFn psi, SupportFn support, Interval t_range,
                                          std::string label);
    // A without derivative rules; derivatives fall back to finite differences.
    static CurveDistribution from_function(ValueFn a, int n, CutoffFn psi, SupportFn support, Interval t_range,
                                           std::string label);

    int ambient_dim() const { return n_; }
    const Interval& t_range() const { return t_range_; }
    const std::string& label() const { return label_; }
    bool exact_derivatives() const { return static_cast<bool>(jet_); }
    // A depends on x' - y' and t only, so M_t is a convolution.
    bool translation_invariant() const { return translation_invariant_; }
    void set_translation_invariant(bool v) { translation_invariant_ = v; }

    double A(const Vec& x, const Vec& yp, double t) const { return a_(x, yp, t); }
    double psi(const Vec& x, const Vec& y, double t) const { return psi_(x, y, t); }
    Box support(const Vec& x, double t) const { return support_(x, t); }
    // Point of S_{x,t} over y'.
    Vec surface_point(const Vec& x, const Vec& yp, double t) const;

    // Phi = x_1 - y_1 - A and its derivatives in (x, y) at fixed t.
    struct PhiDerivs {
        double value = 0.0;
        Vec dx, dy;
        Eigen::MatrixXd dxy;  // (i, j) = d^2 Phi / dy_i dx_j
    };
    PhiDerivs phi_derivs(const Vec& x, const Vec& y, double t, bool finite_difference = false) const;
    // grad_{y'} A, for the surface-measure density.
    Vec grad_yp_A(const Vec& x, const Vec& yp, double t, bool finite_difference = false) const;

    // Frozen curve y_2 -> (x0_1 - A(x0, (y_2, 0, ..), t0), y_2) on [-half_width, half_width].
    ParamSurface frozen_curve(const Vec& x0, double t0, double half_width) const;

    // Samples the cutoff support: A must be finite and |grad_y Phi| > 0.
    void validate(int samples_per_axis = 9) const;

private:
    CurveDistribution() = default;

    int n_ = 0;
    ValueFn a_;
    JetFn jet_;
    CutoffFn psi_;
    SupportFn support_;
    Interval t_range_;
    std::string label_;
    bool translation_invariant_ = false;
    std::function<ParamSurface(const Vec&, double, double)> frozen_;
};

// Gallery (n = 2): "parabolas", "cubic-fold", "quartic-fold", "circles",
// "linear-degenerate", and "fold-k{K}" for A = t + (x_2 - y_2)^K.
CurveDistribution gallery_distribution(std::string_view name);
bool is_gallery_distribution(std::string_view name);
// A = t + (x_2 - y_2)^k with psi a bump of the given radius in x_2 - y_2.
CurveDistribution fold_distribution(int k, double radius = 0.5);

double defining_eval(const CurveDistribution& dist, const Vec& x, const Vec& y, double t);

struct MongeAmpereOptions {
    bool finite_difference = false;  // force the finite-difference path
    bool swap_roles = false;         // border with Phi_y and use Phi_yx
};
// det [[0, Phi_x^T], [Phi_y, Phi_yx]].
double monge_ampere(const CurveDistribution& dist, const Vec& x, const Vec& y, double t,
                    const MongeAmpereOptions& options = {});

struct SigmaSample {
    Vec x;
    Vec y;
    double J = 0.0;
};

struct CanonicalDiagnostics {
    double min_abs_J = 0.0;
    double median_abs_J = 0.0;
    double threshold = 0.0;
    std::size_t scanned = 0;
    std::vector<SigmaSample> sigma_samples;  // lexicographic in (x, y')
    std::vector<int> vanishing_orders;
    std::vector<int> cone_coranks;
};

struct ScanRegion {
    Box x;           // n-dimensional box of base points
    int points = 9;  // per axis, over x and over the y' support box
};

// Grid scan of |J_t| over (x, y') with y on S_{x,t} and psi > 0. Threshold
// <= 0 selects 1e-4 times the median |J|. Sign changes along grid edges are
// refined by bisection.
CanonicalDiagnostics nondegeneracy_scan(const CurveDistribution& dist, const ScanRegion& region, double t,
                                        double threshold = 0.0);

struct VanishingOptions {
    double s_max = 0.1;
    double decades = 2.0;
    int points = 9;
    double tolerance = 0.15;
    double transversality = 0.5;
    double sigma_threshold = 1e-6;  // |J| at the base point, relative to |J| at s_max
};

struct VanishingReport {
    int order = 0;
    double slope = 0.0;
    double transversality = 0.0;
};

// Order m of J along the line (x, y') + s * direction in the (x, y')
// coordinates of the incidence manifold.
VanishingReport vanishing_order(const CurveDistribution& dist, const SigmaSample& sigma_point, const Vec& direction,
                                double t, const VanishingOptions& options = {});

// Corank of the xi-Hessian of a degree-1 homogeneous symbol.
int cone_corank(const std::function<double(const Vec&)>& q, const Vec& xi);

enum class MeasureConvention {
    Surface,  // psi times Lebesgue measure on S_{x,t} (psi replaced by |grad Phi| psi in the delta form)
    Delta,    // delta(Phi) psi dy, i.e. psi dy'
};

struct VarcoefConfig {
    MeasureConvention convention = MeasureConvention::Surface;
    int interpolation = 3;
    double nodes_per_cell = 2.0;
    int min_nodes = 64;
};

// M_t f(x) = int f(y) psi(x, y, t) w(y') dy' over y on S_{x,t}.
AverageResult varcoef_average(const GridFunction& f, const CurveDistribution& dist, double t, const Vec& x,
                              const VarcoefConfig& config = {});
// Nodes of M_t as offsets x - y at x = 0, for translation-invariant distributions.
SurfaceNodes varcoef_nodes(const CurveDistribution& dist, double t, double spacing, const VarcoefConfig& config = {});
// sup over t_grid of |M_t f|. Convolution path when translation invariant, pointwise otherwise.
GridFunction varcoef_maximal(const GridFunction& f, const CurveDistribution& dist, const Vec& t_grid,
                             const VarcoefConfig& config = {});

std::string diagnostics_to_json(const CanonicalDiagnostics& d);
// Columns: x_1..x_n, y_1..y_n, J.
std::string sigma_to_csv(const CanonicalDiagnostics& d);

// ---------------------------------------------------------------------------

namespace detail {

template <class Formula>
struct FrozenChart {
    Formula formula;
    Vec x0;
    double t0;

    template <class T>
    void operator()(const T* u, T* out) const {
        const std::size_t n = x0.size();
        std::vector<T> x(n), yp(n - 1, T(0.0));
        for (std::size_t i = 0; i < n; ++i) x[i] = T(x0[i]);
        yp[0] = u[0];
        out[0] = T(x0[0]) - formula(x.data(), yp.data(), T(t0));
        out[1] = u[0];
    }
};

}  // namespace detail

template <class Formula>
CurveDistribution CurveDistribution::from_formula(Formula formula, int n, CutoffFn psi, SupportFn support,
                                                  Interval t_range, std::string label) {
    CurveDistribution d;
    d.n_ = n;
    d.psi_ = std::move(psi);
    d.support_ = std::move(support);
    d.t_range_ = t_range;
    d.label_ = std::move(label);
    d.a_ = [formula](const Vec& x, const Vec& yp, double t) { return formula(x.data(), yp.data(), t); };
    d.jet_ = [formula](const std::vector<Jet>& x, const std::vector<Jet>& yp, const Jet& t) {
        return formula(x.data(), yp.data(), t);
    };
    const std::string curve_label = d.label_ + "-frozen";
    d.frozen_ = [formula, curve_label](const Vec& x0, double t0, double half_width) {
        return ParamSurface::from_chart(detail::FrozenChart<Formula>{formula, x0, t0}, 2,
                                        Box{{-half_width}, {half_width}}, curve_label);
    };
    return d;
}

}  // namespace finitype
