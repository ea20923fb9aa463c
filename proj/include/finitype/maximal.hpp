#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finitype/frequency.hpp"
#include "finitype/geometry.hpp"
#include "finitype/grid.hpp"

namespace finitype {

// t-samples 2^(l + k / per_octave) for l_min <= l < l_max, plus 2^l_max.
Vec dyadic_t_grid(int l_min, int l_max, int per_octave);

struct AveragingConfig {
    Vec t_grid;
    int interpolation = 3;          // 1: multilinear, 3: cubic Lagrange
    double nodes_per_cell = 2.0;    // quadrature nodes per grid cell along the dilated surface
    int min_nodes = 64;             // per chart axis

    void validate() const;
};

// Quadrature of the surface measure t * phi_* (rho dsigma): ambient offsets
// t phi(u_q) and weights w_q rho(u_q) |dphi(u_q)|.
struct SurfaceNodes {
    std::vector<Vec> offsets;
    Vec weights;
};

SurfaceNodes surface_nodes(const ParamSurface& surface, const CutoffProfile& cutoff, double t, double spacing,
                           const AveragingConfig& config);

struct AverageResult {
    std::complex<double> value;
    bool zero_extended = false;  // some sample fell outside a non-periodic grid and was read as 0
};

// M_t f(x) = int f(x - t phi(u)) rho(u) |dphi| du with grid interpolation.
AverageResult average_at(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff, double t,
                         const Vec& x, const AveragingConfig& config = {});

// g(x_i) = sum_q w_q I[f](x_i - offset_q) at every grid point, I the configured
// interpolant. Equals average_at on grid points when given the same nodes.
GridFunction average_grid(const GridFunction& f, const SurfaceNodes& nodes, int interpolation);

// Pointwise max over the configured t-grid of |M_t f|.
GridFunction maximal_grid(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                          const AveragingConfig& config);
// Same for an arbitrary translation-invariant family given by its nodes per t.
GridFunction maximal_from_nodes(const GridFunction& f, const Vec& t_grid,
                                const std::function<SurfaceNodes(double t)>& nodes, int interpolation);

// sup over radii {h/2, h, 2h, 4h, ...} (h the finest spacing, up to the box
// diameter) of discrete ball averages.
GridFunction hl_maximal(const GridFunction& f);

// Dyadic pieces on a periodic grid: convolution with the sampled kernels of
// the frequency module.
struct DyadicOptions {
    double shell = 0.75;  // normal half-width of the extension, in units of the defining function
};
GridFunction dyadic_piece_apply(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                int j, double t, const DyadicOptions& options = {});
// sum_{j' < j} of the pieces, as one low-pass kernel.
GridFunction lowpass_piece_apply(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                 int j, double t, const DyadicOptions& options = {});
// 2^j int t^-n |rho_ext((x - y)/t)| |f(y)| dy, the right-hand side of the kernel bound without 1/2pi int beta.
GridFunction kernel_bound_rhs(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                              int j, double t, const DyadicOptions& options = {});

struct KernelBoundReport {
    int j = 0;
    double t = 0.0;
    double measured_constant = 0.0;  // max |M_j f| / rhs over points with rhs > 0
    double reference = 0.0;          // (1/2pi) int beta
};
KernelBoundReport kernel_bound_check(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                     int j, double t, const DyadicOptions& options = {});
// Same check for several functions on one grid; the kernels are sampled once.
std::vector<KernelBoundReport> kernel_bound_check(const std::vector<GridFunction>& fs, const ParamSurface& surface,
                                                  const CutoffProfile& cutoff, int j, double t,
                                                  const DyadicOptions& options = {});

struct DominationReport {
    double c_obs = 0.0;
    std::size_t excluded = 0;  // points where the Hardy-Littlewood function vanished
};
// max |sum_{j <= 0} M_j f| / HL f at t = 1.
DominationReport low_freq_domination(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                     const DyadicOptions& options = {});

struct SupLemmaReport {
    double p = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    double constant = 0.0;  // ||psi'||_inf
};
// Time cutoff: S-rise on [1/2, 1], 1 on [1, 2], S-fall on [2, 4].
double sup_lemma_cutoff(double t);
double sup_lemma_cutoff_derivative(double t);
// F sampled uniformly on [1/2, 4] (first and last samples at the endpoints).
SupLemmaReport sup_lemma_check(const Vec& samples, double p);

struct TimeScaleReport {
    double ratio = 0.0;
    double ratio_half_step = 0.0;
    double step = 0.0;
};
// ||d_t M_j f||_2 / (2^j ||M_j f||_2) by central differences with step 2^(-j-3).
TimeScaleReport time_deriv_scale(const GridFunction& f, const ParamSurface& surface, const CutoffProfile& cutoff,
                                 int j, double t, const DyadicOptions& options = {});

// |y.nu|^(-1/p) log(2/|y.nu|)^(-2/p) on the unit ball, with |y.nu| capped
// below at the grid spacing; grid N^n on [-half_side, half_side]^n.
GridFunction sharpness_family(double p, const Vec& nu, int N, double half_side = 2.0);
double sharpness_profile(double p, double s);

struct ProbeReport {
    double p = 0.0;
    std::string family;
    std::vector<int> resolutions;
    Vec norm_f;
    Vec norm_mf;
    Vec ratios;
    double trend = 0.0;
};

using FamilyFn = std::function<GridFunction(int N)>;
using MaximalFn = std::function<GridFunction(const GridFunction& f)>;

ProbeReport ratio_probe(double p, const std::string& family_name, const FamilyFn& family,
                        const std::vector<int>& resolutions, const MaximalFn& maximal);
// The usual surface case: maximal_grid with the given config.
ProbeReport ratio_probe(double p, const ParamSurface& surface, const CutoffProfile& cutoff,
                        const std::string& family_name, const FamilyFn& family, const std::vector<int>& resolutions,
                        const AveragingConfig& config);

enum class TrendClass { Plateau, Growth, Inconclusive };
TrendClass classify_trend(double trend);
std::string to_string(TrendClass c);

struct LocalSmoothingOptions {
    int grid = 512;                  // periodic grid side
    double side = 3.14159265358979323846;
    double focus_time = 1.5;         // focusing data refocuses at this t
    double steps_per_wavelength = 4; // time samples per 2^-j
};

struct LocalSmoothingReport {
    double p = 0.0;
    std::vector<int> j;
    Vec fixed_time;   // max over family of sup_{t in [1,2]} ||P_j e^{itq} g||_p / ||g||_p
    Vec space_time;   // max over family of ||P_j e^{itq} g||_{L^p(x, t in [1/2,4])} / ||g||_p
    double a_fix = 0.0;
    double a_st = 0.0;
};

LocalSmoothingReport local_smoothing_probe(const std::vector<int>& j_range, double p,
                                           const std::function<double(const Vec&)>& q,
                                           const LocalSmoothingOptions& options = {});

std::string probe_to_json(const ProbeReport& r);
std::string probe_to_csv(const ProbeReport& r);
std::string sup_lemma_to_json(const SupLemmaReport& r);

}  // namespace finitype
