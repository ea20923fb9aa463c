#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "finitype/geometry.hpp"
#include "finitype/grid.hpp"
#include "finitype/profile.hpp"

namespace finitype {

// Phi(|xi|).
double lowpass_eval(const Vec& xi);
// beta(2^-j xi), supported in 2^(j-1) <= |xi| <= 2^(j+1).
double dyadic_bump(int j, const Vec& xi);
// max |sum_{|j| <= J} beta(2^-j xi) - 1| over the samples; every |xi| must lie
// in [2^(-J+1), 2^(J-1)].
double partition_check(const std::vector<Vec>& xi_set, int J);

using Multiplier = std::function<std::complex<double>(const Vec& xi)>;

// Inverse DFT of m(xi) * DFT(f) on the lattice frequencies of a periodic grid.
GridFunction apply_multiplier(const GridFunction& f, const Multiplier& m);

// Multiplier beta(2^-k |xi|); NyquistViolation unless nyquist(f) > 2^(k+1).
GridFunction lp_project(const GridFunction& f, int k);
std::vector<double> lp_multiplier(const GridFunction& f, int k);
// sum_{k = k_lo..k_hi} L_k in telescoped form Phi(2^-(k_hi+1) |xi|) - Phi(2^-k_lo |xi|).
// No Nyquist requirement: above the grid's band the multiplier is simply evaluated.
GridFunction lp_band(const GridFunction& f, int k_lo, int k_hi);

// e^{i t q(xi)} beta(2^-j |xi|) applied to g.
GridFunction wave_piece(const GridFunction& g, int j, double t, const std::function<double(const Vec&)>& q);

// One-dimensional transforms b(s) = int_R e^{i s sigma} w(sigma) d sigma for
// w = beta (the dyadic bump) and w = Phi (the low-pass profile), tabulated on
// 0 <= s <= s_max at spacing 2^-4 and interpolated by cubic Lagrange. Both are
// even and real. Beyond s_max the tail model C_N (1 + |s|)^-N (N = 6) bounds
// the value.
class BumpTransform {
public:
    static const BumpTransform& instance();

    double beta(double s) const;
    double lowpass(double s) const;
    double s_max() const { return s_max_; }
    // Smallest s past which the tabulated values are below the roundoff floor.
    double reliable_limit() const { return reliable_; }
    // C_N = sup |b_beta(s)| (1 + |s|)^N over the table, N = 0..6.
    double tail_constant(int N) const { return tail_[static_cast<std::size_t>(N)]; }
    // Largest violation of |b| <= C_N (1+|s|)^-N + floor over the table (should be <= 0).
    double tail_check(int N) const;
    double roundoff_floor() const { return floor_; }

    BumpTransform();

private:
    double interpolate(const std::vector<double>& table, double s) const;

    double step_ = 1.0 / 16.0;
    double s_max_ = 16384.0;
    double reliable_ = 0.0;
    double floor_ = 1e-13;
    std::vector<double> beta_;
    std::vector<double> lowpass_;
    std::vector<double> tail_;
};

// Spatial data of the dyadic surface kernel. The weight
// rho_ext(y) = rho(project(y)) |grad Phi_def(y)| chi(Phi_def(y)) extends the
// cutoff off the surface; chi is the low-pass profile in |Phi_def| / shell
// and equals 1 on the surface, so rho_ext delta(Phi_def) = rho dsigma.
struct DyadicKernelSpec {
    const ParamSurface* surface = nullptr;
    CutoffProfile cutoff = CutoffProfile::uniform();
    int j = 0;
    double t = 1.0;
    double shell = 0.25;
    double tail_tolerance = 1e-12;
};

double extended_weight(const DyadicKernelSpec& spec, const Vec& y);

// (1/2pi) t^-n rho_ext(y/t) 2^j b_beta(2^j Phi_def(y/t)).
double dyadic_kernel_eval(const DyadicKernelSpec& spec, const Vec& y);
// Low-frequency remainder sum_{j' < j} of the same: (1/2pi) t^-n rho_ext 2^j b_Phi(2^j Phi_def).
double lowpass_kernel_eval(const DyadicKernelSpec& spec, const Vec& y);

}  // namespace finitype
