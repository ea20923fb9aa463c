#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "finitype/geometry.hpp"

namespace finitype {

struct FtOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_panels = 1 << 18;
    double points_per_wavelength = 6.0;
    int gauss_points = 16;
};

struct FtResult {
    std::complex<double> value;
    int panels = 0;
    double error_estimate = 0.0;
};

// int exp(-i <phi(u), xi>) rho(u) |dphi| du over the cutoff support.
FtResult surface_measure_ft_report(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& xi,
                                   const FtOptions& options = {});
std::complex<double> surface_measure_ft(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& xi,
                                        const FtOptions& options = {});

struct FrequencySamples {
    Vec direction;
    std::vector<int> shell;
    Vec magnitudes;
    std::vector<std::complex<double>> values;
    std::vector<int> panels;
    Vec error_estimates;
    std::vector<int> missing_shells;
    double hermitian_error = 0.0;  // max |FT(-xi) - conj FT(xi)| over the spot checks
    int j_min = 0;
    int j_max = 0;
};

struct ScanOptions {
    FtOptions ft;
    std::uint64_t seed = 1;
};

// per_shell stratified log-uniform samples of |xi| in each [2^j, 2^(j+1)), j_min <= j <= j_max.
FrequencySamples decay_scan(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& direction,
                            int j_min, int j_max, int per_shell, const ScanOptions& options = {});

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    int j_min = 0;
    int j_max = 0;
    int shells = 0;
};

DecayFit fit_decay_exponent(const FrequencySamples& samples);

struct NormalCone {
    std::vector<Vec> generators;  // unit normals sampled over the cutoff support
    double angular_margin = 5.0 * 3.14159265358979323846 / 180.0;

    // Smallest angle between direction and any +-generator.
    double angle_to(const Vec& direction) const;
};

NormalCone normal_cone(const ParamSurface& surface, const CutoffProfile& cutoff, int samples_per_axis = 256);

DecayFit off_cone_check(const ParamSurface& surface, const CutoffProfile& cutoff, const Vec& direction,
                        const NormalCone& cone, int j_min, int j_max, int per_shell = 8,
                        const ScanOptions& options = {});

std::string samples_to_csv(const FrequencySamples& samples);
std::string fit_to_json(const DecayFit& fit);

}  // namespace finitype
