#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "finitype/oscillatory.hpp"
#include "oracles.hpp"

using namespace finitype;

TEST_CASE("FT at zero frequency is the mass") {
    auto par = gallery_surface("parabola");
    auto rho = CutoffProfile::bump({0.1}, 0.6);
    const auto v = surface_measure_ft(par, rho, {0.0, 0.0});
    const double mass = cutoff_mass(par, rho);
    CHECK(std::abs(v.real() - mass) < 1e-8 * mass);
    CHECK(std::abs(v.imag()) < 1e-14);
}

TEST_CASE("circle FT matches 2 pi J0") {
    auto circle = gallery_surface("circle");
    for (double r : {5.0, 20.0, 100.0}) {
        const auto v = surface_measure_ft(circle, CutoffProfile::uniform(), {r * 0.6, r * 0.8});
        const double expect = 2.0 * std::numbers::pi * oracle::bessel_j0(r);
        CHECK(std::abs(v.real() - expect) <= 1e-6 * std::abs(expect));
        CHECK(std::abs(v.imag()) < 1e-9);
    }
}

TEST_CASE("Hermitian symmetry, translation modulation and dilation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    auto c = gallery_surface("curve-k3");
    auto rho = CutoffProfile::bump({0.0}, 0.8);
    for (int trial = 0; trial < 5; ++trial) {
        const Vec xi{u(rng), u(rng)};
        const auto a = surface_measure_ft(c, rho, xi);
        const auto b = surface_measure_ft(c, rho, {-xi[0], -xi[1]});
        CHECK(std::abs(a - std::conj(b)) < 1e-9);

        const Vec v{0.1 * u(rng), 0.1 * u(rng)};
        const auto shifted = surface_measure_ft(c.translated(v), rho, xi);
        CHECK(std::abs(std::abs(shifted) - std::abs(a)) < 1e-9);
        const auto phase = std::polar(1.0, -(v[0] * xi[0] + v[1] * xi[1]));
        CHECK(std::abs(shifted - phase * a) < 1e-8);

        // chart t*phi has area element t|phi'|, so FT_t(xi) = t FT(t xi).
        const double t = 1.7;
        const auto dil = surface_measure_ft(c.dilated(t), rho, xi);
        const auto ref = surface_measure_ft(c, rho, {t * xi[0], t * xi[1]});
        CHECK(std::abs(dil - t * ref) < 1e-8 * (1.0 + std::abs(ref)));
    }
}

TEST_CASE("fit of an exact power law") {
    FrequencySamples s;
    for (int j = 3; j <= 8; ++j) {
        for (int k = 0; k < 3; ++k) {
            const double m = std::exp2(j + k / 3.0);
            s.shell.push_back(j);
            s.magnitudes.push_back(m);
            s.values.push_back(std::pow(m, -0.5));
            s.panels.push_back(0);
        }
    }
    const DecayFit fit = fit_decay_exponent(s);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);
    CHECK(fit.shells == 6);

    FrequencySamples few;
    for (int j = 3; j <= 5; ++j) {
        few.shell.push_back(j);
        few.magnitudes.push_back(std::exp2(j));
        few.values.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_decay_exponent(few), Error);
}

TEST_CASE("circle decays at rate one half") {
    auto s = decay_scan(gallery_surface("circle"), CutoffProfile::uniform(), {1.0, 0.0}, 4, 9, 128);
    CHECK(s.values.size() == 6 * 128);
    CHECK(s.hermitian_error < 1e-8);
    for (std::size_t i = 1; i < s.magnitudes.size(); ++i) CHECK(s.magnitudes[i] > s.magnitudes[i - 1]);
    CHECK(std::abs(fit_decay_exponent(s).slope + 0.5) < 0.03);
}

TEST_CASE("finite type curves decay at rate 1/k") {
    for (int k : {2, 3, 4, 6}) {
        auto c = gallery_surface("curve-k" + std::to_string(k));
        auto s = decay_scan(c, CutoffProfile::plateau({0.0}, 1.0), {0.0, 1.0}, 6, 11, 16);
        CHECK(std::abs(fit_decay_exponent(s).slope + 1.0 / k) < 0.05);
    }
}

TEST_CASE("segment does not decay in the normal direction") {
    auto s = decay_scan(gallery_surface("segment"), CutoffProfile::bump({0.0}, 0.9), {0.0, 1.0}, 4, 8, 4);
    for (const auto& v : s.values) CHECK(std::abs(v) > 0.5);
}

TEST_CASE("slope is stable under sampling and tolerance changes") {
    auto c = gallery_surface("curve-k3");
    auto rho = CutoffProfile::plateau({0.0}, 1.0);
    const double base = fit_decay_exponent(decay_scan(c, rho, {0.0, 1.0}, 6, 11, 8)).slope;
    const double dense = fit_decay_exponent(decay_scan(c, rho, {0.0, 1.0}, 6, 11, 16)).slope;
    ScanOptions tight;
    tight.ft.rel_tol = 1e-9;
    const double tighter = fit_decay_exponent(decay_scan(c, rho, {0.0, 1.0}, 6, 11, 8, tight)).slope;
    CHECK(std::abs(dense - base) < 0.02);
    CHECK(std::abs(tighter - base) < 0.02);
}

TEST_CASE("on-cone rate (n-1)/2 for curved gallery surfaces") {
    auto par = fit_decay_exponent(
        decay_scan(gallery_surface("parabola"), CutoffProfile::plateau({0.0}, 1.0), {0.0, 1.0}, 4, 9, 16));
    CHECK(std::abs(par.slope + 0.5) < 0.05);
    // The graph chart of the sphere caps |u| <= 0.7; cost limits the shells.
    auto sph = fit_decay_exponent(decay_scan(gallery_surface("sphere"), CutoffProfile::bump({0.0, 0.0}, 0.7),
                                             {0.0, 0.0, 1.0}, 3, 6, 2));
    CHECK(std::abs(sph.slope + 1.0) < 0.05);
}

TEST_CASE("off-cone decay is rapid") {
    auto par = gallery_surface("parabola");
    auto piece = CutoffProfile::bump({0.0}, 0.5);
    auto cone = normal_cone(par, piece);
    CHECK(off_cone_check(par, piece, {1.0, 0.0}, cone, 4, 8).slope <= -3.0);

    auto k4 = gallery_surface("curve-k4");
    auto away = CutoffProfile::bump({0.5}, 0.35);
    CHECK(off_cone_check(k4, away, {1.0, 0.0}, normal_cone(k4, away), 4, 8).slope <= -3.0);

    auto circle = gallery_surface("circle");
    auto full = CutoffProfile::uniform();
    try {
        off_cone_check(circle, full, {0.6, 0.8}, normal_cone(circle, full), 4, 8);
        FAIL("expected DirectionInsideCone");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DirectionInsideCone);
    }
}

TEST_CASE("budget exhaustion is reported per shell") {
    ScanOptions tiny;
    tiny.ft.max_panels = 4;
    auto s = decay_scan(gallery_surface("circle"), CutoffProfile::uniform(), {1.0, 0.0}, 4, 6, 2, tiny);
    CHECK(s.missing_shells.size() == 3);
    CHECK(s.values.empty());
}

TEST_CASE("serialization") {
    auto s = decay_scan(gallery_surface("parabola"), CutoffProfile::bump({0.0}, 0.5), {0.0, 1.0}, 2, 5, 1);
    const std::string csv = samples_to_csv(s);
    CHECK(csv.rfind("shell_j,xi_magnitude,re,im,abs,panels\n", 0) == 0);
    const std::string js = fit_to_json(fit_decay_exponent(s));
    CHECK(js.find("\"slope\"") != std::string::npos);
}
