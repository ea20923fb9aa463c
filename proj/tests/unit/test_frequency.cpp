#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "finitype/frequency.hpp"

using namespace finitype;

namespace {

GridFunction trig_poly(int n, std::uint64_t seed, int max_freq) {
    GridFunction g = periodic_grid(2, n, 2.0 * std::numbers::pi);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> fq(-max_freq, max_freq);
    std::normal_distribution<double> amp;
    std::vector<std::array<double, 4>> terms;
    for (int k = 0; k < 12; ++k) terms.push_back({double(fq(rng)), double(fq(rng)), amp(rng), amp(rng)});
    g.fill([&](const Vec& x) {
        double v = 0.0;
        for (const auto& t : terms) v += t[2] * std::cos(t[0] * x[0] + t[1] * x[1]) + t[3] * std::sin(t[0] * x[0] + t[1] * x[1]);
        return v;
    });
    return g;
}

double l2_diff(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
    return std::sqrt(s * a.cell_volume());
}

}  // namespace

TEST_CASE("profile values") {
    CHECK(lowpass_eval({0.4, 0.0}) == 1.0);
    CHECK(lowpass_eval({1.5}) == 0.0);
    const double a = lowpass_eval({0.75, 0.0});
    CHECK(a > 0.0);
    CHECK(a < 1.0);
    CHECK(lowpass_eval({0.75 * 0.6, 0.75 * 0.8}) == a);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(std::abs(smooth_step(x) + smooth_step(1.0 - x) - 1.0) < 1e-15);
    double prev = 1.0;
    for (double r = 0.0; r <= 1.2; r += 0.001) {
        const double v = lowpass(r);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("dyadic bump values and support") {
    CHECK(dyadic_bump(0, {1.0}) == 1.0);
    CHECK(dyadic_bump(3, {2.0, 0.0}) == 0.0);
    CHECK(dyadic_bump(0, {4.0}) == 0.0);
    for (double r = 0.0; r < 5.0; r += 0.013) {
        const double b = bump(r);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
        if (r < 0.5 || r > 2.0) CHECK(b == 0.0);
    }
}

TEST_CASE("partition of unity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-19.0, 19.0);
    std::vector<Vec> xs;
    for (int i = 0; i < 10000; ++i) {
        const double r = std::exp2(u(rng));
        xs.push_back({r * 0.6, r * 0.8});
    }
    CHECK(partition_check(xs, 20) <= 1e-10);
    CHECK(partition_check({{1.0}}, 20) <= 1e-12);
    try {
        partition_check({{std::exp2(20.0)}}, 20);
        FAIL("expected SampleOutsideCoveredRange");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SampleOutsideCoveredRange);
    }
}

TEST_CASE("FFT round trip and grid serialization") {
    GridFunction g = trig_poly(64, 5, 10);
    auto copy = g.values;
    fft_forward(copy, g.shape);
    fft_inverse(copy, g.shape);
    double worst = 0.0;
    for (std::size_t i = 0; i < copy.size(); ++i) worst = std::max(worst, std::abs(copy[i] - g.values[i]));
    CHECK(worst < 1e-12);

    g.complex_valued = true;
    g.values[3] = {1.5, -2.25};
    const auto bytes = grid_to_binary(g);
    const GridFunction back = grid_from_binary(bytes);
    CHECK(back.shape == g.shape);
    CHECK(back.box.lo == g.box.lo);
    CHECK(back.periodic);
    CHECK(back.values == g.values);
    CHECK(grid_to_binary(back) == bytes);
    CHECK_THROWS_AS(grid_from_binary({1, 2, 3}), Error);
    CHECK_THROWS_AS(GridFunction({12, 12}, Box{{0, 0}, {1, 1}}, true), Error);

    GridFunction small({2, 2}, Box{{0, 0}, {1, 1}}, false);
    CHECK(grid_to_csv(small).rfind("x0,x1,re,im\n", 0) == 0);
}

TEST_CASE("Littlewood-Paley projections") {
    const int k = 4;
    GridFunction wave = periodic_grid(2, 128, 2.0 * std::numbers::pi);
    wave.fill([&](const Vec& x) { return std::cos(16.0 * x[0]); });
    const GridFunction p = lp_project(wave, k);
    CHECK(l2_diff(p, wave) < 1e-10);

    GridFunction c = periodic_grid(2, 128, 2.0 * std::numbers::pi);
    c.fill([](const Vec&) { return 3.0; });
    CHECK(lp_project(c, 2).lp_norm(2.0) < 1e-12);

    try {
        lp_project(wave, 6);
        FAIL("expected NyquistViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NyquistViolation);
    }

    // Band-limited f: the shells k = -1..4 cover every lattice frequency 1 <= |xi| <= 16.
    GridFunction f = trig_poly(128, 9, 10);
    double mean = 0.0;
    for (const auto& v : f.values) mean += v.real();
    mean /= static_cast<double>(f.size());
    GridFunction sum = f;
    for (auto& v : sum.values) v = 0.0;
    for (int kk = -1; kk <= 4; ++kk) {
        const GridFunction pk = lp_project(f, kk);
        for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] += pk.values[i];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(sum.values[i] - (f.values[i] - mean)));
    CHECK(worst < 1e-10);

    // Multiplier matches the profile exactly on the lattice.
    const auto m = lp_multiplier(f, 3);
    for (std::size_t i = 0; i < f.size(); i += 7) CHECK(m[i] == dyadic_bump(3, lattice_frequency(f, i)));

    // Bernstein: |d_x L_k f| <= 2^(k+1) |L_k f|.
    for (int kk = 1; kk <= 4; ++kk) {
        const GridFunction pk = lp_project(f, kk);
        const GridFunction dx = apply_multiplier(pk, [](const Vec& xi) { return std::complex<double>(0.0, xi[0]); });
        CHECK(dx.lp_norm(2.0) <= std::ldexp(1.0, kk + 1) * pk.lp_norm(2.0) * (1.0 + 1e-9));
    }

    // The telescoped band equals the sum of its shells when they are all resolved.
    GridFunction band = lp_band(f, 1, 3);
    GridFunction shells = lp_project(f, 1);
    for (int kk = 2; kk <= 3; ++kk) {
        const GridFunction pk = lp_project(f, kk);
        for (std::size_t i = 0; i < f.size(); ++i) shells.values[i] += pk.values[i];
    }
    CHECK(l2_diff(band, shells) < 1e-10);
}

TEST_CASE("wave pieces") {
    GridFunction g = trig_poly(64, 21, 14);
    const int j = 3;
    const GridFunction p = lp_project(g, j);
    auto absq = [](const Vec& xi) { return std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]); };
    CHECK(l2_diff(wave_piece(g, j, 0.0, absq), p) < 1e-12);
    CHECK(std::abs(wave_piece(g, j, 1.3, absq).lp_norm(2.0) - p.lp_norm(2.0)) < 1e-10);

    // q = v.xi translates by -v t; choose v t equal to 5 grid cells along x.
    const double h = g.spacing(0);
    const double t = 1.0;
    const Vec v{5.0 * h, 0.0};
    const GridFunction moved = wave_piece(g, j, t, [&](const Vec& xi) { return v[0] * xi[0] + v[1] * xi[1]; });
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto idx = g.multi_index(i);
        idx[0] = (idx[0] + 5) % 64;
        worst = std::max(worst, std::abs(moved.values[i] - p.values[g.flat_index(idx)]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("bump transform table") {
    const auto& T = BumpTransform::instance();
    CHECK(T.beta(0.0) == kBumpIntegral);
    CHECK(T.lowpass(0.0) == 2.0 * kLowpassHalfMass);
    // Independent Riemann-sum oracle for b_beta(s) = 2 int_0^2 cos(s x) beta(x) dx.
    for (double s : {0.5, 3.3, 10.0, 30.7}) {
        const int n = 100000;
        const double hx = 2.0 / n;
        double sum = 0.0;
        for (int i = 1; i < n; ++i) sum += std::cos(s * i * hx) * bump(i * hx);
        CHECK(std::abs(T.beta(s) - 2.0 * sum * hx) < 1e-6);
    }
    for (double s = 0.0; s < 200.0; s += 0.37) CHECK(std::abs(T.beta(s)) <= kBumpIntegral + 1e-12);
    for (int N = 0; N <= 6; ++N) CHECK(T.tail_check(N) <= 0.0);
}

TEST_CASE("dyadic kernel values") {
    auto circle = gallery_surface("circle");
    DyadicKernelSpec spec;
    spec.surface = &circle;
    spec.j = 10;
    const double peak = std::ldexp(1.0, 10) / (2.0 * std::numbers::pi) * kBumpIntegral;
    CHECK(dyadic_kernel_eval(spec, {0.6, 0.8}) == doctest::Approx(peak).epsilon(1e-12));

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    for (int i = 0; i < 200; ++i) {
        const Vec y{u(rng), u(rng)};
        CHECK(std::abs(dyadic_kernel_eval(spec, y)) <= peak * extended_weight(spec, y) + 1e-15);
    }
    // 2^j Phi_def(y) = 100.
    const double r = 1.0 + 100.0 / 1024.0;
    const double v = dyadic_kernel_eval(spec, {r, 0.0});
    const double c4 = BumpTransform::instance().tail_constant(4);
    CHECK(extended_weight(spec, {r, 0.0}) > 0.0);
    CHECK(std::abs(v) <= std::ldexp(1.0, 10) / (2.0 * std::numbers::pi) * extended_weight(spec, {r, 0.0}) * c4 *
                             std::pow(101.0, -4.0));
}

TEST_CASE("dyadic kernels telescope to the surface mass") {
    auto circle = gallery_surface("circle");
    auto rho = CutoffProfile::uniform(0.5);
    const double mass = cutoff_mass(circle, rho);
    const int n = 768;
    const double side = 3.0, h = side / n;
    double total = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const Vec y{-1.5 + (a + 0.5) * h, -1.5 + (b + 0.5) * h};
            DyadicKernelSpec spec;
            spec.surface = &circle;
            spec.cutoff = rho;
            spec.shell = 0.5;
            spec.j = 2;
            double v = lowpass_kernel_eval(spec, y);
            for (int j = 2; j <= 6; ++j) {
                spec.j = j;
                v += dyadic_kernel_eval(spec, y);
            }
            total += v * h * h;
        }
    }
    CHECK(std::abs(total - mass) < 0.01 * mass);
}
