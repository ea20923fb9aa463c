#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "finitype/varcoef.hpp"

using namespace finitype;

namespace {

constexpr double kPi = std::numbers::pi;

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::ConfigInvalid;  // sentinel: never thrown by these calls
}

const char* kGallery[] = {"parabolas", "cubic-fold", "quartic-fold", "circles", "linear-degenerate", "fold-k5"};

}  // namespace

TEST_CASE("defining function vanishes on S_{x,t}") {
    for (const char* name : kGallery) {
        const auto d = gallery_distribution(name);
        const Vec x{0.3, -0.2};
        for (double yp : {-0.4, 0.0, 0.25}) {
            const Vec y = d.surface_point(x, {x[1] + yp}, 1.5);
            CHECK(std::abs(defining_eval(d, x, y, 1.5)) < 1e-14);
        }
    }
    const auto par = gallery_distribution("parabolas");
    CHECK(defining_eval(par, {1.0, 0.5}, {0.0, 0.0}, 0.5) == doctest::Approx(1.0 - 0.5 - 0.25));
    CHECK(kind_of([&] { defining_eval(par, {0, 0}, {0, 0}, 100.0); }) == ErrorKind::PreconditionFailed);
    CHECK(kind_of([] { gallery_distribution("no-such"); }) == ErrorKind::ConfigInvalid);
    CHECK(is_gallery_distribution("fold-k7"));
    CHECK_FALSE(is_gallery_distribution("fold-kx"));
}

TEST_CASE("Monge-Ampere determinant by hand") {
    const Vec x{0.1, 0.2};
    const double t = 1.0;
    for (double d : {-0.3, 0.0, 0.15}) {
        auto y_of = [&](const CurveDistribution& dist) { return dist.surface_point(x, {x[1] - d}, t); };
        const auto par = gallery_distribution("parabolas");
        CHECK(std::abs(monge_ampere(par, x, y_of(par), t) - 2.0) < 1e-6);
        CHECK(std::abs(monge_ampere(par, x, y_of(par), t, {.finite_difference = true}) - 2.0) < 1e-4);
        const auto cub = gallery_distribution("cubic-fold");
        CHECK(std::abs(monge_ampere(cub, x, y_of(cub), t) - 6.0 * d) < 1e-9);
        const auto quart = gallery_distribution("quartic-fold");
        CHECK(std::abs(monge_ampere(quart, x, y_of(quart), t) - 12.0 * d * d) < 1e-9);
        const auto lin = gallery_distribution("linear-degenerate");
        CHECK(std::abs(monge_ampere(lin, x, y_of(lin), t)) < 1e-8);
    }
}

TEST_CASE("Monge-Ampere: swap symmetry and finite differences agree with jets") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    for (const char* name : kGallery) {
        const auto dist = gallery_distribution(name);
        for (int k = 0; k < 5; ++k) {
            const Vec x{u(rng), u(rng)};
            const double t = 1.0 + 0.5 * k;
            const Vec y = dist.surface_point(x, {x[1] + u(rng)}, t);
            const double j = monge_ampere(dist, x, y, t);
            CHECK(std::abs(monge_ampere(dist, x, y, t, {.swap_roles = true}) - j) < 1e-8 * (1.0 + std::abs(j)));
            CHECK(std::abs(monge_ampere(dist, x, y, t, {.finite_difference = true}) - j) < 1e-6 * (1.0 + std::abs(j)));
        }
    }
}

TEST_CASE("function-built distribution matches the formula path") {
    const auto ref = gallery_distribution("circles");
    auto fn = CurveDistribution::from_function(
        [](const Vec& x, const Vec& yp, double t) {
            const double d = x[1] - yp[0];
            return t * std::sqrt(1.0 - d * d);
        },
        2, [&](const Vec& x, const Vec& y, double t) { return ref.psi(x, y, t); },
        [&](const Vec& x, double t) { return ref.support(x, t); }, ref.t_range(), "circles-fd");
    CHECK_FALSE(fn.exact_derivatives());
    fn.validate();
    const Vec x{0.0, 0.1};
    const Vec y = ref.surface_point(x, {0.3}, 2.0);
    CHECK(std::abs(monge_ampere(fn, x, y, 2.0) - monge_ampere(ref, x, y, 2.0)) < 1e-6);
    const auto g1 = fn.grad_yp_A(x, {0.3}, 2.0);
    const auto g2 = ref.grad_yp_A(x, {0.3}, 2.0);
    CHECK(std::abs(g1[0] - g2[0]) < 1e-7);
}

TEST_CASE("non-degeneracy scan") {
    const ScanRegion region{Box{{-0.5, -0.5}, {0.5, 0.5}}, 9};
    const auto par = nondegeneracy_scan(gallery_distribution("parabolas"), region, 1.0);
    CHECK(par.scanned > 0);
    CHECK(std::abs(par.min_abs_J - 2.0) < 1e-6);
    CHECK(par.sigma_samples.empty());

    const auto cub = nondegeneracy_scan(gallery_distribution("cubic-fold"), region, 1.0);
    REQUIRE_FALSE(cub.sigma_samples.empty());
    for (const auto& s : cub.sigma_samples) CHECK(std::abs(s.x[1] - s.y[1]) < 1e-6);
    for (std::size_t i = 1; i < cub.sigma_samples.size(); ++i) {
        const auto& a = cub.sigma_samples[i - 1];
        const auto& b = cub.sigma_samples[i];
        CHECK((a.x[0] < b.x[0] || (a.x[0] == b.x[0] && (a.x[1] < b.x[1] || (a.x[1] == b.x[1] && a.y[1] <= b.y[1])))));
    }

    const auto lin = nondegeneracy_scan(gallery_distribution("linear-degenerate"), region, 1.0);
    CHECK(lin.sigma_samples.size() == lin.scanned);
}

TEST_CASE("vanishing order of J across the fold") {
    const Vec x{0.0, 0.0};
    const double t = 1.0;
    const Vec dir{0.0, 0.0, 1.0};
    auto order_for = [&](const CurveDistribution& dist) {
        const SigmaSample s{x, dist.surface_point(x, {0.0}, t), 0.0};
        return vanishing_order(dist, s, dir, t);
    };
    CHECK(order_for(gallery_distribution("cubic-fold")).order == 1);
    CHECK(order_for(gallery_distribution("quartic-fold")).order == 2);
    const auto r5 = order_for(fold_distribution(5));
    CHECK(r5.order == 3);
    CHECK(std::abs(r5.slope - 3.0) < 0.15);
    CHECK(r5.transversality > 0.5);
    CHECK(kind_of([&] { order_for(gallery_distribution("parabolas")); }) == ErrorKind::PreconditionFailed);
    // Moving along Sigma itself is not transversal.
    const auto cub = gallery_distribution("cubic-fold");
    const SigmaSample s{x, cub.surface_point(x, {0.0}, t), 0.0};
    CHECK(kind_of([&] { vanishing_order(cub, s, {1.0, 0.0, 0.0}, t); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("cone corank") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    auto norm = [](const Vec& v) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    };
    for (int n : {2, 3}) {
        for (int k = 0; k < 100; ++k) {
            Vec xi(static_cast<std::size_t>(n));
            for (double& c : xi) c = g(rng);
            // |xi| has a radial null direction only.
            CHECK(cone_corank(norm, xi) == 1);
            // A linear symbol has an identically vanishing Hessian.
            CHECK(cone_corank([](const Vec& v) { return v[0] + 2.0 * v[1]; }, xi) == n);
        }
    }
    CHECK(kind_of([&] { cone_corank([](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; }, {1.0, 0.5}); }) ==
          ErrorKind::NotHomogeneous);
}

TEST_CASE("frozen curves carry type vanishing order + 2") {
    const Vec x0{0.0, 0.0};
    for (int k : {3, 4, 5}) {
        const auto dist = fold_distribution(k);
        const auto rep = detect_type_order(dist.frozen_curve(x0, 1.0, 0.4), {0.0});
        REQUIRE(rep.order.has_value());
        CHECK(*rep.order == k);
        const SigmaSample s{x0, dist.surface_point(x0, {0.0}, 1.0), 0.0};
        CHECK(vanishing_order(dist, s, {0.0, 0.0, 1.0}, 1.0).order + 2 == k);
    }
    const auto circ = detect_type_order(gallery_distribution("circles").frozen_curve(x0, 1.0, 0.4), {0.0});
    REQUIRE(circ.order.has_value());
    CHECK(*circ.order == 2);
    CHECK(detect_type_order(gallery_distribution("linear-degenerate").frozen_curve(x0, 1.0, 0.4), {0.0}).exceeds());
}

TEST_CASE("varcoef average: constants, graph oracle, support") {
    const auto par = gallery_distribution("parabolas");
    GridFunction one = periodic_grid(2, 64, 8.0);
    one.fill([](const Vec&) { return 1.0; });

    // Oracle for the mass: 1-D Simpson of psi * sqrt(1 + A_s^2) in s = x_2 - y_2.
    const auto bump = CutoffProfile::bump({0.0}, 0.5);
    double mass = 0.0;
    const int m = 20000;
    for (int i = 0; i <= m; ++i) {
        const double s = -0.5 + static_cast<double>(i) / m;
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mass += w * bump({s}) * std::sqrt(1.0 + 4.0 * s * s);
    }
    mass /= 3.0 * m;
    const auto r = varcoef_average(one, par, 1.2, {0.3, -0.7});
    CHECK(std::abs(r.value.real() - mass) < 1e-6 * mass);
    double delta_mass = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double s = -0.5 + static_cast<double>(i) / m;
        delta_mass += ((i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * bump({s});
    }
    delta_mass /= 3.0 * m;
    const auto rd = varcoef_average(one, par, 1.2, {0.3, -0.7}, {.convention = MeasureConvention::Delta});
    CHECK(std::abs(rd.value.real() - delta_mass) < 1e-6 * delta_mass);

    // For A = a(x' - y', t), S_{x,t} = x - graph{(a(s, t), s)}: compare with the surface average.
    GridFunction f = periodic_grid(2, 128, 2.0 * kPi);
    f.fill([](const Vec& y) { return std::sin(y[0]) * std::cos(2.0 * y[1]) + 0.3; });
    const double t = 0.8;
    const auto graph = ParamSurface::from_function(
        [t](const Vec& u) { return Vec{t + u[0] * u[0], u[0]}; }, 2, Box{{-0.5}, {0.5}}, "graph");
    for (const Vec& x : {Vec{0.0, 0.0}, Vec{1.1, -0.4}}) {
        const auto a = varcoef_average(f, par, t, x);
        // average_at integrates f(x - t' * point) with t' = 1.
        const auto b = average_at(f, graph, bump, 1.0, x);
        CHECK(std::abs(a.value.real() - b.value.real()) < 1e-6);
    }

    GridFunction far = GridFunction({64, 64}, Box{{-4.0, -4.0}, {4.0, 4.0}}, false);
    far.fill([](const Vec& y) { return std::hypot(y[0] - 3.0, y[1] - 3.0) < 0.5 ? 1.0 : 0.0; });
    CHECK(varcoef_average(far, par, 1.0, {0.0, 0.0}).value.real() == 0.0);
}

TEST_CASE("varcoef maximal: convolution path equals the pointwise path") {
    auto par = gallery_distribution("cubic-fold");
    GridFunction f = periodic_grid(2, 32, 2.0 * kPi);
    f.fill([](const Vec& y) { return std::exp(std::cos(y[0]) + std::sin(y[1])); });
    const Vec ts{0.5, 1.0, 2.0};
    const auto fast = varcoef_maximal(f, par, ts);
    par.set_translation_invariant(false);
    const auto slow = varcoef_maximal(f, par, ts);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(fast.values[i] - slow.values[i]));
    CHECK(worst < 1e-9);
    CHECK(kind_of([&] { varcoef_nodes(par, 1.0, 0.1); }) == ErrorKind::PreconditionFailed);
}

TEST_CASE("diagnostics serialize") {
    const ScanRegion region{Box{{-0.5, -0.5}, {0.5, 0.5}}, 5};
    auto diag = nondegeneracy_scan(gallery_distribution("cubic-fold"), region, 1.0);
    diag.vanishing_orders = {1};
    const std::string js = diagnostics_to_json(diag);
    CHECK(js.find("\"vanishing_orders\"") != std::string::npos);
    const std::string csv = sigma_to_csv(diag);
    CHECK(csv.rfind("x_1,x_2,y_1,y_2,J\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(diag.sigma_samples.size()) + 1);
}
