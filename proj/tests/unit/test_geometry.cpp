#include "doctest.h"

#include <cmath>
#include <random>

#include "finitype/geometry.hpp"

using namespace finitype;

namespace {

Eigen::MatrixXd random_rotation(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

}  // namespace

TEST_CASE("chart_eval examples") {
    auto sphere = gallery_surface("sphere");
    auto p = chart_eval(sphere, {0.0, 0.0});
    CHECK(p[0] == 0.0);
    CHECK(p[2] == 1.0);

    auto k3 = gallery_surface("curve-k3");
    auto q = chart_eval(k3, {0.5});
    CHECK(q[0] == 0.5);
    CHECK(q[1] == doctest::Approx(0.125).epsilon(1e-15));

    auto g = gallery_surface("graph-k2-k4");
    auto r = chart_eval(g, {1.0, 1.0});
    CHECK(r[2] == 2.0);

    CHECK_THROWS_AS(chart_eval(k3, {1.5}), Error);
}

TEST_CASE("area element") {
    auto par = gallery_surface("parabola");
    CHECK(area_element(par, {1.0}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
    CHECK(area_element(gallery_surface("sphere"), {0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(area_element(gallery_surface("segment"), {0.3}) == 1.0);

    // sqrt(1 + h'^2) on every gallery curve.
    for (int k : {2, 3, 4, 6}) {
        auto c = gallery_surface("curve-k" + std::to_string(k));
        for (double s : {-0.9, -0.3, 0.0, 0.4, 1.0}) {
            const double h1 = k * std::pow(s, k - 1);
            CHECK(std::abs(area_element(c, {s}) - std::sqrt(1.0 + h1 * h1)) < 1e-10);
        }
    }
}

TEST_CASE("directional derivative tables") {
    auto par = gallery_surface("parabola");
    auto t = directional_deriv_table(par, {0.0}, {0.0, 1.0}, 4);
    CHECK(t.at({1}) == 0.0);
    CHECK(t.at({2}) == 2.0);
    auto t2 = directional_deriv_table(par, {0.0}, {1.0, 0.0}, 2);
    CHECK(t2.at({1}) == 1.0);

    auto g = gallery_surface("graph-k2-k4");
    auto tg = directional_deriv_table(g, {0.0, 0.0}, {0.0, 0.0, 1.0}, 4);
    CHECK(tg.at({0, 1}) == 0.0);
    CHECK(tg.at({0, 2}) == 0.0);
    CHECK(tg.at({0, 3}) == 0.0);
    CHECK(tg.at({0, 4}) == 24.0);

    CHECK_THROWS_AS(directional_deriv_table(par, {0.0}, {0.0, 2.0}, 2), Error);
    try {
        directional_deriv_table(par, {0.0}, {0.0, 1.0}, 99);
        FAIL("expected DerivUnavailable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DerivUnavailable);
    }
}

TEST_CASE("finite-difference oracle matches exact jets") {
    auto exact = gallery_surface("curve-k3");
    auto fd = ParamSurface::from_function(
        [](const Vec& u) { return Vec{u[0], u[0] * u[0] * u[0]}; }, 2, Box{{-1.0}, {1.0}}, "user");
    CHECK_FALSE(fd.exact_derivatives());
    const Vec eta{0.6, 0.8};
    auto a = exact.directional_table({0.2}, eta, 4);
    auto b = fd.directional_table({0.2}, eta, 4);
    for (const auto& [alpha, v] : a) CHECK(std::abs(v - b.at(alpha)) < 1e-4 * (1.0 + std::abs(v)));
    CHECK_THROWS_AS(fd.directional_table({0.2}, eta, 7), Error);
}

TEST_CASE("type detection gallery") {
    CHECK(detect_type_order(gallery_surface("circle"), {0.3}).order == 2);
    CHECK(detect_type_order(gallery_surface("sphere"), {0.1, -0.2}).order == 2);
    CHECK(detect_type_order(gallery_surface("parabola"), {0.0}).order == 2);
    CHECK(detect_type_order(gallery_surface("curve-k3"), {0.0}).order == 3);
    CHECK(detect_type_order(model_curve(4, {1.0, 0.5, -0.3}, 0.7), {0.0}).order == 4);
    CHECK(detect_type_order(gallery_surface("curve-k6"), {0.0}).order == 6);

    auto seg = detect_type_order(gallery_surface("segment"), {0.0});
    REQUIRE(seg.exceeds());
    CHECK(std::abs(seg.worst_direction[1]) == doctest::Approx(1.0));

    // Away from the flat point the curve is curved.
    CHECK(detect_type_order(gallery_surface("curve-k4"), {0.5}).order == 2);
}

TEST_CASE("graph type uses the smallest power in the normal direction") {
    // The contact of u1^2 + u2^4 with its tangent plane is quadratic in u1.
    CHECK(detect_type_order(gallery_surface("graph-k2-k4"), {0.0, 0.0}).order == 2);
    CHECK(detect_type_order(gallery_surface("graph-k3-k3"), {0.0, 0.0}).order == 3);
}

TEST_CASE("rotation invariance is exact") {
    std::mt19937_64 rng(7);
    for (const char* name : {"circle", "curve-k3", "segment", "sphere"}) {
        auto s = gallery_surface(name);
        const Vec u0(static_cast<std::size_t>(s.chart_dim()), 0.0);
        const auto base = detect_type_order(s, u0);
        for (int r = 0; r < 3; ++r) {
            auto rot = detect_type_order(s.rotated(random_rotation(s.ambient_dim(), rng)), u0);
            CHECK(rot.order == base.order);
        }
    }
}

TEST_CASE("monotone in k_max") {
    auto c = gallery_surface("curve-k6");
    TypeOptions opt;
    opt.k_max = 5;
    CHECK(detect_type_order(c, {0.0}, opt).exceeds());
    for (int k = 6; k <= 12; ++k) {
        opt.k_max = k;
        CHECK(detect_type_order(c, {0.0}, opt).order == 6);
    }
}

TEST_CASE("cutoff profile") {
    auto rho = CutoffProfile::bump({0.0}, 0.5, 2.0);
    CHECK(rho({0.0}) == 2.0);
    CHECK(rho({0.5}) == 0.0);
    CHECK(rho({0.7}) == 0.0);
    for (double s = -0.6; s <= 0.6; s += 0.01) {
        CHECK(rho({s}) >= 0.0);
        CHECK(rho({s}) <= 2.0);
    }
    // C^1 spline: first difference quotient stays bounded at the edge.
    auto c1 = CutoffProfile::bump({0.0}, 1.0, 1.0, 1);
    const double h = 1e-6;
    CHECK(std::abs((c1({1.0 + h}) - c1({1.0 - h})) / (2 * h)) < 1e-3);

    auto circle = gallery_surface("circle");
    CHECK(cutoff_mass(circle, CutoffProfile::uniform()) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("chart validation") {
    CHECK_NOTHROW(validate_chart(gallery_surface("circle")));
    CHECK_NOTHROW(validate_chart(gallery_surface("sphere")));
    // A folded chart: s -> (s^2, s^4) hits each point twice.
    auto folded = ParamSurface::from_function([](const Vec& u) { return Vec{u[0] * u[0], 0.0}; }, 2,
                                              Box{{-1.0}, {1.0}}, "folded");
    CHECK_THROWS_AS(validate_chart(folded), Error);
}

TEST_CASE("json polynomial chart") {
    const std::string text = R"({"ambient_dim": 2, "domain": [[-1, 1]],
        "polynomial": [[{"coef": 1, "powers": [1]}], [{"coef": 1, "powers": [5]}]], "label": "quintic"})";
    auto s = surface_from_json(text);
    CHECK(s.exact_derivatives());
    CHECK(detect_type_order(s, {0.0}).order == 5);
    CHECK_THROWS_AS(surface_from_json("{\"ambient_dim\": 2}"), Error);
}
