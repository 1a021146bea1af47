#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lzsweep/fresnel.hpp"
#include "lzsweep/primitives.hpp"

using namespace lzsweep;

namespace {

// independent oracle: composite Simpson on the defining integrals
double simpson_fresnel(double w, bool sine, size_t n = 200000) {
    if (w == 0) return 0;
    double h = w / n;
    auto f = [&](double u) { return sine ? std::sin(u * u) : std::cos(u * u); };
    double acc = f(0) + f(w);
    for (size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("fresnel at zero") {
    auto f = fresnel(0.0);
    CHECK(f.c == 0.0);
    CHECK(f.s == 0.0);
}

TEST_CASE("fresnel matches direct quadrature") {
    for (double w : {0.3, 1.0, 1.515, 2.9, 5.5}) {
        auto f = fresnel(w);
        CHECK(std::abs(f.c - simpson_fresnel(w, false)) < 1e-12);
        CHECK(std::abs(f.s - simpson_fresnel(w, true)) < 1e-12);
    }
}

TEST_CASE("fresnel asymptotic branch is continuous and accurate") {
    // straddle the quadrature/asymptotic switch at |w| = 6
    auto lo = fresnel(5.999999);
    auto hi = fresnel(6.000001);
    CHECK(std::abs(lo.c - hi.c) < 1e-5);  // integrand is O(1), window 2e-6
    auto f = fresnel(8.0);
    CHECK(std::abs(f.c - simpson_fresnel(8.0, false, 400000)) < 1e-12);
    CHECK(std::abs(f.s - simpson_fresnel(8.0, true, 400000)) < 1e-12);
}

TEST_CASE("fresnel limit value") {
    const double lim = std::sqrt(M_PI / 8.0);
    auto f = fresnel(500.0);
    CHECK(std::abs(f.c - lim) < 1e-3);  // decays ~1/(2w)
    auto g = fresnel(5e6);
    CHECK(std::abs(g.c - lim) < 1e-6);
    CHECK(std::abs(g.s - lim) < 1e-6);
}

TEST_CASE("fresnel is odd") {
    auto p = fresnel(1.7), m = fresnel(-1.7);
    CHECK(p.c == -m.c);
    CHECK(p.s == -m.s);
}

TEST_CASE("euler spiral start and tangent") {
    Vec3 p = euler_spiral_point(2.0, 0.0);
    CHECK(p.norm() == 0.0);
    // tangent at the origin is +x: probe with a small step
    Vec3 q = euler_spiral_point(2.0, 1e-6);
    CHECK(q.x / 1e-6 == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(q.y) < 1e-12);
}

TEST_CASE("closure roots match the known values") {
    auto roots = closure_roots(3);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0].zeta == Catch::Approx(2.14357).margin(1e-5));
    CHECK(roots[1].zeta == Catch::Approx(3.32193).margin(1e-5));
    CHECK(roots[2].zeta == Catch::Approx(4.15421).margin(1e-5));
    for (auto& r : roots) CHECK(std::abs(closure_equation(r.zeta)) < 1e-10);
    // strictly increasing indices and values
    for (size_t i = 0; i + 1 < roots.size(); ++i) {
        CHECK(roots[i].index + 1 == roots[i + 1].index);
        CHECK(roots[i].zeta < roots[i + 1].zeta);
    }
}

TEST_CASE("euler spiral join point sits at distance d ~ 1.68/sqrt(v)") {
    // d = sqrt((2/v) C(zeta0/sqrt2)^2 + (2/v) S(zeta0/sqrt2)^2), the
    // semicircle diameter of the sweep construction
    for (double v : {1.0, 4.0}) {
        double z0 = closure_roots(1)[0].zeta;
        Vec3 p = euler_spiral_point(v, z0 / std::sqrt(v));
        CHECK(p.norm() * std::sqrt(v) == Catch::Approx(1.68).margin(0.01));
    }
}

TEST_CASE("euler spiral curvature equals v t") {
    // finite-difference curvature of the analytic spiral
    double v = 3.0;
    for (double t : {0.4, 1.1}) {
        double h = 1e-4;
        Vec3 pm = euler_spiral_point(v, t - h);
        Vec3 p0 = euler_spiral_point(v, t);
        Vec3 pp = euler_spiral_point(v, t + h);
        Vec3 d1 = (pp - pm) / (2 * h);
        Vec3 d2 = (pp - p0 * 2.0 + pm) / (h * h);
        double kappa = d1.x * d2.y - d1.y * d2.x;  // signed, unit speed
        CHECK(std::abs(std::abs(kappa) - v * t) < 1e-6 * std::max(1.0, v * t));
        CHECK(kappa < 0);  // kappa = -Omega = -v t
    }
}
