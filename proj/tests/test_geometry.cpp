#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "lzsweep/geometry.hpp"
#include "lzsweep/pulses.hpp"

using namespace lzsweep;

namespace {

SampledCurve unit_circle(double R, size_t n, bool ccw = true) {
    SampledCurve c;
    c.dim = 2;
    c.is_unit_speed = true;
    for (size_t i = 0; i < n; ++i) {
        double s = 2 * M_PI * R * double(i) / double(n - 1);
        double a = (ccw ? 1.0 : -1.0) * s / R;
        c.t.push_back(s);
        c.pts.push_back({R * std::cos(a), R * std::sin(a), 0});
    }
    return c;
}

SampledCurve helix(double a, double b, double L, size_t n) {
    double c0 = std::sqrt(a * a + b * b);
    SampledCurve c;
    c.dim = 3;
    c.is_unit_speed = true;
    for (size_t i = 0; i < n; ++i) {
        double s = L * double(i) / double(n - 1);
        c.t.push_back(s);
        c.pts.push_back({a * std::cos(s / c0), a * std::sin(s / c0), b * s / c0});
    }
    return c;
}

SampledCurve straight_line(size_t n) {
    SampledCurve c;
    c.dim = 2;
    c.is_unit_speed = true;
    for (size_t i = 0; i < n; ++i) {
        double s = 3.0 * double(i) / double(n - 1);
        c.t.push_back(s);
        c.pts.push_back({s * 0.6, s * 0.8, 0});
    }
    return c;
}

// plane curve with prescribed curvature profile, built by exact phase
// quadrature (independent of integrate_frenet)
SampledCurve curve_from_curvature(const std::function<double(double)>& kappa,
                                  double T, size_t n) {
    Waveform w;
    w.t.resize(n);
    w.omega.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = T * double(i) / double(n - 1);
        w.t[i] = t;
        w.omega[i] = -kappa(t);
    }
    return plane_error_curve(w);
}

}  // namespace

TEST_CASE("frenet: straight line has zero curvature, torsion undefined") {
    auto fd = frenet_data(straight_line(200));
    for (size_t i = 0; i < fd.invariants.curvature.size(); ++i) {
        CHECK(std::abs(fd.invariants.curvature[i]) < 1e-9);
        CHECK(fd.invariants.torsion_defined[i] == 0);
    }
}

TEST_CASE("frenet: circle of radius R") {
    double R = 2.5;
    auto c = unit_circle(R, 4001);
    auto fd = frenet_data(c);
    for (size_t i = 0; i < c.size(); i += 97) {
        CHECK(std::abs(fd.invariants.curvature[i]) ==
              Catch::Approx(1.0 / R).epsilon(1e-6));
        CHECK(fd.invariants.torsion_defined[i] == 1);
        CHECK(std::abs(fd.invariants.torsion[i]) < 1e-9);
    }
}

TEST_CASE("frenet: helix invariants match the closed form") {
    // (a cos s/c, a sin s/c, b s/c): curvature a/c^2, torsion b/c^2
    double a = 2.0, b = 1.0;
    double c2 = a * a + b * b;
    auto c = helix(a, b, 15.0, 6001);
    auto fd = frenet_data(c);
    for (size_t i = 100; i < c.size() - 100; i += 211) {
        CHECK(std::abs(fd.invariants.curvature[i]) ==
              Catch::Approx(a / c2).epsilon(1e-6));
        CHECK(fd.invariants.torsion[i] == Catch::Approx(b / c2).epsilon(1e-5));
    }
}

TEST_CASE("frenet: frames are orthonormal and satisfy the frame equations") {
    auto c = helix(2.0, 1.0, 15.0, 6001);
    auto fd = frenet_data(c);
    for (size_t i = 0; i < c.size(); i += 509) {
        const auto& f = fd.frames[i];
        CHECK(std::abs(f.tangent.norm() - 1) < 1e-9);
        CHECK(std::abs(f.normal.norm() - 1) < 1e-9);
        CHECK(std::abs(f.tangent.dot(f.normal)) < 1e-9);
        CHECK((f.tangent.cross(f.normal) - f.binormal).norm() < 1e-9);
    }
    // n' = -kappa T + tau B against finite differences of the frames
    size_t i = 3000;
    double h = c.t[i + 1] - c.t[i];
    Vec3 ndot = (fd.frames[i + 1].normal - fd.frames[i - 1].normal) / (2 * h);
    Vec3 expect = fd.frames[i].tangent * (-fd.invariants.curvature[i]) +
                  fd.frames[i].binormal * fd.invariants.torsion[i];
    CHECK((ndot - expect).norm() < 1e-4);
}

TEST_CASE("frenet: contract violations") {
    auto c = unit_circle(1.0, 1001);
    c.is_unit_speed = false;
    CHECK_THROWS_AS(frenet_data(c), contract_error);
    SampledCurve tiny;
    tiny.dim = 2;
    tiny.is_unit_speed = true;
    tiny.t = {0, 1, 2};
    tiny.pts = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK_THROWS_AS(frenet_data(tiny), contract_error);
    // speed-2 circle is rejected
    SampledCurve fast = unit_circle(1.0, 2001);
    for (auto& t : fast.t) t /= 2;
    CHECK_THROWS_AS(frenet_data(fast), contract_error);
}

TEST_CASE("reparameterize: unit-speed input is returned unchanged") {
    auto c = unit_circle(1.0, 4001);
    auto r = arc_length_reparameterize(c);
    REQUIRE(r.size() == c.size());
    for (size_t i = 0; i < c.size(); i += 401)
        CHECK((r.pts[i] - c.pts[i]).norm() < 1e-12);
}

TEST_CASE("reparameterize: circle traced at speed 2") {
    // parameter length pi at speed 2 -> unit-speed circle of length 2 pi
    size_t n = 4001;
    SampledCurve c;
    c.dim = 2;
    for (size_t i = 0; i < n; ++i) {
        double u = M_PI * double(i) / double(n - 1);
        c.t.push_back(u);
        c.pts.push_back({std::cos(2 * u), std::sin(2 * u), 0});
    }
    auto r = arc_length_reparameterize(c);
    CHECK(r.is_unit_speed);
    CHECK(r.length() == Catch::Approx(2 * M_PI).epsilon(1e-6));
    for (size_t i = 0; i + 1 < r.size(); i += 101) {
        double sp = (r.pts[i + 1] - r.pts[i]).norm() / (r.t[i + 1] - r.t[i]);
        CHECK(std::abs(sp - 1.0) < 1e-4);
    }
}

TEST_CASE("reparameterize: degenerate speed is rejected") {
    SampledCurve c;
    c.dim = 2;
    c.t = {0, 1, 2, 3, 4};
    c.pts = {{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    CHECK_THROWS_AS(arc_length_reparameterize(c), contract_error);
}

TEST_CASE("projected areas: unit circle") {
    auto c = unit_circle(1.0, 1000);
    Vec3 a = projected_areas(c);
    CHECK(std::abs(a.x) < 1e-4);
    CHECK(std::abs(a.y) < 1e-4);
    CHECK(a.z == Catch::Approx(M_PI).margin(1e-4));
    auto cw = unit_circle(1.0, 1000, false);
    CHECK(projected_areas(cw).z == Catch::Approx(-M_PI).margin(1e-4));
}

TEST_CASE("projected areas: additivity under concatenation") {
    auto c = helix(1.5, 0.7, 9.0, 3001);
    SampledCurve a, b;
    a.dim = b.dim = 3;
    size_t cut = 1500;
    a.t.assign(c.t.begin(), c.t.begin() + cut + 1);
    a.pts.assign(c.pts.begin(), c.pts.begin() + cut + 1);
    b.t.assign(c.t.begin() + cut, c.t.end());
    b.pts.assign(c.pts.begin() + cut, c.pts.end());
    Vec3 whole = projected_areas(c);
    Vec3 parts = projected_areas(a) + projected_areas(b);
    // the open line integral is additive over a shared endpoint; the closing
    // chord correction is identically zero for this definition
    CHECK((whole - parts).norm() < 1e-9);
}

TEST_CASE("closure defect: circle closes, spiral segment does not") {
    CHECK(closure_defect(unit_circle(1.0, 5001)) < 1e-6);
    // a single Euler spiral over [0, 2 zeta0/sqrt(v)] stays open, order 1/sqrt(v)
    double v = 4.0;
    auto open_sp = curve_from_curvature([&](double t) { return -v * t; },
                                        2 * 2.14357 / std::sqrt(v), 4001);
    double d = closure_defect(open_sp);
    CHECK(d > 0.3 / std::sqrt(v));
    CHECK(d < 3.0 / std::sqrt(v));
}

TEST_CASE("evolute: circle collapses to its center") {
    double R = 1.7;
    auto e = evolute(unit_circle(R, 4001));
    for (size_t i = 0; i < e.size(); i += 173)
        CHECK(e.pts[i].norm() < 1e-6 * R);
}

TEST_CASE("evolute: arc length equals total variation of the radius") {
    // Euler spiral segment: rho = 1/(v t); evolute length = int |d rho/dt|
    double v = 1.0;
    double t0 = 0.8, t1 = 2.2;
    size_t n = 20001;
    SampledCurve c;
    {
        Waveform w;
        w.t.resize(n);
        w.omega.resize(n);
        for (size_t i = 0; i < n; ++i) {
            double t = t0 + (t1 - t0) * double(i) / double(n - 1);
            w.t[i] = t - t0;
            w.omega[i] = v * t;
        }
        c = plane_error_curve(w);
    }
    auto e = evolute(c);
    double len = 0;
    for (size_t i = 0; i + 1 < e.size(); ++i)
        len += (e.pts[i + 1] - e.pts[i]).norm();
    // oracle: adaptive quadrature of |d(1/kappa)/dt| with kappa = v t
    double expect = integrate_adaptive(
        [&](double t) { return 1.0 / (v * t * t); }, t0, t1, 1e-12);
    CHECK(len == Catch::Approx(expect).epsilon(1e-4));
}

TEST_CASE("evolute: 2:1 ellipse has 4 curvature extrema (cusps)") {
    size_t n = 40001;
    SampledCurve c;
    c.dim = 2;
    for (size_t i = 0; i < n; ++i) {
        // start away from a curvature extremum so all four are interior
        double u = 0.3 + 2 * M_PI * double(i) / double(n - 1);
        c.t.push_back(u);
        c.pts.push_back({2 * std::cos(u), std::sin(u), 0});
    }
    auto r = arc_length_reparameterize(c);
    auto fd = frenet_data(r);
    int sign_changes = 0;
    double prev = 0;
    bool have = false;
    for (size_t i = 20; i + 25 < r.size(); i += 5) {
        double d = fd.invariants.curvature[i + 5] - fd.invariants.curvature[i];
        if (std::abs(d) < 1e-12) continue;
        if (have && d * prev < 0) ++sign_changes;
        prev = d;
        have = true;
    }
    CHECK(sign_changes == 4);  // cusps of the evolute = curvature extrema
    CHECK_NOTHROW(evolute(r));
}

TEST_CASE("evolute: zero-curvature input is rejected") {
    CHECK_THROWS_AS(evolute(straight_line(100)), contract_error);
}

TEST_CASE("evolute tangency: e' is parallel to the normal") {
    double v = 1.0;
    auto c = curve_from_curvature([&](double t) { return -(0.5 + v * t); }, 3.0,
                                  20001);
    auto e = evolute(c);
    auto fd = frenet_data(c);
    for (size_t i = 500; i + 500 < e.size(); i += 997) {
        Vec3 ed = (e.pts[i + 1] - e.pts[i - 1]).normalized();
        double align = std::abs(ed.dot(fd.frames[i].normal));
        CHECK(align >= 1.0 - 1e-6);
    }
}

TEST_CASE("self-intersection: figure-eight crosses once, circle does not") {
    // even sample count keeps the center crossing mid-segment (transversal)
    size_t n = 4000;
    SampledCurve f8;
    f8.dim = 2;
    for (size_t i = 0; i < n; ++i) {
        double u = 2 * M_PI * double(i) / double(n - 1);
        f8.t.push_back(u);
        f8.pts.push_back({std::sin(2 * u), std::sin(u), 0});  // lemniscate-like
    }
    auto hit = self_intersects(f8);
    REQUIRE(hit.has_value());
    // crossing at the center
    CHECK(std::abs(std::sin(2 * hit->t1)) < 2e-3);
    CHECK(std::abs(std::sin(hit->t1)) < 2e-3);
    CHECK_FALSE(self_intersects(unit_circle(1.0, 4001)).has_value());
}

TEST_CASE("Tait-Kneser: monotone curvature forbids self-intersection") {
    // randomized strictly monotone curvature profiles, including
    // sign-crossing ones; the osculating-circle nesting forbids crossings
    std::mt19937_64 rng(20240817ULL);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        double k0 = -3.0 + 4.0 * U(rng);
        double T = 2.0 + 4.0 * U(rng);
        double a1 = 0.8 * U(rng), a2 = 0.8 * U(rng);
        double w1 = 0.5 + 2.0 * U(rng), w2 = 0.5 + 2.0 * U(rng);
        double p1 = 2 * M_PI * U(rng), p2 = 2 * M_PI * U(rng);
        auto kdot = [&](double t) {
            return 0.2 + a1 * a1 * (1 + std::sin(w1 * t + p1)) +
                   a2 * a2 * (1 + std::sin(w2 * t + p2));
        };
        // kappa = k0 + int kdot: strictly increasing
        auto c = curve_from_curvature(
            [&](double t) {
                double acc = k0;
                int m = 200;
                for (int i = 0; i < m; ++i)
                    acc += kdot(t * (i + 0.5) / m) * (t / m);
                return acc;
            },
            T, 4001);
        INFO("trial " << trial);
        CHECK_FALSE(self_intersects(c).has_value());
    }
}

TEST_CASE("frenet roundtrip: reintegrating (kappa, tau) reproduces the curve") {
    auto c = helix(2.0, 1.0, 20.0, 10001);
    auto fd = frenet_data(c);
    auto rec = integrate_frenet(c.t, fd.invariants.curvature,
                                fd.invariants.torsion, 3, c.pts.front(),
                                fd.frames.front().tangent,
                                fd.frames.front().normal);
    double d = hausdorff_distance(c, rec);
    CHECK(d / curve_extent(c) < 1e-4);

    // plane case: spiral-like curve with an inflection
    auto p = curve_from_curvature([](double t) { return 2.0 * (t - 1.5); }, 3.0,
                                  10001);
    auto fd2 = frenet_data(p);
    auto rec2 = integrate_frenet(p.t, fd2.invariants.curvature,
                                 fd2.invariants.torsion, 2, p.pts.front(),
                                 fd2.frames.front().tangent,
                                 fd2.frames.front().normal);
    CHECK(hausdorff_distance(p, rec2) / curve_extent(p) < 1e-4);
}

TEST_CASE("canonical alignment maps the initial frame onto x,y,z") {
    auto c = helix(2.0, 1.0, 12.0, 5001);
    auto fd = frenet_data(c);
    auto a = align_to_canonical_frame(c, fd.frames.front().tangent,
                                      fd.frames.front().normal);
    CHECK(a.pts.front().norm() < 1e-12);
    auto fda = frenet_data(a);
    CHECK((fda.frames.front().tangent - Vec3{1, 0, 0}).norm() < 1e-6);
    CHECK((fda.frames.front().normal - Vec3{0, 1, 0}).norm() < 1e-6);
}

TEST_CASE("curve CSV roundtrip") {
    auto c = helix(1.2, 0.4, 7.0, 501);
    std::string path = "test_curve_io.csv";
    write_curve_csv(c, path);
    auto r = read_curve_csv(path);
    REQUIRE(r.size() == c.size());
    CHECK(r.dim == 3);
    for (size_t i = 0; i < c.size(); i += 37)
        CHECK((r.pts[i] - c.pts[i]).norm() < 1e-14);
    std::remove(path.c_str());
}
