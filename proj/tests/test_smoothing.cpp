#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lzsweep/primitives.hpp"
#include "lzsweep/simulator.hpp"
#include "lzsweep/smoothing.hpp"
#include "lzsweep/torsion.hpp"

using namespace lzsweep;

namespace {

SmoothingConfig semicircle_cfg(double v) {
    auto g = semicircle_geometry(v);
    SmoothingConfig cfg;
    cfg.step = 0.01 / std::sqrt(v);
    cfg.order = 10;
    cfg.remove = {{g.t_circ, 3, 3}, {g.t_circ + g.t_euler, 3, 3}};
    return cfg;
}

}  // namespace

TEST_CASE("smoothing removes the drive jumps of the semicircle sweep") {
    double v = 1.0;
    auto d = semicircle_sweep_design(v);
    auto cfg = semicircle_cfg(v);
    auto sc = smooth_curve(d.curve, cfg);
    CHECK(sc.is_unit_speed);
    // closure and area survive (endpoints are never removed)
    CHECK(closure_defect(sc) < 1e-9 * sc.length());
    CHECK(std::abs(projected_areas(sc).z) < 1e-5 * sc.length() * sc.length());
    // away from the removed windows the curve barely moves
    auto g = semicircle_geometry(v);
    double worst = 0;
    for (size_t i = 0; i < sc.size(); ++i) {
        double t = sc.t[i];
        if (std::abs(t - g.t_circ) < 0.2 ||
            std::abs(t - g.t_circ - g.t_euler) < 0.2)
            continue;
        double best = 1e300;
        size_t j0 = std::min<size_t>(d.curve.size() - 1,
                                     static_cast<size_t>(t / d.curve.length() *
                                                         d.curve.size()));
        for (size_t j = (j0 > 400 ? j0 - 400 : 0);
             j < std::min(d.curve.size(), j0 + 400); ++j)
            best = std::min(best, (sc.pts[i] - d.curve.pts[j]).norm());
        worst = std::max(worst, best);
    }
    CHECK(worst < 10 * cfg.step);

    // the extracted pulse is continuous: no O(1) jumps left
    auto w = smoothed_pulse(d.curve, cfg, 4000);
    double max_jump = 0;
    for (size_t i = 0; i + 1 < w.size(); ++i)
        max_jump = std::max(max_jump, std::abs(w.omega[i + 1] - w.omega[i]));
    CHECK(max_jump < 0.2);  // raw pulse jumps by ~0.95 at the joins
    // sweep endpoints are preserved
    CHECK(w.omega.front() == Catch::Approx(-g.omega_circ).margin(1e-3));
    CHECK(w.omega.back() == Catch::Approx(+g.omega_circ).margin(1e-3));
}

TEST_CASE("smoothing a defect-free curve is the identity up to refit error") {
    auto d = figure8_design(1.0, 4000);
    SmoothingConfig cfg;
    cfg.step = 0.01;
    cfg.order = 6;
    auto sc = smooth_curve(d.curve, cfg);
    // parameter-matched comparison against the raw curve (both unit speed
    // from the same start point)
    double worst = 0;
    for (size_t i = 0; i < sc.size(); i += 7) {
        double q = std::min(sc.t[i], d.curve.t.back());
        Vec3 raw{0, 0, 0};
        for (int coord = 0; coord < 2; ++coord) {
            auto it = std::upper_bound(d.curve.t.begin(), d.curve.t.end(), q);
            size_t k = (it - d.curve.t.begin());
            k = std::min(std::max<size_t>(k, 2), d.curve.size() - 2);
            double u = (q - d.curve.t[k - 1]) /
                       (d.curve.t[k] - d.curve.t[k - 1]);
            const Vec3 &a = d.curve.pts[k - 1], &b = d.curve.pts[k];
            double va = coord == 0 ? a.x : a.y, vb = coord == 0 ? b.x : b.y;
            if (coord == 0)
                raw.x = va + u * (vb - va);
            else
                raw.y = va + u * (vb - va);
        }
        worst = std::max(worst, (sc.pts[i] - raw).norm());
    }
    // linear raw interpolation itself sags by (h_raw^2 kappa / 8) ~ 2e-8
    CHECK(worst < 1e-6);
}

TEST_CASE("smoothed coordinates are differentiable across the former defects") {
    double v = 1.0;
    auto d = semicircle_sweep_design(v);
    auto cfg = semicircle_cfg(v);
    auto g = semicircle_geometry(v);

    // structural check: the defect location lies strictly inside one
    // retained interval, so every derivative of the local polynomial is
    // continuous there by construction
    auto fit = fit_smoothing(d.curve, cfg, false);
    for (double tj : {g.t_circ, g.t_circ + g.t_euler}) {
        auto it = std::upper_bound(fit.retained.begin(), fit.retained.end(), tj);
        REQUIRE(it != fit.retained.begin());
        REQUIRE(it != fit.retained.end());
        double gap_lo = *(it - 1), gap_hi = *it;
        CHECK(tj - gap_lo > cfg.step);
        CHECK(gap_hi - tj > cfg.step);
    }

    // numeric check: one-sided finite-difference derivatives of the output
    // coordinates agree from both sides of each former join
    cfg.resample_factor = 16;
    auto sc = smooth_curve(d.curve, cfg);
    double h = sc.t[1] - sc.t[0];
    for (double tj : {g.t_circ, g.t_circ + g.t_euler}) {
        size_t i0 = static_cast<size_t>(std::lround(tj / sc.length() *
                                                    (sc.size() - 1)));
        for (int m = 1; m <= 4; ++m) {
            auto deriv = [&](int sign, int coord) {
                int P = m + 4;
                std::vector<double> xs(P), fs(P);
                for (int k = 0; k < P; ++k) {
                    size_t idx = i0 + sign * k;
                    xs[k] = sc.t[idx];
                    const Vec3& p = sc.pts[idx];
                    fs[k] = coord == 0 ? p.x : p.y;
                }
                auto wt = fd_weights(sc.t[i0], xs, m);
                double acc = 0;
                for (int k = 0; k < P; ++k) acc += wt[k] * fs[k];
                return acc;
            };
            for (int coord = 0; coord < 2; ++coord) {
                double dl = deriv(-1, coord), dr = deriv(+1, coord);
                // scale: the derivative's own magnitude over a neighborhood
                double scale = std::max(std::abs(dl), std::abs(dr));
                scale = std::max(scale, std::pow(1.0 / (40 * h), m - 1.0));
                INFO("join " << tj << " order " << m << " coord " << coord);
                CHECK(std::abs(dl - dr) / scale < 1e-3);
            }
        }
    }
    (void)h;
}

TEST_CASE("smoothing preserves closure and keeps robustness order 2") {
    double v = 1.0;
    auto d = semicircle_sweep_design(v);
    auto w = smoothed_pulse(d.curve, semicircle_cfg(v), 96000);
    auto traj = magnus_terms(w);
    double T = w.duration();
    CHECK(traj.a1.back().norm() < 1e-9 * T);
    auto ro = robustness_order(w);
    REQUIRE(ro.order.has_value());
    CHECK(*ro.order == 2);
    CHECK(ro.slope == Catch::Approx(6.0).margin(0.3));
}

TEST_CASE("smoothing config validation") {
    auto d = semicircle_sweep_design(1.0);
    SmoothingConfig cfg;
    cfg.step = 0.01;
    cfg.order = 1;  // too low
    CHECK_THROWS_AS(smooth_curve(d.curve, cfg), contract_error);
    cfg.order = 4;
    cfg.remove = {{99.0, 3, 3}};  // outside the curve
    CHECK_THROWS_AS(smooth_curve(d.curve, cfg), contract_error);
    cfg.remove = {{4.0, 300, 300}};  // more than half the samples
    CHECK_THROWS_AS(smooth_curve(d.curve, cfg), contract_error);
}

TEST_CASE("smooth_spherical stays on the sphere and preserves symmetry") {
    auto tmpl = binormal_template(10.0, 2.2237391, -0.28, -0.22801);
    SmoothingConfig cfg;
    cfg.step = tmpl.planar_step;
    cfg.order = 3;
    cfg.remove = {{tmpl.u_cusp1, 50, 34}, {tmpl.u_cusp2, 34, 50}};
    auto sm = smooth_spherical(tmpl.spherical, cfg);
    for (size_t i = 0; i < sm.size(); i += 97)
        CHECK(std::abs(sm.pts[i].norm() - 1.0) < 1e-12);
    // two-fold symmetry: b(u) = -b(u_total - u) in x, y (z preserved)
    size_t n = sm.size();
    for (size_t i = 0; i < n; i += 131) {
        const Vec3& a = sm.pts[i];
        const Vec3& b = sm.pts[n - 1 - i];
        CHECK(std::abs(a.x + b.x) < 1e-9);
        CHECK(std::abs(a.y + b.y) < 1e-9);
    }
    // cusps are gone: planar tangent varies smoothly through the windows
    // (the raw template reverses direction at the cusps)
    auto dir = [&](size_t i) {
        Vec3 d3 = sm.pts[i + 1] - sm.pts[i];
        return Vec3{d3.x, d3.y, 0}.normalized();
    };
    double worst_turn = 0;
    for (size_t i = 1; i + 2 < n; ++i)
        worst_turn =
            std::max(worst_turn, std::acos(std::clamp(dir(i).dot(dir(i + 1)),
                                                      -1.0, 1.0)));
    CHECK(worst_turn < 0.5);  // the raw cusp reverses direction (~pi); the
    // spiral tight end legitimately turns ~0.22 per step
}

TEST_CASE("smooth_spherical rejects points outside the open unit disk") {
    SampledCurve c;
    c.dim = 3;
    for (int i = 0; i < 32; ++i) {
        double u = i / 31.0;
        double x = 0.9 + 0.2 * u;  // exits the disk
        c.t.push_back(u);
        c.pts.push_back({x, 0.0, std::sqrt(std::max(0.0, 1 - x * x))});
    }
    SmoothingConfig cfg;
    cfg.step = 1.0 / 31;
    cfg.order = 3;
    CHECK_THROWS_AS(smooth_spherical(c, cfg), contract_error);
}

TEST_CASE("spherical circle with no defects is unchanged") {
    SampledCurve c;
    c.dim = 3;
    size_t n = 2001;
    double lat = 0.4;
    for (size_t i = 0; i < n; ++i) {
        double u = 2 * M_PI * double(i) / double(n - 1);
        c.t.push_back(u);
        c.pts.push_back({std::cos(lat) * std::cos(u),
                         std::cos(lat) * std::sin(u), std::sin(lat)});
    }
    SmoothingConfig cfg;
    cfg.step = 2 * M_PI / 800;
    cfg.order = 4;
    auto sm = smooth_spherical(c, cfg);
    for (size_t i = 0; i < sm.size(); i += 41) {
        // compare against the analytic circle at the same parameter
        double u = sm.t[i];
        Vec3 expect{std::cos(lat) * std::cos(u), std::cos(lat) * std::sin(u),
                    std::sin(lat)};
        CHECK((sm.pts[i] - expect).norm() < 1e-9);
    }
}
