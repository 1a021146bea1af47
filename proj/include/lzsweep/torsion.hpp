#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "fresnel.hpp"
#include "geometry.hpp"
#include "pulses.hpp"
#include "smoothing.hpp"

namespace lzsweep {

// ======================================================== binormal template

// Two-fold-symmetric plane template for the binormal curve: an Euler spiral
// segment scaled by 1/sqrt(5) and offset by (x_a, y_a), a straight chord
// through the origin, and the point-reflected copy of the spiral. The
// parameter u is planar arc length; the paper's s-parameterization relates
// through the spiral speed sqrt(v/10) per unit s.
struct BinormalTemplate {
    double v = 0, t_f = 0, x_a = 0, y_a = 0;
    SampledCurve planar;     // dim 2
    SampledCurve spherical;  // lift z = sqrt(1 - x^2 - y^2)
    double u_cusp1 = 0, u_cusp2 = 0;  // join locations (planar arc length)
    double u_total = 0;
    double planar_step = 0;
};

inline BinormalTemplate binormal_template(double v, double t_f, double x_a,
                                          double y_a, double step_s = 0.01) {
    if (!(v > 0) || !(t_f > 0)) throw contract_error("binormal_template: v, t_f > 0");
    BinormalTemplate T;
    T.v = v;
    T.t_f = t_f;
    T.x_a = x_a;
    T.y_a = y_a;
    double spiral_speed = std::sqrt(v / 10.0);
    double h = step_s * spiral_speed;  // planar discretization step
    double lf = spiral_speed * t_f;    // planar length of the spiral piece
    double rho = std::hypot(x_a, y_a);
    if (!(rho > 0)) throw contract_error("binormal_template: zero chord length");
    size_t n1 = std::max<size_t>(8, static_cast<size_t>(std::ceil(lf / h)));
    size_t n2 = std::max<size_t>(8, static_cast<size_t>(std::ceil(2 * rho / h)));
    if (n2 % 2) ++n2;  // keep the chord midpoint (origin) on the grid
    double hA = lf / n1, hB = 2 * rho / n2;

    SampledCurve& P = T.planar;
    P.dim = 2;
    P.is_unit_speed = true;  // planar arc-length parameterization
    const double s5 = std::sqrt(5.0);
    for (size_t j = 0; j <= n1; ++j) {
        double u = hA * j;
        FresnelValue f = fresnel(s5 * (lf - u));
        P.t.push_back(u);
        P.pts.push_back({f.c / s5 + x_a, f.s / s5 + y_a, 0});
    }
    for (size_t k = 1; k <= n2; ++k) {
        double fr = double(k) / double(n2);
        P.t.push_back(lf + hB * k);
        P.pts.push_back({x_a * (1 - 2 * fr), y_a * (1 - 2 * fr), 0});
    }
    for (size_t j = 1; j <= n1; ++j) {
        // point reflection of the first spiral, traversed in reverse
        const Vec3& src = P.pts[n1 - j];
        P.t.push_back(lf + 2 * rho + hA * j);
        P.pts.push_back({-src.x, -src.y, 0});
    }
    T.u_cusp1 = lf;
    T.u_cusp2 = lf + 2 * rho;
    T.u_total = 2 * lf + 2 * rho;
    T.planar_step = h;

    SampledCurve& S = T.spherical;
    S.dim = 3;
    S.is_unit_speed = false;
    S.t = P.t;
    S.pts.resize(P.size());
    for (size_t i = 0; i < P.size(); ++i) {
        double x = P.pts[i].x, y = P.pts[i].y;
        double z2 = 1.0 - x * x - y * y;
        if (z2 <= 1e-12)
            throw contract_error(
                "binormal_template: template leaves the unit disk");
        S.pts[i] = {x, y, std::sqrt(z2)};
    }
    return T;
}

// ========================================================== area residual

struct AreaResidual {
    Vec3 value;
    std::string rule;  // quadrature rule used
    size_t panels = 0;
};

// int b x db over the smoothed spherical curve evaluated from the smoothing
// interpolants with a Gauss-Kronrod panel per retained interval; accurate to
// machine precision for the fitted geometry, which is exactly the geometry
// the Eq.-13 integration uses downstream
inline AreaResidual area_residual(const SmoothingFit& fit) {
    AreaResidual out;
    out.rule = "gk15-per-retained-interval";
    Vec3 acc;
    const auto& sites = fit.retained;
    for (size_t i = 0; i + 1 < sites.size(); ++i) {
        double a = sites[i], b = sites[i + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = 0; k < 15; ++k) {
            double u = mid + half * detail::kGK15Nodes[k];
            double x, xp, xpp, y, yp, ypp;
            fit.x.eval(u, x, xp, xpp);
            fit.y.eval(u, y, yp, ypp);
            double z2 = 1.0 - x * x - y * y;
            if (z2 <= 0)
                throw contract_error("area_residual: fit leaves the unit disk");
            double z = std::sqrt(z2);
            double zp = -(x * xp + y * yp) / z;
            Vec3 bvec{x, y, z}, dbvec{xp, yp, zp};
            acc += (detail::kGK15Weights[k] * half) * bvec.cross(dbvec);
        }
        ++out.panels;
    }
    out.value = acc;
    return out;
}

// ====================================================== area-balance search

struct TorsionSolveOptions {
    double step_s = 0.01;  // discretization in the s units of the template
    int n_spiral = 50;     // removed points on the spiral side of each cusp
    int n_arc = 34;        // removed points on the great-arc side
    int order = 3;         // interpolation order M
    int max_iter = 500;
    double residual_target = 1e-7;
    double initial_step = 2e-3;
};

struct SolveTraceRow {
    int iter = 0;
    double t_f = 0, x_a = 0, y_a = 0, residual = 0;
};

struct AreaBalanceResult {
    double t_f = 0, x_a = 0, y_a = 0;
    double residual = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<SolveTraceRow> trace;
};

namespace detail {

inline SmoothingConfig torsion_smoothing_config(const BinormalTemplate& tmpl,
                                                const TorsionSolveOptions& opt) {
    SmoothingConfig cfg;
    cfg.step = tmpl.planar_step;
    cfg.order = opt.order;
    // cusp 1 is approached along the spiral; cusp 2 leaves along it
    cfg.remove = {{tmpl.u_cusp1, opt.n_spiral, opt.n_arc},
                  {tmpl.u_cusp2, opt.n_arc, opt.n_spiral}};
    return cfg;
}

inline SmoothingFit torsion_fit(double v, double t_f, double x_a, double y_a,
                                const TorsionSolveOptions& opt,
                                BinormalTemplate* tmpl_out = nullptr) {
    BinormalTemplate tmpl = binormal_template(v, t_f, x_a, y_a, opt.step_s);
    SmoothingConfig cfg = torsion_smoothing_config(tmpl, opt);
    SmoothingFit fit = fit_smoothing(tmpl.spherical, cfg, false);
    if (tmpl_out) *tmpl_out = std::move(tmpl);
    return fit;
}

}  // namespace detail

// Derivative-free search for {t_f, x_a, y_a} such that the smoothed
// spherical template satisfies ||int b x db|| <= residual_target. The
// template's two-fold symmetry kills the component of the residual along the
// rotation axis identically, which is asserted at the seed before solving.
inline AreaBalanceResult area_balance_solve(double v, double t_f0, double x_a0,
                                            double y_a0,
                                            const TorsionSolveOptions& opt = {}) {
    {
        SmoothingFit fit = detail::torsion_fit(v, t_f0, x_a0, y_a0, opt);
        AreaResidual r0 = area_residual(fit);
        if (std::abs(r0.value.z) > 1e-12)
            throw contract_error(
                "area_balance_solve: symmetry-protected residual component is "
                "nonzero at the seed (" + std::to_string(r0.value.z) + ")");
    }
    AreaBalanceResult out;
    auto objective = [&](const std::vector<double>& p) {
        try {
            SmoothingFit fit = detail::torsion_fit(v, p[0], p[1], p[2], opt);
            return area_residual(fit).value.norm();
        } catch (const std::exception&) {
            return 1e3;
        }
    };

    std::vector<double> x{t_f0, x_a0, y_a0};
    int used = 0;
    double step = opt.initial_step;
    for (int round = 0; round < 4 && used < opt.max_iter; ++round) {
        NelderMeadOptions nm;
        nm.max_iter = opt.max_iter - used;
        nm.f_target = 0.5 * opt.residual_target;
        nm.initial_step = step;
        auto trace_cb = [&](int it, const std::vector<double>& bx, double bf) {
            out.trace.push_back({used + it, bx[0], bx[1], bx[2], bf});
        };
        NelderMeadResult r = nelder_mead(objective, x, nm, trace_cb);
        used += r.iterations + 1;
        x = r.x;
        out.residual = r.f;
        if (r.converged || r.f <= opt.residual_target) {
            out.converged = true;
            break;
        }
        step *= 0.25;  // restart around the best point with a tighter simplex
    }
    out.iterations = used;
    out.t_f = x[0];
    out.x_a = x[1];
    out.y_a = x[2];
    if (!out.converged)
        throw solver_error("area_balance_solve: no convergence after " +
                           std::to_string(used) + " iterations; best residual " +
                           std::to_string(out.residual));
    return out;
}

// ================================================== constant-torsion curves

// r~(s) = (1/tau_c) int_0^s b x db with tau_c = -|tau| (so the constructed
// curve carries torsion -|tau| and the extracted gap is Delta = +|tau|),
// followed by arc-length reparameterization with speed |db/ds|/|tau|.
// The cumulative rule is the trapezoid at the native sampling; a half-step
// Richardson check guards against under-resolved input.
inline SampledCurve integrate_constant_torsion(const SampledCurve& b,
                                               double tau,
                                               size_t n_out = 0) {
    if (tau == 0)
        throw contract_error(
            "integrate_constant_torsion: tau = 0 describes a plane curve; use "
            "the plane-curve machinery");
    validate_basic(b);
    if (b.dim != 3) throw contract_error("integrate_constant_torsion: b must be 3D");
    for (size_t i = 0; i < b.size(); ++i)
        if (std::abs(b.pts[i].norm() - 1.0) > 1e-9)
            throw contract_error(
                "integrate_constant_torsion: b must lie on the unit sphere");

    const double tau_c = -std::abs(tau);
    size_t n = b.size();
    auto endpoint = [&](size_t stride) {
        Vec3 acc;
        size_t prev = 0;
        for (size_t i = stride; i < n; i += stride) {
            acc += 0.5 * (b.pts[prev] + b.pts[i]).cross(b.pts[i] - b.pts[prev]);
            prev = i;
        }
        if (prev != n - 1)
            acc += 0.5 * (b.pts[prev] + b.pts[n - 1])
                       .cross(b.pts[n - 1] - b.pts[prev]);
        return acc / tau_c;
    };
    Vec3 full = endpoint(1), half = endpoint(2);
    if ((full - half).norm() > 1e-8 * std::max(1.0, full.norm()))
        throw contract_error(
            "integrate_constant_torsion: half-step check failed; sampling of b "
            "is too coarse (double it)");

    SampledCurve rt;
    rt.dim = 3;
    rt.is_unit_speed = false;
    rt.t = b.t;
    rt.pts.resize(n);
    Vec3 acc;
    rt.pts[0] = acc;
    for (size_t i = 1; i < n; ++i) {
        acc += (0.5 / tau_c) *
               (b.pts[i - 1] + b.pts[i]).cross(b.pts[i] - b.pts[i - 1]);
        rt.pts[i] = acc;
    }
    // speed |db/ds| / |tau| by centered differences
    std::vector<double> speed(n);
    for (size_t i = 0; i < n; ++i) {
        size_t i0 = i > 0 ? i - 1 : 0;
        size_t i1 = i + 1 < n ? i + 1 : n - 1;
        speed[i] = (b.pts[i1] - b.pts[i0]).norm() /
                   ((b.t[i1] - b.t[i0]) * std::abs(tau_c));
    }
    return arc_length_reparameterize(rt, n_out ? n_out : n, &speed);
}

// Omega(t) = -kappa(t), Delta = -tau with the gauge fixed so the sweep
// starts above the crossing (Omega(0) > 0), as in the constant-torsion
// designs.
//
// Fitted templates carry small tangent corners where their interpolation
// stencils switch; finite differences across such a corner ring with
// delta-like curvature spikes of height ~ (corner angle)/h. The despike pass
// replaces each ringing window with a linear ramp carrying the same integral
// of Omega, so the corner's genuine turn is preserved while the drive stays
// bounded.
inline ExtractedPulse extract_lz_pulse(const SampledCurve& r) {
    ExtractedPulse p = extract_pulse(r, PulseGauge::positive_start);
    Waveform& w = p.waveform;
    size_t n = w.size();
    if (n > 200) {
        const long look = 25;
        std::vector<std::uint8_t> spike(n, 0);
        for (size_t i = look; i + look < n; ++i) {
            double base = 0.5 * (w.omega[i - look] + w.omega[i + look]);
            if (std::abs(w.omega[i] - base) > 1.0) spike[i] = 1;
        }
        size_t i = 1;
        while (i + 1 < n) {
            if (!spike[i]) {
                ++i;
                continue;
            }
            size_t a = i, b = i;
            while (b + 1 < n && (spike[b + 1] || b - a < 4)) ++b;
            long a0 = std::max<long>(1, static_cast<long>(a) - 2 * look);
            long b0 = std::min<long>(n - 2, static_cast<long>(b) + 2 * look);
            // conserve int omega dt over the replaced window
            double area = 0;
            for (long k = a0; k < b0; ++k)
                area += 0.5 * (w.omega[k] + w.omega[k + 1]) *
                        (w.t[k + 1] - w.t[k]);
            double width = w.t[b0] - w.t[a0];
            double oa = w.omega[a0], ob = w.omega[b0];
            double ramp_area = 0.5 * (oa + ob) * width;
            double lift = (area - ramp_area) / width;
            for (long k = a0; k <= b0; ++k) {
                double u = (w.t[k] - w.t[a0]) / width;
                w.omega[k] = oa + (ob - oa) * u + lift;
            }
            i = b0 + 1;
        }
    }
    // Close the delivered pulse's own error curve (sub-1e-4 bump trim, same
    // spirit as re-balancing the template parameters after smoothing): three
    // localized unit-area drive bumps steer the 3-vector closure defect of
    // the Frenet-reconstructed curve to zero.
    {
        double T = w.duration();
        double s = 0.04 * T;
        double tc[3] = {0.2 * T, 0.45 * T, 0.7 * T};
        auto bump = [&](double t, double c0) {
            double u = std::abs(t - c0) / s;
            return u < 1.0 ? (1.0 - u) / s : 0.0;
        };
        auto closure_vec = [&](const double* a) {
            Waveform probe = w;
            for (size_t i = 0; i < probe.size(); ++i)
                for (int k = 0; k < 3; ++k)
                    probe.omega[i] += a[k] * bump(probe.t[i], tc[k]);
            SampledCurve c = curve_from_pulse(probe);
            return c.pts.back() - c.pts.front();
        };
        double a[3] = {0, 0, 0};
        for (int iter = 0; iter < 3; ++iter) {
            Vec3 f = closure_vec(a);
            if (f.norm() < 1e-10 * std::max(1.0, T)) break;
            double h = 1e-6;
            Vec3 cols[3];
            for (int k = 0; k < 3; ++k) {
                double ap[3] = {a[0], a[1], a[2]};
                ap[k] += h;
                cols[k] = (closure_vec(ap) - f) / h;
            }
            double det = cols[0].dot(cols[1].cross(cols[2]));
            if (std::abs(det) < 1e-12) break;
            // Cramer solve J da = -f
            Vec3 rhs = -1.0 * f;
            double d0 = rhs.dot(cols[1].cross(cols[2])) / det;
            double d1 = cols[0].dot(rhs.cross(cols[2])) / det;
            double d2 = cols[0].dot(cols[1].cross(rhs)) / det;
            a[0] += d0;
            a[1] += d1;
            a[2] += d2;
        }
        for (size_t i = 0; i < w.size(); ++i)
            for (int k = 0; k < 3; ++k)
                w.omega[i] += a[k] * bump(w.t[i], tc[k]);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6e,%.6e,%.6e", a[0], a[1], a[2]);
        w.meta["closure_trim"] = buf;
    }
    w.meta["builder"] = "torsion";
    w.meta["declared_order"] = "1";
    return p;
}

// ============================================================ full pipeline

struct ConstantTorsionDesign {
    AreaBalanceResult solve;
    BinormalTemplate tmpl;          // template at the converged parameters
    SampledCurve b;                 // smoothed binormal, dense sampling
    SampledCurve b_on_t;            // binormal resampled onto the time grid
    SampledCurve r;                 // unit-speed constant-torsion error curve
    ExtractedPulse pulse;
    double tau = 0;
    double residual = 0;
};

// end-to-end Fig.-7-style design: area-balance solve, dense evaluation of the
// smoothed binormal (doubled until the half-step check passes), Eq.-13
// integration, reparameterization, and pulse extraction
inline ConstantTorsionDesign design_constant_torsion(
    double v, double tau, double t_f0, double x_a0, double y_a0,
    const TorsionSolveOptions& opt = {}, size_t n_curve = 120001) {
    if (tau == 0) throw contract_error("design_constant_torsion: tau != 0");
    ConstantTorsionDesign d;
    d.tau = tau;
    d.solve = area_balance_solve(v, t_f0, x_a0, y_a0, opt);

    SmoothingFit fit =
        detail::torsion_fit(v, d.solve.t_f, d.solve.x_a, d.solve.y_a, opt,
                            &d.tmpl);
    d.residual = area_residual(fit).value.norm();

    size_t n_dense = 1 << 17;
    for (int attempt = 0;; ++attempt) {
        SampledCurve bs;
        bs.dim = 3;
        bs.is_unit_speed = false;
        bs.t.resize(n_dense + 1);
        bs.pts.resize(n_dense + 1);
        for (size_t j = 0; j <= n_dense; ++j) {
            double u = fit.t0 + (fit.t1 - fit.t0) * double(j) / double(n_dense);
            double x = fit.x(u), y = fit.y(u);
            double z2 = 1.0 - x * x - y * y;
            if (z2 <= 0)
                throw solver_error("design_constant_torsion: fit leaves the disk");
            bs.t[j] = u;
            bs.pts[j] = {x, y, std::sqrt(z2)};
        }
        try {
            d.r = integrate_constant_torsion(bs, tau, n_curve);
            d.b = std::move(bs);
            break;
        } catch (const contract_error&) {
            if (attempt >= 4) throw;
            n_dense *= 2;
        }
    }

    // binormal resampled onto the curve's time grid (for frame comparisons)
    {
        size_t n = d.b.size();
        std::vector<double> s(n, 0.0);
        for (size_t i = 1; i < n; ++i)
            s[i] = s[i - 1] + (d.b.pts[i] - d.b.pts[i - 1]).norm() / std::abs(tau);
        std::vector<double> xs(n), ys(n), zs(n);
        for (size_t i = 0; i < n; ++i) {
            xs[i] = d.b.pts[i].x;
            ys[i] = d.b.pts[i].y;
            zs[i] = d.b.pts[i].z;
        }
        CubicSpline cx(s, xs), cy(s, ys), cz(s, zs);
        d.b_on_t.dim = 3;
        d.b_on_t.is_unit_speed = false;
        d.b_on_t.t = d.r.t;
        d.b_on_t.pts.resize(d.r.size());
        double L = s.back();
        for (size_t i = 0; i < d.r.size(); ++i) {
            double q = std::min(d.r.t[i], L);
            Vec3 bb{cx(q), cy(q), cz(q)};
            d.b_on_t.pts[i] = bb.normalized();
        }
    }

    d.pulse = extract_lz_pulse(d.r);
    d.pulse.waveform.meta["v"] = std::to_string(v);
    d.pulse.waveform.meta["t_f"] = std::to_string(d.solve.t_f);
    d.pulse.waveform.meta["x_a"] = std::to_string(d.solve.x_a);
    d.pulse.waveform.meta["y_a"] = std::to_string(d.solve.y_a);
    d.pulse.waveform.meta["residual"] = std::to_string(d.residual);
    return d;
}

}  // namespace lzsweep
