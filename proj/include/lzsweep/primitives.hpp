#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "fresnel.hpp"
#include "pulses.hpp"

namespace lzsweep {

// ================================================================ Euler roots

struct ClosureRoot {
    int index = 0;
    double zeta = 0;  // t sqrt(v) at the smooth join point
};

// residual of the two-spiral closure condition written in zeta = t sqrt(v):
// cos(zeta^2/2) C(zeta/sqrt2) + sin(zeta^2/2) S(zeta/sqrt2) = 0
inline double closure_equation(double zeta) {
    FresnelValue f = fresnel(zeta / std::sqrt(2.0));
    return std::cos(zeta * zeta / 2) * f.c + std::sin(zeta * zeta / 2) * f.s;
}

// smallest n_max positive roots; scan at step 0.01 and bisect each bracket
inline std::vector<ClosureRoot> closure_roots(int n_max) {
    if (n_max < 1) throw contract_error("closure_roots: n_max >= 1");
    std::vector<ClosureRoot> roots;
    double hi = 20.0;
    double prev_z = 1e-4, prev_f = closure_equation(prev_z);
    for (double z = 0.01; roots.size() < static_cast<size_t>(n_max); z += 0.01) {
        if (z > hi) hi += 10.0;  // extend the scan window if ever needed
        double fz = closure_equation(z);
        if (prev_f == 0.0) {
            roots.push_back({static_cast<int>(roots.size()), prev_z});
        } else if (prev_f * fz < 0) {
            double a = prev_z, b = z, fa = prev_f;
            while (b - a > 1e-12) {
                double m = 0.5 * (a + b), fm = closure_equation(m);
                if (fa * fm <= 0)
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push_back({static_cast<int>(roots.size()), 0.5 * (a + b)});
        }
        prev_z = z;
        prev_f = fz;
    }
    return roots;
}

// ================================================================ SegmentSpec

// Declarative description of a curve piece. Intrinsic coordinates start at
// the origin with tangent +x; placement either continues from the previous
// segment (auto_join, matching position and tangent) or applies an explicit
// rotation + translation. `mirror` reflects the piece across its starting
// tangent, flipping the sign of its curvature.
struct SegmentSpec {
    enum class Kind { euler_spiral, arc, line };
    Kind kind = Kind::line;
    double v = 0, t0 = 0, t1 = 0;              // euler_spiral
    double radius = 0, angle = 0;              // arc
    int orientation = +1;                      // arc: +1 ccw, -1 cw
    double length = 0;                         // line
    bool auto_join = true;
    double place_rotation = 0;
    Vec3 place_translation{};
    bool mirror = false;

    static SegmentSpec spiral(double v, double t0, double t1) {
        SegmentSpec s;
        s.kind = Kind::euler_spiral;
        s.v = v;
        s.t0 = t0;
        s.t1 = t1;
        return s;
    }
    static SegmentSpec make_arc(double radius, double angle, int orientation) {
        SegmentSpec s;
        s.kind = Kind::arc;
        s.radius = radius;
        s.angle = angle;
        s.orientation = orientation;
        return s;
    }
    static SegmentSpec make_line(double length) {
        SegmentSpec s;
        s.kind = Kind::line;
        s.length = length;
        return s;
    }
    double arc_length() const {
        switch (kind) {
            case Kind::euler_spiral: return std::abs(t1 - t0);
            case Kind::arc: return radius * angle;
            case Kind::line: return length;
        }
        return 0;
    }
};

inline void validate_segment(const SegmentSpec& s, bool has_previous) {
    using K = SegmentSpec::Kind;
    if (s.kind == K::euler_spiral) {
        if (!(s.v > 0)) throw contract_error("segment: spiral v must be > 0");
        if (!(s.t1 != s.t0)) throw contract_error("segment: empty spiral range");
    } else if (s.kind == K::arc) {
        if (!(s.radius > 0)) throw contract_error("segment: radius must be > 0");
        if (!(s.angle > 0)) throw contract_error("segment: angle must be > 0");
        if (s.orientation != 1 && s.orientation != -1)
            throw contract_error("segment: orientation must be +-1");
    } else {
        if (!(s.length > 0)) throw contract_error("segment: length must be > 0");
    }
    if (s.auto_join && !has_previous)
        throw contract_error("segment: auto_join requires a preceding segment");
}

// assemble a unit-speed plane curve from segment specs
inline SampledCurve build_from_segments(const std::vector<SegmentSpec>& segs,
                                        double samples_per_unit = 2000.0) {
    if (segs.empty()) throw contract_error("build_from_segments: no segments");
    SampledCurve c;
    c.dim = 2;
    c.is_unit_speed = true;
    Vec3 pos{0, 0, 0};
    double theta = 0;
    double tcur = 0;
    c.t.push_back(0);
    c.pts.push_back(pos);

    bool first = true;
    for (const auto& s : segs) {
        validate_segment(s, !first);
        double L = std::abs(s.arc_length());
        size_t n = std::max<size_t>(8, static_cast<size_t>(
                                           std::ceil(samples_per_unit * L)));
        double rot, mir = s.mirror ? -1.0 : 1.0;
        Vec3 base;
        if (s.auto_join && !first) {
            rot = theta;
            base = pos;
        } else {
            rot = s.place_rotation;
            base = s.place_translation;
            pos = base;
            theta = rot;
        }
        double cr = std::cos(rot), sr = std::sin(rot);
        auto place = [&](const Vec3& p) {
            Vec3 q{p.x, mir * p.y, 0};
            return base + Vec3{cr * q.x - sr * q.y, sr * q.x + cr * q.y, 0};
        };
        double end_angle_intrinsic = 0;

        using K = SegmentSpec::Kind;
        for (size_t k = 1; k <= n; ++k) {
            double u = L * double(k) / double(n);
            Vec3 p;
            if (s.kind == K::line) {
                p = {u, 0, 0};
                end_angle_intrinsic = 0;
            } else if (s.kind == K::arc) {
                double R = s.radius, a = u / R;
                double sgn = s.orientation;
                p = {R * std::sin(a), sgn * R * (1 - std::cos(a)), 0};
                end_angle_intrinsic = sgn * s.angle;
            } else {
                // tangent angle of the spiral at parameter t is -v t^2 / 2;
                // reversed traversal flips the start tangent by pi
                double dir = s.t1 > s.t0 ? 1.0 : -1.0;
                double tt = s.t0 + dir * u;
                Vec3 raw = euler_spiral_point(s.v, tt) -
                           euler_spiral_point(s.v, s.t0);
                double a0 = -s.v * s.t0 * s.t0 / 2 + (dir < 0 ? M_PI : 0.0);
                double ca = std::cos(-a0), sa = std::sin(-a0);
                p = {ca * raw.x - sa * raw.y, sa * raw.x + ca * raw.y, 0};
                end_angle_intrinsic =
                    (-s.v * s.t1 * s.t1 / 2) - (-s.v * s.t0 * s.t0 / 2);
            }
            c.t.push_back(tcur + u);
            c.pts.push_back(place(p));
        }
        pos = c.pts.back();
        theta = rot + mir * end_angle_intrinsic;
        tcur += L;
        first = false;
    }
    return c;
}

// ============================================================ square pulses

// Sample a piecewise-constant drive as a strictly-increasing waveform. Jumps
// become linear ramps of width jump_frac * T centered on the boundary, which
// preserves the integral of Omega across each jump exactly.
inline Waveform square_waveform(const std::vector<std::pair<double, double>>&
                                    segments /* (duration, omega) */,
                                double samples_per_segment = 512,
                                double jump_frac = 1e-6) {
    Waveform w;
    double T = 0;
    for (auto& [d, o] : segments) T += d;
    double wj = jump_frac * T;
    double t = 0;
    for (size_t k = 0; k < segments.size(); ++k) {
        auto [dur, om] = segments[k];
        double a = t, b = t + dur;
        double a_in = (k == 0) ? a : a + wj / 2;
        double b_in = (k + 1 < segments.size()) ? b - wj / 2 : b;
        size_t n = std::max<size_t>(2, static_cast<size_t>(samples_per_segment));
        for (size_t i = 0; i < n; ++i) {
            double tt = a_in + (b_in - a_in) * double(i) / double(n - 1);
            if (!w.t.empty() && tt <= w.t.back()) continue;
            w.t.push_back(tt);
            w.omega.push_back(om);
        }
        t = b;
    }
    return w;
}

// ================================================================= builders

struct DesignBundle {
    SampledCurve curve;
    Waveform pulse;
};

namespace detail {
inline size_t sample_count(double length, double v, double samples_per_zeta) {
    // default sampling density: samples_per_zeta per 1/sqrt(v) of arc length
    double n = samples_per_zeta * length * std::sqrt(v);
    return std::max<size_t>(64, static_cast<size_t>(std::ceil(n)));
}
}  // namespace detail

// Closed curve from two Euler spiral segments joined where r . r' = 0. The
// drive ramps linearly to zeta sqrt(v) at T/2 and back down; total length
// T = 2 zeta / sqrt(v).
inline DesignBundle two_spiral_design(double v, const ClosureRoot& root,
                                      double samples_per_zeta = 2000) {
    if (!(v > 0)) throw contract_error("two_spiral: v > 0");
    double T = 2 * root.zeta / std::sqrt(v);
    size_t n = detail::sample_count(T, v, samples_per_zeta) | 1;  // odd: node at T/2
    Waveform w;
    w.t.resize(n);
    w.omega.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = T * double(i) / double(n - 1);
        w.t[i] = t;
        w.omega[i] = v * std::min(t, T - t);
    }
    w.meta["builder"] = "two-spiral";
    w.meta["v"] = std::to_string(v);
    w.meta["zeta"] = std::to_string(root.zeta);
    w.meta["root_index"] = std::to_string(root.index);
    w.meta["declared_order"] = "1";
    return {plane_error_curve(w), w};
}

inline SampledCurve build_two_spiral_closed(double v, const ClosureRoot& root) {
    return two_spiral_design(v, root).curve;
}

// Zero-area figure-8: two spiral lobes of opposite curvature; starts and
// ends at the bottom of the 8 (nonzero curvature), crossing the anticrossing
// twice. Length T = 4 zeta0 / sqrt(v).
inline DesignBundle figure8_design(double v, double samples_per_zeta = 2000) {
    if (!(v > 0)) throw contract_error("figure8: v > 0");
    double z0 = closure_roots(1)[0].zeta;
    double T0 = 2 * z0 / std::sqrt(v);
    double T = 2 * T0;
    size_t n = detail::sample_count(T, v, samples_per_zeta) | 1;
    Waveform w;
    w.t.resize(n);
    w.omega.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = T * double(i) / double(n - 1);
        w.t[i] = t;
        w.omega[i] = t <= T0 ? v * (t - T0 / 2) : v * (3 * T0 / 2 - t);
    }
    w.meta["builder"] = "figure8";
    w.meta["v"] = std::to_string(v);
    w.meta["declared_order"] = "2";
    return {plane_error_curve(w), w};
}

inline SampledCurve build_figure8(double v) { return figure8_design(v).curve; }

struct SemicircleGeometry {
    double d = 0;           // semicircle diameter, ~1.68/sqrt(v)
    double omega_circ = 0;  // 2/d ~ 1.19 sqrt(v)
    double t_circ = 0;      // pi d / 2 ~ 2.64/sqrt(v)
    double t_euler = 0;     // 2 zeta0 / sqrt(v)
    double T = 0;
    double zeta0 = 0;
};

inline SemicircleGeometry semicircle_geometry(double v) {
    double z0 = closure_roots(1)[0].zeta;
    FresnelValue f = fresnel(z0 / std::sqrt(2.0));
    SemicircleGeometry g;
    g.zeta0 = z0;
    g.d = std::sqrt(2.0 * (f.c * f.c + f.s * f.s) / v);
    g.omega_circ = 2.0 / g.d;
    g.t_circ = M_PI * g.d / 2.0;
    g.t_euler = 2 * z0 / std::sqrt(v);
    g.T = 2 * g.t_circ + g.t_euler;
    return g;
}

// Single sweep through the crossing: semicircle, S-shaped double spiral,
// semicircle. The drive holds at -1.19 sqrt(v), jumps to the ramp from
// -zeta0 sqrt(v) to +zeta0 sqrt(v) at velocity v, then holds at +1.19 sqrt(v).
// C1 but not C2 at the two joins.
inline DesignBundle semicircle_sweep_design(double v,
                                            double samples_per_zeta = 2000,
                                            double jump_frac = 1e-6) {
    if (!(v > 0)) throw contract_error("semicircle: v > 0");
    SemicircleGeometry g = semicircle_geometry(v);
    double sv = std::sqrt(v);
    double T = g.T;
    double wj = jump_frac * T;
    double tj1 = g.t_circ, tj2 = g.t_circ + g.t_euler;

    Waveform w;
    auto emit_span = [&](double a, double b, double oa, double ob, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            double f = double(i) / double(n - 1);
            double tt = a + (b - a) * f;
            if (!w.t.empty() && tt <= w.t.back()) continue;
            w.t.push_back(tt);
            w.omega.push_back(oa + (ob - oa) * f);
        }
    };
    // the jump ramps are centered on the joins; the symmetric smear keeps
    // the integral of Omega (and hence closure) exact to O(v wj^2)
    size_t n1 = detail::sample_count(g.t_circ, v, samples_per_zeta);
    size_t n2 = detail::sample_count(g.t_euler, v, samples_per_zeta);
    auto ramp_at = [&](double t) { return v * (t - (tj1 + g.t_euler / 2)); };
    emit_span(0, tj1 - wj / 2, -g.omega_circ, -g.omega_circ, n1);
    emit_span(tj1 + wj / 2, tj2 - wj / 2, ramp_at(tj1 + wj / 2),
              ramp_at(tj2 - wj / 2), n2);
    emit_span(tj2 + wj / 2, T, g.omega_circ, g.omega_circ, n1);
    w.meta["builder"] = "semicircle";
    w.meta["v"] = std::to_string(v);
    w.meta["declared_order"] = "2";
    return {plane_error_curve(w), w};
}

inline SampledCurve build_semicircle_sweep(double v) {
    return semicircle_sweep_design(v).curve;
}

// =========================================================== phase gates

// Appendix-style square-pulse z gates; the segment tables are reproduced
// verbatim to six significant digits in units of Omega * T.
inline const std::vector<std::pair<double, double>>& phase_gate_table_pi4() {
    // (segment end / T, Omega * T)
    static const std::vector<std::pair<double, double>> rows = {
        {0.490593, -12.8073}, {0.560359, 0.0}, {0.676594, 20.2711},
        {0.725925, 0.0},      {0.76467, 20.2711}, {0.814001, 0.0},
        {0.930231, 20.2711},  {1.0, 0.0}};
    return rows;
}
inline const std::vector<std::pair<double, double>>& phase_gate_table_pi() {
    static const std::vector<std::pair<double, double>> rows = {
        {0.435664, -14.4221}, {0.538169, 0.0}, {0.683391, 14.4221},
        {0.723423, 0.0},      {0.759728, 28.8442}, {0.782168, 0.0},
        {0.854779, 28.8442},  {1.0, -14.4221}};
    return rows;
}

inline Waveform build_phase_gate_square(double phi, double T = 1.0,
                                        double samples_per_segment = 2048) {
    const std::vector<std::pair<double, double>>* rows = nullptr;
    std::string name;
    if (std::abs(phi - M_PI / 4) < 1e-12) {
        rows = &phase_gate_table_pi4();
        name = "pi4";
    } else if (std::abs(phi - M_PI) < 1e-12) {
        rows = &phase_gate_table_pi();
        name = "pi";
    } else {
        throw contract_error(
            "build_phase_gate_square: only phi = pi/4 and pi are tabulated; "
            "use build_phase_gate_general");
    }
    std::vector<std::pair<double, double>> segs;
    double prev = 0;
    for (auto& [end, omT] : *rows) {
        segs.push_back({(end - prev) * T, omT / T});
        prev = end;
    }
    Waveform w = square_waveform(segs, samples_per_segment);
    w.delta = 0;
    w.meta["builder"] = "phase-square";
    w.meta["phi"] = name;
    w.meta["declared_order"] = "2";
    {
        std::ostringstream tab;
        tab.precision(6);
        for (auto& [end, omT] : *rows) tab << omT << '@' << end << ';';
        w.meta["segments_omegaT"] = tab.str();
    }
    return w;
}

// General zero-area phase-gate curve: a full circle in the upper half plane
// balanced against a rounded open path below (three equal corner arcs, side
// pattern a-b-b-a). The angle between initial and final tangents equals phi.
// For phi >= pi the gate is composed of two phi/2 designs back to back.
struct PhaseGateGeometry {
    double circle_radius = 0, corner_radius = 0, side_a = 0, side_b = 0;
    double turn = 0;  // per-corner tangent turn (negative)
    double T = 0;
};

namespace detail {

// Shape solve in units of the corner radius: closure along the symmetry
// bisector fixes side_a as a function of side_b, and the corner-radius
// contract rc = 0.05 T fixes the remaining scale (the whole family is
// scale-free, so T/rc = 20 is one equation in side_b). The final curve is
// normalized to T = 1.
inline PhaseGateGeometry solve_phase_gate_geometry(double phi) {
    PhaseGateGeometry g;
    g.turn = -(2 * M_PI - phi) / 3.0;
    auto dir = [&](int k) {
        return Vec3{std::cos(k * g.turn), std::sin(k * g.turn), 0};
    };
    Vec3 bis{std::cos(1.5 * g.turn), std::sin(1.5 * g.turn), 0};
    Vec3 arcs{};
    for (int k = 0; k < 3; ++k) {
        double mid = k * g.turn + g.turn / 2;
        arcs += 2 * std::sin(std::abs(g.turn) / 2) *
                Vec3{std::cos(mid), std::sin(mid), 0};
    }
    double A = (dir(0) + dir(3)).dot(bis);
    double B = (dir(1) + dir(2)).dot(bis);
    double C = arcs.dot(bis);
    if (!(A < -1e-6) || !(B > 0) || !(C > 0))
        throw solver_error("phase gate: path topology infeasible at phi=" +
                           std::to_string(phi));

    auto eval = [&](double b, double* a_out, double* R_out,
                    double* len_out) {
        double a = (C + b * B) / (-A);
        // trace the open path (rc = 1) and take its signed area
        Vec3 p{0, 0, 0};
        double Apath = 0;
        double th = 0;
        double sides[4] = {a, b, b, a};
        auto add = [&](const Vec3& q) {
            Apath += 0.5 * (p.cross(q)).z;
            p = q;
        };
        for (int k = 0; k < 4; ++k) {
            add(p + sides[k] * Vec3{std::cos(th), std::sin(th), 0});
            if (k < 3) {
                // corner arc sampled finely enough for its bulge area
                int m = 64;
                Vec3 center = p + Vec3{-std::sin(th), std::cos(th), 0} * -1.0;
                double th0 = std::atan2(p.y - center.y, p.x - center.x);
                for (int j = 1; j <= m; ++j) {
                    double aa = th0 - std::abs(g.turn) * j / m;
                    add(center + Vec3{std::cos(aa), std::sin(aa), 0});
                }
                th += g.turn;
            }
        }
        if (a_out) *a_out = a;
        if (R_out) *R_out = std::sqrt(std::max(-Apath, 1e-18) / M_PI);
        if (len_out) *len_out = 2 * (a + sides[1]) + 3 * std::abs(g.turn);
        double R = std::sqrt(std::max(-Apath, 1e-18) / M_PI);
        return 2 * M_PI * R + 2 * (a + b) + 3 * std::abs(g.turn);
    };

    const double T_target = 20.0;  // = 1 / 0.05 in corner-radius units
    double b_lo = 0.0, b_hi = 1.0;
    if (eval(b_lo, nullptr, nullptr, nullptr) > T_target)
        throw solver_error("phase gate: corner-radius contract infeasible at "
                           "phi=" + std::to_string(phi));
    while (eval(b_hi, nullptr, nullptr, nullptr) < T_target) {
        b_hi *= 2;
        if (b_hi > 1e6)
            throw solver_error("phase gate: side-length bracket exhausted");
    }
    for (int it = 0; it < 200; ++it) {
        double b = 0.5 * (b_lo + b_hi);
        if (eval(b, nullptr, nullptr, nullptr) < T_target)
            b_lo = b;
        else
            b_hi = b;
        if (b_hi - b_lo < 1e-15 * std::max(1.0, b_hi)) break;
    }
    double b = 0.5 * (b_lo + b_hi), a, R;
    eval(b, &a, &R, nullptr);
    // normalize to total length 1
    double lam = 1.0 / T_target;
    g.side_a = a * lam;
    g.side_b = b * lam;
    g.corner_radius = lam;
    g.circle_radius = R * lam;
    g.T = 1.0;
    return g;
}

inline std::vector<SegmentSpec> phase_gate_segments(const PhaseGateGeometry& g,
                                                    double R) {
    std::vector<SegmentSpec> segs;
    SegmentSpec circle = SegmentSpec::make_arc(R, 2 * M_PI, +1);
    circle.auto_join = false;
    segs.push_back(circle);
    double sides[4] = {g.side_a, g.side_b, g.side_b, g.side_a};
    for (int k = 0; k < 4; ++k) {
        segs.push_back(SegmentSpec::make_line(sides[k]));
        if (k < 3)
            segs.push_back(
                SegmentSpec::make_arc(g.corner_radius, std::abs(g.turn), -1));
    }
    return segs;
}

inline SampledCurve phase_gate_curve_single(double phi, double samples_per_unit,
                                            PhaseGateGeometry* geom_out) {
    PhaseGateGeometry g = solve_phase_gate_geometry(phi);
    // bisection on the circle radius against the sampled total signed area
    double R_lo = 0.2 * g.circle_radius, R_hi = 2.5 * g.circle_radius;
    auto area_of = [&](double R) {
        SampledCurve c = build_from_segments(phase_gate_segments(g, R),
                                             samples_per_unit);
        return projected_areas(c).z;
    };
    double f_lo = area_of(R_lo), f_hi = area_of(R_hi);
    if (f_lo * f_hi > 0)
        throw solver_error(
            "phase gate: no area-balancing circle radius found in bracket");
    for (int it = 0; it < 80; ++it) {
        double R = 0.5 * (R_lo + R_hi);
        double f = area_of(R);
        if (f_lo * f <= 0) {
            R_hi = R;
            f_hi = f;
        } else {
            R_lo = R;
            f_lo = f;
        }
        if (R_hi - R_lo < 1e-14 * g.circle_radius) break;
    }
    g.circle_radius = 0.5 * (R_lo + R_hi);
    SampledCurve c = build_from_segments(phase_gate_segments(g, g.circle_radius),
                                         samples_per_unit);
    g.T = c.length();
    if (geom_out) *geom_out = g;
    return c;
}

}  // namespace detail

namespace detail {
// square drive of one circle + rounded-path gate in segment order
inline std::vector<std::pair<double, double>> phase_gate_segments_pulse(
    const PhaseGateGeometry& g) {
    std::vector<std::pair<double, double>> segs;
    segs.push_back({2 * M_PI * g.circle_radius, -1.0 / g.circle_radius});
    double sides[4] = {g.side_a, g.side_b, g.side_b, g.side_a};
    for (int k = 0; k < 4; ++k) {
        segs.push_back({sides[k], 0.0});
        if (k < 3)
            segs.push_back(
                {g.corner_radius * std::abs(g.turn), 1.0 / g.corner_radius});
    }
    return segs;
}
}  // namespace detail

// curve plus the analytic square waveform of the general phase gate
inline DesignBundle phase_gate_general_design(double phi,
                                              double samples_per_unit = 0) {
    if (!(phi >= 0.01) || !(phi <= 2 * M_PI - 0.01))
        throw contract_error(
            "phase_gate_general: phi must lie in [0.01, 2*pi - 0.01]");
    double spu = samples_per_unit > 0 ? samples_per_unit : 20000.0;
    DesignBundle out;
    std::vector<std::pair<double, double>> segs;
    if (phi < M_PI) {
        PhaseGateGeometry g;
        out.curve = detail::phase_gate_curve_single(phi, spu, &g);
        segs = detail::phase_gate_segments_pulse(g);
    } else {
        PhaseGateGeometry g;
        SampledCurve half = detail::phase_gate_curve_single(phi / 2, spu, &g);
        out.curve = half;
        double rot = phi / 2;
        double cr = std::cos(rot), sr = std::sin(rot);
        double t_off = half.t.back();
        Vec3 base = half.pts.back();
        for (size_t i = 1; i < half.size(); ++i) {
            const Vec3& p = half.pts[i];
            out.curve.t.push_back(t_off + half.t[i]);
            out.curve.pts.push_back(base + Vec3{cr * p.x - sr * p.y,
                                                sr * p.x + cr * p.y, 0});
        }
        segs = detail::phase_gate_segments_pulse(g);
        auto twice = segs;
        for (auto& s : segs) twice.push_back(s);
        segs = twice;
    }
    out.pulse = square_waveform(segs, 1024);
    out.pulse.meta["builder"] = "phase-general";
    out.pulse.meta["phi"] = std::to_string(phi);
    out.pulse.meta["declared_order"] = "2";
    return out;
}

// Zero-area phase-gate curve; gates with phi >= pi are composed of two
// phi/2 designs back to back (rotations add, and both halves being closed
// with zero area preserves the second-order cancellation).
inline SampledCurve build_phase_gate_general(double phi,
                                             double samples_per_unit = 0) {
    return phase_gate_general_design(phi, samples_per_unit).curve;
}

}  // namespace lzsweep
