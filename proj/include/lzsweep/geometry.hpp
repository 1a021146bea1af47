#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "interp.hpp"
#include "numerics.hpp"
#include "vec.hpp"

namespace lzsweep {

// ============================================================== core types

// Arc-length-parameterized polyline in 2D or 3D. `t` is the curve parameter
// (arc length when is_unit_speed). For dim 2 the z component is zero.
struct SampledCurve {
    int dim = 2;
    std::vector<double> t;
    std::vector<Vec3> pts;
    bool is_unit_speed = false;

    size_t size() const { return t.size(); }
    double length() const { return t.empty() ? 0.0 : t.back() - t.front(); }
};

struct FrenetFrame {
    Vec3 tangent, normal, binormal;
};

struct CurveInvariants {
    std::vector<double> curvature;        // signed, units 1/time
    std::vector<double> torsion;          // carried forward where undefined
    std::vector<std::uint8_t> torsion_defined;
};

struct FrenetData {
    std::vector<FrenetFrame> frames;
    CurveInvariants invariants;
};

// torsion is marked undefined below this curvature (relative to 1/length)
inline double curvature_floor(const SampledCurve& c) {
    return 1e-8 / std::max(c.length(), 1e-300);
}

// ========================================================== validation

inline void validate_basic(const SampledCurve& c) {
    if (c.dim != 2 && c.dim != 3) throw contract_error("curve: dim must be 2 or 3");
    if (c.size() < 4) throw contract_error("curve: need at least 4 samples");
    if (c.pts.size() != c.t.size())
        throw contract_error("curve: t/pts size mismatch");
    for (size_t i = 0; i + 1 < c.size(); ++i)
        if (!(c.t[i + 1] > c.t[i]))
            throw contract_error("curve: parameter must be strictly increasing");
}

// Chord speed underestimates a unit-speed curve by (kappa*dt)^2/24, so the
// tolerance gets a turning-angle correction on top of the 1e-6 contract.
inline void validate_unit_speed(const SampledCurve& c) {
    validate_basic(c);
    if (!c.is_unit_speed)
        throw contract_error("curve: operation requires a unit-speed curve");
    size_t n = c.size();
    std::vector<Vec3> dir(n - 1);
    for (size_t i = 0; i + 1 < n; ++i)
        dir[i] = (c.pts[i + 1] - c.pts[i]).normalized();
    auto angle = [&](size_t a, size_t b) {
        double cosa = std::clamp(dir[a].dot(dir[b]), -1.0, 1.0);
        return std::acos(cosa);
    };
    for (size_t i = 0; i + 1 < n; ++i) {
        double dt = c.t[i + 1] - c.t[i];
        double speed = (c.pts[i + 1] - c.pts[i]).norm() / dt;
        // neighboring turning angle bounds the chord shortfall (kappa dt)^2/24
        double ang = 0;
        if (i > 0) ang = std::max(ang, angle(i - 1, i));
        if (i + 2 < n) ang = std::max(ang, angle(i, i + 1));
        double slack = 1e-6 + ang * ang / 4.0;
        if (std::abs(speed - 1.0) > slack)
            throw contract_error("curve: not unit speed at t=" +
                                 std::to_string(c.t[i]));
    }
}

// ========================================================== derivatives

namespace detail {

// per-sample derivative of sampled data: 5-point interior stencils (4th order
// on uniform grids), one-sided stencils at the ends. Fornberg weights handle
// mildly non-uniform grids too.
inline std::vector<Vec3> sampled_derivative(const std::vector<double>& t,
                                            const std::vector<Vec3>& p, int m) {
    size_t n = t.size();
    int width = (m <= 2) ? 5 : 7;
    if (static_cast<int>(n) < width) width = static_cast<int>(n);
    if (width < m + 1)
        throw contract_error("derivative: too few samples (resolution)");
    std::vector<Vec3> out(n);

    // detect uniform spacing so stencil weights can be reused
    double h0 = t[1] - t[0];
    bool uniform = true;
    for (size_t i = 0; i + 1 < n; ++i)
        if (std::abs((t[i + 1] - t[i]) - h0) > 1e-9 * std::abs(h0)) {
            uniform = false;
            break;
        }

    std::vector<double> wcache;
    int half = width / 2;
    for (size_t i = 0; i < n; ++i) {
        long j0 = static_cast<long>(i) - half;
        j0 = std::max(0L, std::min(j0, static_cast<long>(n) - width));
        bool interior = (j0 == static_cast<long>(i) - half);
        std::vector<double> w;
        if (uniform && interior) {
            if (wcache.empty()) {
                std::vector<double> xs(width);
                for (int k = 0; k < width; ++k) xs[k] = (k - half) * h0;
                wcache = fd_weights(0.0, xs, m);
            }
            w = wcache;
        } else {
            std::vector<double> xs(t.begin() + j0, t.begin() + j0 + width);
            w = fd_weights(t[i], xs, m);
        }
        Vec3 acc;
        for (int k = 0; k < width; ++k) acc += w[k] * p[j0 + k];
        out[i] = acc;
    }
    return out;
}

}  // namespace detail

// ========================================================== Frenet data

// Frames and invariants of a unit-speed curve. Curvature is signed: in 2D the
// normal is the tangent rotated by +90 degrees and kappa = x'y'' - y'x''; in
// 3D the sign is chosen to keep the normal continuous, flipping exactly where
// r''(t+) . r''(t-) < 0. `start_sign` picks the overall gauge in 3D.
inline FrenetData frenet_data(const SampledCurve& c, int start_sign = +1) {
    validate_unit_speed(c);
    if (c.size() < 5) throw contract_error("frenet_data: need >= 5 samples (resolution)");

    size_t n = c.size();
    auto d1 = detail::sampled_derivative(c.t, c.pts, 1);
    auto d2 = detail::sampled_derivative(c.t, c.pts, 2);
    auto d3 = detail::sampled_derivative(c.t, c.pts, 3);

    FrenetData out;
    out.frames.resize(n);
    out.invariants.curvature.resize(n);
    out.invariants.torsion.assign(n, 0.0);
    out.invariants.torsion_defined.assign(n, 0);
    double floor = curvature_floor(c);

    if (c.dim == 2) {
        for (size_t i = 0; i < n; ++i) {
            Vec3 T = d1[i].normalized();
            Vec3 N = rot90(T);
            out.frames[i] = {T, N, {0, 0, 1}};
            out.invariants.curvature[i] = d1[i].x * d2[i].y - d1[i].y * d2[i].x;
            if (std::abs(out.invariants.curvature[i]) > floor) {
                out.invariants.torsion[i] = 0.0;
                out.invariants.torsion_defined[i] = 1;
            }
        }
    } else {
        std::vector<double> kmag(n);
        double kmax = 0;
        for (size_t i = 0; i < n; ++i) {
            kmag[i] = d2[i].norm();
            kmax = std::max(kmax, kmag[i]);
        }
        // sign continuity; near-zero curvature samples are bridged by
        // comparing r'' across the low-curvature window
        double gate = std::max(floor, 1e-6 * kmax);
        std::vector<int> sign(n, 0);
        int cur = start_sign;
        Vec3 last_good;
        bool have_good = false;
        for (size_t i = 0; i < n; ++i) {
            if (kmag[i] <= gate) continue;
            if (have_good) {
                double dot = d2[i].dot(last_good);
                if (dot < 0) cur = -cur;  // flip across sign change of r''
            }
            sign[i] = cur;
            last_good = d2[i];
            have_good = true;
        }
        // fill gated samples with the neighboring sign
        int prev = start_sign;
        for (size_t i = 0; i < n; ++i) {
            if (sign[i] == 0)
                sign[i] = prev;
            else
                prev = sign[i];
        }

        for (size_t i = 0; i < n; ++i) {
            Vec3 T = d1[i].normalized();
            double kappa = sign[i] * kmag[i];
            out.invariants.curvature[i] = kappa;
            Vec3 N;
            if (kmag[i] > gate)
                N = (d2[i] / kappa).normalized() * 1.0;
            else if (i > 0)
                N = out.frames[i - 1].normal;  // carry through inflections
            else
                N = rot90(T).normalized();
            // re-orthogonalize against the tangent
            N = (N - T * N.dot(T)).normalized();
            Vec3 B = T.cross(N);
            out.frames[i] = {T, N, B};

            // torsion = ((r' x r'') . r''') / |r' x r''|^2
            Vec3 cxp = d1[i].cross(d2[i]);
            double denom = cxp.norm2();
            if (kmag[i] > floor && denom > 0) {
                out.invariants.torsion[i] = cxp.dot(d3[i]) / denom;
                out.invariants.torsion_defined[i] = 1;
            } else {
                out.invariants.torsion[i] =
                    (i > 0) ? out.invariants.torsion[i - 1] : 0.0;
            }
        }
    }
    return out;
}

// ========================================================== reparameterization

namespace detail {

struct ResampleResult {
    SampledCurve curve;
    double total_length = 0;
};

// resample points onto a uniform arc-length grid via per-coordinate cubic
// splines; `s` must be the cumulative arc length at the input samples
inline ResampleResult resample_uniform_arclength(const std::vector<double>& s,
                                                 const std::vector<Vec3>& pts,
                                                 int dim, size_t n_out) {
    CubicSpline sx, sy, sz;
    std::vector<double> xs(pts.size()), ys(pts.size()), zs(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
        zs[i] = pts[i].z;
    }
    sx = CubicSpline(s, xs);
    sy = CubicSpline(s, ys);
    if (dim == 3) sz = CubicSpline(s, zs);

    // refine the arc length of the spline image itself with per-interval
    // quadrature, then invert the (monotone) map
    double L = s.back() - s.front();
    std::vector<double> arc(s.size(), 0.0);
    for (size_t i = 0; i + 1 < s.size(); ++i) {
        auto speed = [&](double q) {
            double dx = sx.deriv(q), dy = sy.deriv(q);
            double dz = (dim == 3) ? sz.deriv(q) : 0.0;
            return std::sqrt(dx * dx + dy * dy + dz * dz);
        };
        arc[i + 1] = arc[i] + gk15_panel(speed, s[i], s[i + 1]);
    }
    double Ltrue = arc.back();

    ResampleResult out;
    out.total_length = Ltrue;
    out.curve.dim = dim;
    out.curve.is_unit_speed = true;
    out.curve.t.resize(n_out);
    out.curve.pts.resize(n_out);
    size_t k = 0;
    for (size_t j = 0; j < n_out; ++j) {
        double target = Ltrue * double(j) / double(n_out - 1);
        while (k + 2 < arc.size() && arc[k + 1] < target) ++k;
        // local linear inversion inside the bracketing interval
        double f = (arc[k + 1] > arc[k])
                       ? (target - arc[k]) / (arc[k + 1] - arc[k])
                       : 0.0;
        double q = s[k] + f * (s[k + 1] - s[k]);
        out.curve.pts[j] = {sx(q), sy(q), dim == 3 ? sz(q) : 0.0};
    }
    // re-anchor the parameter to the arc length of the sampled polyline
    // itself (chords with the circular second-order correction); the claimed
    // parameter then matches the geometry even where the spline rings over a
    // tangent kink of the input
    out.curve.t[0] = 0;
    Vec3 prev_dir{};
    bool have_prev = false;
    for (size_t j = 0; j + 1 < n_out; ++j) {
        Vec3 seg = out.curve.pts[j + 1] - out.curve.pts[j];
        double chord = seg.norm();
        double ang = 0;
        if (have_prev && chord > 0) {
            double cosa = std::clamp(prev_dir.dot(seg / chord), -1.0, 1.0);
            ang = std::acos(cosa);
        }
        out.curve.t[j + 1] = out.curve.t[j] + chord * (1 + ang * ang / 24.0);
        if (chord > 0) {
            prev_dir = seg / chord;
            have_prev = true;
        }
    }
    (void)L;
    return out;
}

}  // namespace detail

// Reparameterize a curve with nowhere-vanishing speed to unit speed. The
// geometric image is interpolated with cubic splines; total arc length is
// preserved to better than 1e-6 relative for reasonably dense inputs.
inline SampledCurve arc_length_reparameterize(
    const SampledCurve& c, std::optional<size_t> n_out = std::nullopt,
    const std::vector<double>* speeds = nullptr) {
    validate_basic(c);
    std::vector<double> s(c.size(), 0.0);
    if (speeds) {
        if (speeds->size() != c.size())
            throw contract_error("reparameterize: speeds size mismatch");
        for (size_t i = 0; i + 1 < c.size(); ++i) {
            double dt = c.t[i + 1] - c.t[i];
            double sp = 0.5 * ((*speeds)[i] + (*speeds)[i + 1]);
            if (sp < 1e-12)
                throw contract_error("reparameterize: degenerate speed at t=" +
                                     std::to_string(c.t[i]));
            s[i + 1] = s[i] + sp * dt;
        }
    } else {
        for (size_t i = 0; i + 1 < c.size(); ++i) {
            double dt = c.t[i + 1] - c.t[i];
            double chord = (c.pts[i + 1] - c.pts[i]).norm();
            if (chord / dt < 1e-12)
                throw contract_error("reparameterize: degenerate speed at t=" +
                                     std::to_string(c.t[i]));
            s[i + 1] = s[i] + chord;
        }
        if (c.is_unit_speed) {
            // already unit speed: nothing to do
            bool ok = true;
            for (size_t i = 0; i + 1 < c.size() && ok; ++i) {
                double dt = c.t[i + 1] - c.t[i];
                double sp = (c.pts[i + 1] - c.pts[i]).norm() / dt;
                if (std::abs(sp - 1.0) > 2e-4) ok = false;
            }
            if (ok && !n_out) return c;
        }
    }
    size_t m = n_out.value_or(c.size());
    auto res = detail::resample_uniform_arclength(s, c.pts, c.dim, m);
    return res.curve;
}

// ========================================================== integral metrics

// signed projected areas (1/2) oint r x dr per Cartesian axis, evaluated by
// the shoelace rule on each projection; open curves get the literal line
// integral with no implicit closing chord
inline Vec3 projected_areas(const SampledCurve& c) {
    validate_basic(c);
    Vec3 acc;
    for (size_t i = 0; i + 1 < c.size(); ++i)
        acc += c.pts[i].cross(c.pts[i + 1]);
    return acc * 0.5;
}

inline double closure_defect(const SampledCurve& c) {
    validate_basic(c);
    return (c.pts.back() - c.pts.front()).norm();
}

// ========================================================== evolute

// e(t) = r(t) + n(t)/kappa(t) for plane curves
inline SampledCurve evolute(const SampledCurve& c) {
    if (c.dim != 2) throw contract_error("evolute: plane curves only");
    FrenetData fd = frenet_data(c);
    double floor = curvature_floor(c);
    SampledCurve out;
    out.dim = 2;
    out.is_unit_speed = false;
    out.t = c.t;
    out.pts.resize(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        double k = fd.invariants.curvature[i];
        if (std::abs(k) <= floor)
            throw contract_error("evolute: zero curvature at t=" +
                                 std::to_string(c.t[i]));
        out.pts[i] = c.pts[i] + fd.frames[i].normal / k;
    }
    return out;
}

// ========================================================== self-intersection

namespace detail {

// exact 2D orientation predicate: sign of (b-a) x (c-a). A floating-point
// filter handles almost every call; near-degenerate cases fall back to an
// exact expansion-arithmetic evaluation of the 3x3 determinant.
inline int orient2d_exact_fallback(const Vec3& a, const Vec3& b, const Vec3& c) {
    auto two_prod = [](double x, double y, double& hi, double& lo) {
        hi = x * y;
        lo = std::fma(x, y, -hi);
    };
    // det = ax by - ax cy + bx cy - bx ay + cx ay - cx by
    double hs[6], ls[6];
    two_prod(a.x, b.y, hs[0], ls[0]);
    two_prod(-a.x, c.y, hs[1], ls[1]);
    two_prod(b.x, c.y, hs[2], ls[2]);
    two_prod(-b.x, a.y, hs[3], ls[3]);
    two_prod(c.x, a.y, hs[4], ls[4]);
    two_prod(-c.x, b.y, hs[5], ls[5]);
    // exact expansion sum of the 12 components
    std::vector<double> e;
    auto grow = [&](double v) {
        if (v == 0.0) return;
        double q = v;
        std::vector<double> h;
        for (double ei : e) {
            double s = q + ei;
            double bv = s - q;
            double av = s - bv;
            double err = (q - av) + (ei - bv);
            if (err != 0.0) h.push_back(err);
            q = s;
        }
        h.push_back(q);
        e.swap(h);
    };
    for (int i = 0; i < 6; ++i) {
        grow(ls[i]);
        grow(hs[i]);
    }
    for (auto it = e.rbegin(); it != e.rend(); ++it) {
        if (*it > 0) return 1;
        if (*it < 0) return -1;
    }
    return 0;
}

inline int orient2d(const Vec3& a, const Vec3& b, const Vec3& c) {
    double l = (b.x - a.x) * (c.y - a.y);
    double r = (b.y - a.y) * (c.x - a.x);
    double det = l - r;
    double bound = 3.33e-16 * (std::abs(l) + std::abs(r));
    if (det > bound) return 1;
    if (det < -bound) return -1;
    if (std::abs(det) <= 1e-12 || std::abs(det) <= bound)
        return orient2d_exact_fallback(a, b, c);
    return det > 0 ? 1 : -1;
}

inline bool on_segment(const Vec3& p, const Vec3& q, const Vec3& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
}

// proper or improper intersection of closed segments [p1,p2], [p3,p4]
inline bool segments_intersect(const Vec3& p1, const Vec3& p2, const Vec3& p3,
                               const Vec3& p4) {
    int d1 = orient2d(p3, p4, p1);
    int d2 = orient2d(p3, p4, p2);
    int d3 = orient2d(p1, p2, p3);
    int d4 = orient2d(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(p3, p1, p4)) return true;
    if (d2 == 0 && on_segment(p3, p2, p4)) return true;
    if (d3 == 0 && on_segment(p1, p3, p2)) return true;
    if (d4 == 0 && on_segment(p1, p4, p2)) return true;
    return false;
}

}  // namespace detail

struct Intersection {
    double t1 = 0, t2 = 0;  // curve parameters of the two branches
};

// All transverse self-intersections of a plane polyline. Adjacent segments
// are excluded; for closed curves the wrap-around endpoint touch is excluded
// as well. Spatial hashing keeps the sweep near-linear.
inline std::vector<Intersection> self_intersections(const SampledCurve& curve_in) {
    if (curve_in.dim != 2)
        throw contract_error("self_intersections: plane curves only");
    validate_basic(curve_in);
    size_t nseg = curve_in.size() - 1;
    bool closed =
        closure_defect(curve_in) < 1e-9 * std::max(curve_in.length(), 1.0);
    // snap the seam of closed curves so nothing threads the roundoff gap
    SampledCurve c = curve_in;
    if (closed) c.pts.back() = c.pts.front();

    double cell = 0;
    for (size_t i = 0; i < nseg; ++i)
        cell = std::max(cell, (c.pts[i + 1] - c.pts[i]).norm());
    if (cell <= 0) return {};
    auto key = [&](long ix, long iy) {
        return (static_cast<std::int64_t>(ix) << 32) ^
               (static_cast<std::int64_t>(iy) & 0xffffffffLL);
    };
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
    grid.reserve(nseg * 2);
    auto cell_of = [&](const Vec3& p, long& ix, long& iy) {
        ix = static_cast<long>(std::floor(p.x / cell));
        iy = static_cast<long>(std::floor(p.y / cell));
    };
    for (size_t i = 0; i < nseg; ++i) {
        long ix0, iy0, ix1, iy1;
        cell_of(c.pts[i], ix0, iy0);
        cell_of(c.pts[i + 1], ix1, iy1);
        for (long ix = std::min(ix0, ix1); ix <= std::max(ix0, ix1); ++ix)
            for (long iy = std::min(iy0, iy1); iy <= std::max(iy0, iy1); ++iy)
                grid[key(ix, iy)].push_back(static_cast<std::uint32_t>(i));
    }

    std::vector<Intersection> hits;
    std::vector<std::uint8_t> seen_pair_guard;
    for (size_t i = 0; i < nseg; ++i) {
        long ix0, iy0, ix1, iy1;
        cell_of(c.pts[i], ix0, iy0);
        cell_of(c.pts[i + 1], ix1, iy1);
        std::vector<std::uint32_t> cands;
        for (long ix = std::min(ix0, ix1) - 1; ix <= std::max(ix0, ix1) + 1; ++ix)
            for (long iy = std::min(iy0, iy1) - 1; iy <= std::max(iy0, iy1) + 1;
                 ++iy) {
                auto it = grid.find(key(ix, iy));
                if (it == grid.end()) continue;
                for (auto j : it->second)
                    if (j > i + 1) cands.push_back(j);
            }
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        for (auto j : cands) {
            if (closed && i == 0 && j == nseg - 1) continue;
            if (detail::segments_intersect(c.pts[i], c.pts[i + 1], c.pts[j],
                                           c.pts[j + 1])) {
                // parameter estimate from the crossing of the support lines
                Vec3 d1 = c.pts[i + 1] - c.pts[i], d2 = c.pts[j + 1] - c.pts[j];
                Vec3 w = c.pts[j] - c.pts[i];
                double den = d1.x * d2.y - d1.y * d2.x;
                double u = std::abs(den) > 0
                               ? (w.x * d2.y - w.y * d2.x) / den
                               : 0.5;
                double v = std::abs(den) > 0
                               ? (w.x * d1.y - w.y * d1.x) / den
                               : 0.5;
                u = std::clamp(u, 0.0, 1.0);
                v = std::clamp(v, 0.0, 1.0);
                hits.push_back({c.t[i] + u * (c.t[i + 1] - c.t[i]),
                                c.t[j] + v * (c.t[j + 1] - c.t[j])});
            }
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const Intersection& a, const Intersection& b) {
                  return a.t1 < b.t1;
              });
    // merge duplicate reports of one geometric crossing (a crossing near a
    // shared vertex can trigger on two consecutive segment pairs)
    std::vector<Intersection> merged;
    double eps = 2.5 * c.length() / double(nseg);
    for (const auto& h : hits) {
        bool dup = false;
        for (const auto& m : merged)
            if (std::abs(h.t1 - m.t1) < eps && std::abs(h.t2 - m.t2) < eps)
                dup = true;
        if (!dup) merged.push_back(h);
    }
    return merged;
}

inline std::optional<Intersection> self_intersects(const SampledCurve& c) {
    auto all = self_intersections(c);
    if (all.empty()) return std::nullopt;
    return all.front();
}

// ========================================================== Frenet integration

// Reconstruct a curve from sampled curvature/torsion by integrating the
// Frenet-Serret system (RK4 with per-interval substeps, frame re-orthonormalized
// after every step). Linear interpolation of kappa and tau between samples.
inline SampledCurve integrate_frenet(const std::vector<double>& t,
                                     const std::vector<double>& kappa,
                                     const std::vector<double>& tau, int dim,
                                     Vec3 r0 = {0, 0, 0}, Vec3 T0 = {1, 0, 0},
                                     Vec3 N0 = {0, 1, 0}) {
    size_t n = t.size();
    if (kappa.size() != n || (dim == 3 && tau.size() != n))
        throw contract_error("integrate_frenet: size mismatch");
    SampledCurve out;
    out.dim = dim;
    out.is_unit_speed = true;
    out.t = t;
    out.pts.resize(n);

    Vec3 r = r0, T = T0.normalized(), N = (N0 - T * N0.dot(T)).normalized();
    Vec3 B = T.cross(N);
    out.pts[0] = r;
    auto interp = [&](const std::vector<double>& f, size_t i, double u) {
        return f[i] + (f[i + 1] - f[i]) * u;
    };
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = t[i + 1] - t[i];
        int sub = std::max(1, static_cast<int>(std::ceil(
                                  h * std::max(std::abs(kappa[i]),
                                               std::abs(kappa[i + 1])) /
                                  0.05)));
        double hs = h / sub;
        for (int ss = 0; ss < sub; ++ss) {
            double u0 = (ss + 0.0) / sub, um = (ss + 0.5) / sub,
                   u1 = (ss + 1.0) / sub;
            struct St {
                Vec3 r, T, N, B;
            };
            auto f = [&](const St& s, double k, double ta) {
                return St{s.T, s.N * k, s.T * (-k) + s.B * ta, s.N * (-ta)};
            };
            double k0 = interp(kappa, i, u0), km = interp(kappa, i, um),
                   k1 = interp(kappa, i, u1);
            double ta0 = dim == 3 ? interp(tau, i, u0) : 0.0;
            double tam = dim == 3 ? interp(tau, i, um) : 0.0;
            double ta1 = dim == 3 ? interp(tau, i, u1) : 0.0;
            St s{r, T, N, B};
            St k1s = f(s, k0, ta0);
            St s2{r + k1s.r * (hs / 2), T + k1s.T * (hs / 2),
                  N + k1s.N * (hs / 2), B + k1s.B * (hs / 2)};
            St k2s = f(s2, km, tam);
            St s3{r + k2s.r * (hs / 2), T + k2s.T * (hs / 2),
                  N + k2s.N * (hs / 2), B + k2s.B * (hs / 2)};
            St k3s = f(s3, km, tam);
            St s4{r + k3s.r * hs, T + k3s.T * hs, N + k3s.N * hs, B + k3s.B * hs};
            St k4s = f(s4, k1, ta1);
            r += (k1s.r + 2 * k2s.r + 2 * k3s.r + k4s.r) * (hs / 6);
            T += (k1s.T + 2 * k2s.T + 2 * k3s.T + k4s.T) * (hs / 6);
            N += (k1s.N + 2 * k2s.N + 2 * k3s.N + k4s.N) * (hs / 6);
            B += (k1s.B + 2 * k2s.B + 2 * k3s.B + k4s.B) * (hs / 6);
            T = T.normalized();
            N = (N - T * N.dot(T)).normalized();
            B = T.cross(N);
        }
        out.pts[i + 1] = r;
    }
    return out;
}

// rigidly move a curve so that r(0) = 0 and the given initial frame maps onto
// (x, y, z); used to compare designed curves against simulated error curves
inline SampledCurve align_to_canonical_frame(const SampledCurve& c, Vec3 T0,
                                             Vec3 N0) {
    T0 = T0.normalized();
    N0 = (N0 - T0 * N0.dot(T0)).normalized();
    Vec3 B0 = T0.cross(N0);
    Mat3 R = Mat3::from_columns(T0, N0, B0).transpose();
    SampledCurve out = c;
    for (auto& p : out.pts) p = R.apply(p - c.pts.front());
    return out;
}

// ========================================================== Hausdorff distance

namespace detail {
inline double point_segment_dist2(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 d = b - a;
    double L2 = d.norm2();
    double u = L2 > 0 ? std::clamp((p - a).dot(d) / L2, 0.0, 1.0) : 0.0;
    Vec3 q = a + d * u;
    return (p - q).norm2();
}
}  // namespace detail

// symmetric discrete Hausdorff distance between two polylines (points of one
// against segments of the other); quadratic fallback is avoided with a coarse
// prefilter on the running minimum
inline double hausdorff_distance(const SampledCurve& a, const SampledCurve& b) {
    auto one_sided = [](const SampledCurve& from, const SampledCurve& to) {
        double worst = 0;
        size_t hint = 0;
        for (size_t i = 0; i < from.size(); ++i) {
            const Vec3& p = from.pts[i];
            double best = std::numeric_limits<double>::infinity();
            // local search around the previous match first, then full sweep
            size_t lo = hint > 50 ? hint - 50 : 0;
            size_t hi = std::min(to.size() - 1, hint + 50);
            for (size_t j = lo; j < hi; ++j)
                best = std::min(best,
                                detail::point_segment_dist2(p, to.pts[j],
                                                            to.pts[j + 1]));
            double bound = std::sqrt(best);
            for (size_t j = 0; j + 1 < to.size(); ++j) {
                if (j >= lo && j < hi) continue;
                double dx = std::abs(p.x - to.pts[j].x);
                if (dx > bound + (to.pts[j + 1] - to.pts[j]).norm()) continue;
                double d2 = detail::point_segment_dist2(p, to.pts[j], to.pts[j + 1]);
                if (d2 < best) {
                    best = d2;
                    bound = std::sqrt(best);
                    hint = j;
                }
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

// curve diameter estimate used for relative tolerances
inline double curve_extent(const SampledCurve& c) {
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& p : c.pts) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    return (hi - lo).norm();
}

// ========================================================== CSV interface

// Curve CSV: header "t,x,y" or "t,x,y,z", one row per sample
inline void write_curve_csv(const SampledCurve& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot open for writing: " + path);
    f.precision(17);
    f << (c.dim == 3 ? "t,x,y,z\n" : "t,x,y\n");
    for (size_t i = 0; i < c.size(); ++i) {
        f << c.t[i] << ',' << c.pts[i].x << ',' << c.pts[i].y;
        if (c.dim == 3) f << ',' << c.pts[i].z;
        f << '\n';
    }
}

inline SampledCurve read_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open: " + path);
    std::string line;
    size_t lineno = 0;
    SampledCurve c;
    bool header_seen = false;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.find("t,x,y,z") == 0)
                c.dim = 3;
            else if (line.find("t,x,y") == 0)
                c.dim = 2;
            else
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": expected header t,x,y[,z]");
            continue;
        }
        std::istringstream ss(line);
        double vals[4] = {0, 0, 0, 0};
        char comma;
        int need = c.dim + 1;
        for (int k = 0; k < need; ++k) {
            if (!(ss >> vals[k]))
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": malformed row");
            if (k + 1 < need && !(ss >> comma))
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": malformed row");
            if (!std::isfinite(vals[k]))
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": non-finite value");
        }
        c.t.push_back(vals[0]);
        c.pts.push_back({vals[1], vals[2], vals[3]});
    }
    if (c.size() < 4) throw input_error(path + ": fewer than 4 samples");
    validate_basic(c);
    // mark unit speed if the chords say so
    bool unit = true;
    for (size_t i = 0; i + 1 < c.size() && unit; ++i) {
        double sp = (c.pts[i + 1] - c.pts[i]).norm() / (c.t[i + 1] - c.t[i]);
        if (std::abs(sp - 1.0) > 1e-3) unit = false;
    }
    c.is_unit_speed = unit;
    return c;
}

}  // namespace lzsweep
