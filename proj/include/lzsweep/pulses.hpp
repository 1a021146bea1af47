#pragma once
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace lzsweep {

// Time-sampled drive Omega(t) with a constant gap Delta. Between samples the
// drive is linearly interpolated everywhere in this library (simulator and
// curve reconstruction agree on that), so the sample grid IS the pulse.
struct Waveform {
    std::vector<double> t;
    std::vector<double> omega;
    double delta = 0.0;
    std::map<std::string, std::string> meta;  // builder provenance

    size_t size() const { return t.size(); }
    double duration() const { return t.empty() ? 0.0 : t.back(); }
    double omega_at(double q) const {
        auto it = std::upper_bound(t.begin(), t.end(), q);
        size_t i = (it == t.begin()) ? 0 : (it - t.begin() - 1);
        i = std::min(i, t.size() - 2);
        double u = (q - t[i]) / (t[i + 1] - t[i]);
        return omega[i] + u * (omega[i + 1] - omega[i]);
    }
};

inline void validate_waveform(const Waveform& w) {
    if (w.size() < 2) throw contract_error("waveform: need at least 2 samples");
    if (w.omega.size() != w.t.size())
        throw contract_error("waveform: t/omega size mismatch");
    if (std::abs(w.t.front()) > 1e-12 * std::max(1.0, w.duration()))
        throw contract_error("waveform: time must start at 0");
    for (size_t i = 0; i + 1 < w.size(); ++i)
        if (!(w.t[i + 1] > w.t[i]))
            throw contract_error("waveform: time must strictly increase");
    for (double o : w.omega)
        if (!std::isfinite(o)) throw input_error("waveform: non-finite omega");
    if (!(w.delta >= 0)) throw contract_error("waveform: delta must be >= 0");
}

// integral of Omega dt (exact for the piecewise-linear drive)
inline double pulse_area(const Waveform& w) {
    double a = 0;
    for (size_t i = 0; i + 1 < w.size(); ++i)
        a += 0.5 * (w.omega[i] + w.omega[i + 1]) * (w.t[i + 1] - w.t[i]);
    return a;
}

// ============================================================ catalog pulses

inline Waveform linear_pulse(double v, double T, bool centered,
                             size_t n = 2001) {
    if (!(v > 0) || !(T > 0)) throw contract_error("linear_pulse: v, T > 0");
    Waveform w;
    w.t.resize(n);
    w.omega.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = T * double(i) / double(n - 1);
        w.t[i] = t;
        w.omega[i] = centered ? v * (t - T / 2) : v * t;
    }
    w.meta["builder"] = "linear";
    w.meta["v"] = std::to_string(v);
    w.meta["centered"] = centered ? "1" : "0";
    w.meta["declared_order"] = "0";
    return w;
}

inline Waveform constant_pulse(double area, double T, size_t n = 2001) {
    if (!(T > 0)) throw contract_error("constant_pulse: T > 0");
    Waveform w;
    w.t.resize(n);
    w.omega.assign(n, area / T);
    for (size_t i = 0; i < n; ++i) w.t[i] = T * double(i) / double(n - 1);
    w.meta["builder"] = "constant";
    w.meta["area"] = std::to_string(area);
    // first-order robust iff the error curve is a whole number of circles
    double turns = area / (2 * M_PI);
    bool robust = std::abs(turns - std::round(turns)) < 1e-9 &&
                  std::abs(turns) > 0.5;
    w.meta["declared_order"] = robust ? "1" : "0";
    return w;
}

// ==================================================== curve <-> pulse maps

// Error curve of a plane (Delta = 0) drive: r(t) = (int cos phi, -int sin phi)
// with phi = int Omega. For the piecewise-linear drive phi is piecewise
// quadratic and each interval is integrated with a Gauss-Kronrod panel, so
// the sampled curve is exact to machine precision on the waveform grid.
inline SampledCurve plane_error_curve(const Waveform& w) {
    validate_waveform(w);
    size_t n = w.size();
    SampledCurve c;
    c.dim = 2;
    c.is_unit_speed = true;
    c.t = w.t;
    c.pts.resize(n);
    double phi = 0;
    Vec3 r{0, 0, 0};
    c.pts[0] = r;
    for (size_t i = 0; i + 1 < n; ++i) {
        double h = w.t[i + 1] - w.t[i];
        double o0 = w.omega[i];
        double slope = (w.omega[i + 1] - w.omega[i]) / h;
        auto phase = [&](double u) {  // u in [0,h]
            return phi + o0 * u + 0.5 * slope * u * u;
        };
        double dphi = std::abs(o0 * h + 0.5 * slope * h * h);
        int sub = std::max(1, static_cast<int>(std::ceil(dphi / 0.4)));
        double dx = 0, dy = 0;
        for (int ss = 0; ss < sub; ++ss) {
            double a = h * ss / sub, b = h * (ss + 1) / sub;
            dx += gk15_panel([&](double u) { return std::cos(phase(u)); }, a, b);
            dy += gk15_panel([&](double u) { return -std::sin(phase(u)); }, a, b);
        }
        r += Vec3{dx, dy, 0};
        phi = phase(h);
        c.pts[i + 1] = r;
    }
    return c;
}

// Reconstruct the curve corresponding to a waveform: plane quadrature when
// Delta = 0, Frenet-Serret integration of kappa = -Omega, tau = -Delta in 3D.
inline SampledCurve curve_from_pulse(const Waveform& w) {
    validate_waveform(w);
    if (w.delta == 0.0) return plane_error_curve(w);
    std::vector<double> kappa(w.size()), tau(w.size(), -w.delta);
    for (size_t i = 0; i < w.size(); ++i) kappa[i] = -w.omega[i];
    return integrate_frenet(w.t, kappa, tau, 3);
}

enum class PulseGauge { as_computed, positive_start };

struct ExtractedPulse {
    Waveform waveform;
    int gauge_sign = +1;   // +1: Omega = -kappa as computed; -1: flipped
    double mean_torsion = 0;
    double torsion_rel_std = 0;
};

// Omega(t) = -kappa(t), Delta = -tau for unit-speed curves of constant
// torsion (Delta = 0 for plane curves). In 3D the overall curvature sign is a
// gauge (flipping Omega conjugates the Hamiltonian by sigma_x); the
// positive_start gauge picks Omega(0) > 0 as in sweep designs.
inline ExtractedPulse extract_pulse(const SampledCurve& c,
                                    PulseGauge gauge = PulseGauge::as_computed) {
    FrenetData fd = frenet_data(c);
    size_t n = c.size();
    ExtractedPulse out;
    Waveform& w = out.waveform;
    w.t = c.t;
    w.omega.resize(n);

    if (c.dim == 2) {
        for (size_t i = 0; i < n; ++i)
            w.omega[i] = -fd.invariants.curvature[i];
        w.delta = 0;
    } else {
        // Torsion constancy is judged at design resolution: the positions are
        // boxcar-filtered over a T/450 window (which cancels the sampling
        // texture of fitted templates) and differentiated on a strided grid.
        // The filter biases curvature by (kappa W)^2/24, well under the 1e-2
        // constancy budget. Samples near inflections, where the estimate is
        // 0/0, are excluded with a stencil margin.
        double T = c.t.back() - c.t.front();
        size_t halfw = std::max<size_t>(
            1, static_cast<size_t>(T / 900.0 / (c.t[1] - c.t[0])));
        std::vector<Vec3> prefix(n + 1, Vec3{0, 0, 0});
        for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + c.pts[i];
        auto filtered = [&](size_t i) {
            size_t a = i > halfw ? i - halfw : 0;
            size_t b = std::min(n - 1, i + halfw);
            return (prefix[b + 1] - prefix[a]) / double(b + 1 - a);
        };
        size_t stride = std::max<size_t>(1, n / 4096);
        std::vector<double> st;
        std::vector<Vec3> sp;
        for (size_t i = halfw; i + halfw < n; i += stride) {
            st.push_back(c.t[i]);
            sp.push_back(filtered(i));
        }
        auto d1 = detail::sampled_derivative(st, sp, 1);
        auto d2 = detail::sampled_derivative(st, sp, 2);
        auto d3 = detail::sampled_derivative(st, sp, 3);
        size_t m = st.size();
        double kmax = 0;
        for (size_t i = 0; i < m; ++i) kmax = std::max(kmax, d2[i].norm());
        std::vector<double> vals;
        for (size_t i = 5; i + 5 < m; ++i) {
            bool near_inflection = false;
            for (size_t j = i >= 8 ? i - 8 : 0; j < std::min(m, i + 9); ++j)
                if (d2[j].norm() < 1e-3 * kmax) near_inflection = true;
            if (near_inflection) continue;
            Vec3 cx = d1[i].cross(d2[i]);
            double den = cx.norm2();
            if (den > 0) vals.push_back(cx.dot(d3[i]) / den);
        }
        if (vals.size() < 10)
            throw contract_error(
                "extract_pulse: torsion undefined almost everywhere");
        // robust-filter isolated estimator outliers before the statistic
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        double med = sorted[sorted.size() / 2];
        std::vector<double> dev(sorted.size());
        for (size_t i = 0; i < sorted.size(); ++i)
            dev[i] = std::abs(sorted[i] - med);
        std::sort(dev.begin(), dev.end());
        double gate_out = 12 * 1.4826 * dev[dev.size() / 2] +
                          1e-9 * std::abs(med);
        double sum = 0, sum2 = 0;
        size_t cnt = 0, dropped = 0;
        for (double v : vals) {
            if (std::abs(v - med) > gate_out) {
                ++dropped;
                continue;
            }
            sum += v;
            sum2 += v * v;
            ++cnt;
        }
        if (dropped * 20 > vals.size())
            throw verification_error(
                "extract_pulse: torsion estimate has too many outliers");
        double mean = sum / cnt;
        double var = std::max(0.0, sum2 / cnt - mean * mean);
        out.mean_torsion = mean;
        out.torsion_rel_std = std::sqrt(var) / std::max(std::abs(mean), 1e-300);
        if (out.torsion_rel_std > 1e-2)
            throw verification_error(
                "extract_pulse: torsion not constant (rel std " +
                std::to_string(out.torsion_rel_std) + ")");
        if (mean > 0)
            throw contract_error(
                "extract_pulse: positive torsion; mirror the curve (negate one "
                "coordinate) to flip its sign");
        w.delta = -mean;
        for (size_t i = 0; i < n; ++i)
            w.omega[i] = -fd.invariants.curvature[i];
        if (gauge == PulseGauge::positive_start) {
            // anchor the gauge on the first clearly-curved sample
            size_t i0 = 0;
            while (i0 + 1 < n && std::abs(w.omega[i0]) < 1e-3 * kmax) ++i0;
            if (w.omega[i0] < 0) {
                for (auto& o : w.omega) o = -o;
                out.gauge_sign = -1;
            }
        }
    }
    w.meta["builder"] = "extracted";
    w.meta["gauge_sign"] = std::to_string(out.gauge_sign);
    return out;
}

inline Waveform pulse_from_curve(const SampledCurve& c,
                                 PulseGauge gauge = PulseGauge::as_computed) {
    return extract_pulse(c, gauge).waveform;
}

// ============================================================== CSV interface

// Waveform CSV: '#'-prefixed key=value metadata block (delta, builder,
// parameters), then header "t,omega"
inline void write_waveform_csv(const Waveform& w, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot open for writing: " + path);
    f.precision(17);
    f << "# delta=" << w.delta << '\n';
    for (const auto& [k, v] : w.meta) f << "# " << k << '=' << v << '\n';
    f << "t,omega\n";
    for (size_t i = 0; i < w.size(); ++i)
        f << w.t[i] << ',' << w.omega[i] << '\n';
}

inline Waveform read_waveform_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open: " + path);
    Waveform w;
    std::string line;
    size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t s = body.find_first_not_of(' ');
            if (s == std::string::npos) continue;
            body = body.substr(s);
            size_t eq = body.find('=');
            if (eq == std::string::npos) continue;
            std::string key = body.substr(0, eq), val = body.substr(eq + 1);
            if (key == "delta")
                w.delta = std::stod(val);
            else
                w.meta[key] = val;
            continue;
        }
        if (!header_seen) {
            if (line.find("t,omega") != 0)
                throw input_error(path + ":" + std::to_string(lineno) +
                                  ": expected header t,omega");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        double tv, ov;
        char comma;
        if (!(ss >> tv >> comma >> ov))
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": malformed row");
        if (!std::isfinite(tv) || !std::isfinite(ov))
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": non-finite value");
        w.t.push_back(tv);
        w.omega.push_back(ov);
    }
    validate_waveform(w);
    return w;
}

}  // namespace lzsweep
