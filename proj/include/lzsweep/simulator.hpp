#pragma once
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "pulses.hpp"

namespace lzsweep {

using cplx = std::complex<double>;

struct Mat2c {
    cplx m00{1, 0}, m01{0, 0}, m10{0, 0}, m11{1, 0};

    static Mat2c identity() { return {}; }
    Mat2c mul(const Mat2c& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Mat2c dagger() const {
        return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
    }
    cplx trace() const { return m00 + m11; }
    Mat2c operator-(const Mat2c& o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    double frobenius() const {
        return std::sqrt(std::norm(m00) + std::norm(m01) + std::norm(m10) +
                         std::norm(m11));
    }
    // nearest unitary by polar decomposition (closed form for 2x2)
    Mat2c unitarized() const {
        Mat2c H = dagger().mul(*this);  // Hermitian positive definite
        double h00 = H.m00.real(), h11 = H.m11.real();
        cplx h01 = H.m01;
        double det = h00 * h11 - std::norm(h01);
        double s = std::sqrt(std::max(det, 1e-300));
        double t = std::sqrt(h00 + h11 + 2 * s);
        // U (H + sI)^{-1} * t
        double denom = s * t;
        Mat2c inv{cplx(h11 + s, 0) / denom, -h01 / denom,
                  -std::conj(h01) / denom, cplx(h00 + s, 0) / denom};
        return mul(inv);
    }
    double unitarity_defect() const {
        Mat2c d = dagger().mul(*this) - identity();
        return d.frobenius();
    }
};

// exp(-i (vec . sigma)) for a real Pauli vector
inline Mat2c pauli_rotation(const Vec3& v) {
    double th = v.norm();
    double c = std::cos(th);
    double sc = th > 1e-300 ? std::sin(th) / th : 1.0;
    cplx I(0, 1);
    return {c - I * sc * v.z, -I * sc * (v.x - I * v.y) * 1.0,
            -I * sc * (v.x + I * v.y) * 1.0, c + I * sc * v.z};
}

// ======================================================== evolution results

struct EvolutionResult {
    Mat2c unitary;          // full propagator U(T) under noise delta
    Mat2c unitary_ideal;    // noiseless propagator U0(T)
    double p_lz = 0;        // |<1|U(T)|0>|^2
    double fidelity = 1;    // |Tr(U0^dag U)| / 2
    Vec3 a1_vector;         // Pauli components of the first Magnus term
    Vec3 a2_vector;         // int r x dr (vanishes with all projected areas)
    double max_unitarity_defect = 0;
};

struct MagnusTrajectory {
    std::vector<double> t;
    std::vector<Vec3> a1;
    std::vector<Vec3> a2;
};

struct NoiseModel {
    double sigma_delta = 0;
    int n_samples = 100;
    std::uint64_t seed = 0;
};

struct EvolveOptions {
    double rtol = 1e-10;
    double atol = 1e-13;
    MagnusTrajectory* trajectory = nullptr;  // recorded at waveform nodes
};

// ============================================================== integrator

namespace detail {

// state: U0 (8 reals), U_I (8 reals), r (3), a2 (3).
// The interaction picture keeps the noise term's contribution proportional to
// delta, so transition amplitudes stay accurate down to p_lz ~ 1e-24 where
// the robustness-order fits need them.
struct EvolveState {
    static constexpr int N = 22;
    double y[N];

    Mat2c u0() const {
        return {{y[0], y[1]}, {y[2], y[3]}, {y[4], y[5]}, {y[6], y[7]}};
    }
    Mat2c ui() const {
        return {{y[8], y[9]}, {y[10], y[11]}, {y[12], y[13]}, {y[14], y[15]}};
    }
    Vec3 r() const { return {y[16], y[17], y[18]}; }
    Vec3 a2() const { return {y[19], y[20], y[21]}; }
    void set_u0(const Mat2c& m) {
        y[0] = m.m00.real(); y[1] = m.m00.imag();
        y[2] = m.m01.real(); y[3] = m.m01.imag();
        y[4] = m.m10.real(); y[5] = m.m10.imag();
        y[6] = m.m11.real(); y[7] = m.m11.imag();
    }
    void set_ui(const Mat2c& m) {
        y[8] = m.m00.real();  y[9] = m.m00.imag();
        y[10] = m.m01.real(); y[11] = m.m01.imag();
        y[12] = m.m10.real(); y[13] = m.m10.imag();
        y[14] = m.m11.real(); y[15] = m.m11.imag();
    }
};

inline void evolve_rhs(double omega, double delta_gap, double delta_noise,
                       const double* y, double* dy) {
    const cplx I(0, 1);
    Mat2c U0{{y[0], y[1]}, {y[2], y[3]}, {y[4], y[5]}, {y[6], y[7]}};
    Mat2c UI{{y[8], y[9]}, {y[10], y[11]}, {y[12], y[13]}, {y[14], y[15]}};
    // H0 = (omega/2) sigma_z + (gap/2) sigma_x
    cplx a(omega / 2, 0), b(delta_gap / 2, 0);
    Mat2c dU0{-I * (a * U0.m00 + b * U0.m10), -I * (a * U0.m01 + b * U0.m11),
              -I * (b * U0.m00 - a * U0.m10), -I * (b * U0.m01 - a * U0.m11)};
    // m = Pauli vector of U0^dag sigma_x U0   (sigma_x U0 swaps rows)
    Mat2c SU{U0.m10, U0.m11, U0.m00, U0.m01};
    Mat2c M = U0.dagger().mul(SU);
    Vec3 m{M.m01.real(), -M.m01.imag(), M.m00.real()};
    // dUI = -i * delta * (m . sigma) UI  ... Eq-literal noise coefficient
    cplx mz(m.z, 0), mm = cplx(m.x, -m.y), mp = cplx(m.x, m.y);
    cplx s(delta_noise, 0);
    Mat2c dUI{-I * s * (mz * UI.m00 + mm * UI.m10),
              -I * s * (mz * UI.m01 + mm * UI.m11),
              -I * s * (mp * UI.m00 - mz * UI.m10),
              -I * s * (mp * UI.m01 - mz * UI.m11)};
    dy[0] = dU0.m00.real(); dy[1] = dU0.m00.imag();
    dy[2] = dU0.m01.real(); dy[3] = dU0.m01.imag();
    dy[4] = dU0.m10.real(); dy[5] = dU0.m10.imag();
    dy[6] = dU0.m11.real(); dy[7] = dU0.m11.imag();
    dy[8] = dUI.m00.real();  dy[9] = dUI.m00.imag();
    dy[10] = dUI.m01.real(); dy[11] = dUI.m01.imag();
    dy[12] = dUI.m10.real(); dy[13] = dUI.m10.imag();
    dy[14] = dUI.m11.real(); dy[15] = dUI.m11.imag();
    Vec3 r{y[16], y[17], y[18]};
    Vec3 da2 = r.cross(m);
    dy[16] = m.x; dy[17] = m.y; dy[18] = m.z;
    dy[19] = da2.x; dy[20] = da2.y; dy[21] = da2.z;
}

}  // namespace detail

// Propagate iU' = H U with H = (Omega/2) sigma_z + (Delta/2) sigma_x +
// delta sigma_x (the noise enters with coefficient delta, not delta/2).
// Embedded Dormand-Prince 4/5 with steps confined to waveform intervals so
// the piecewise-linear drive is smooth inside every step; the two unitary
// blocks are polar-reunitarized after each accepted step.
inline EvolutionResult evolve(const Waveform& w, double delta_noise,
                              const EvolveOptions& opt = {}) {
    validate_waveform(w);
    using detail::EvolveState;
    EvolveState s{};
    s.set_u0(Mat2c::identity());
    s.set_ui(Mat2c::identity());
    for (int i = 16; i < 22; ++i) s.y[i] = 0;

    // Dormand-Prince coefficients
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const int N = EvolveState::N;
    double k1[N], k2[N], k3[N], k4[N], k5[N], k6[N], k7[N], ytmp[N], y5[N];
    EvolutionResult res;
    double max_defect = 0;

    MagnusTrajectory* traj = opt.trajectory;
    if (traj) {
        traj->t.clear();
        traj->a1.clear();
        traj->a2.clear();
        traj->t.push_back(w.t.front());
        traj->a1.push_back({0, 0, 0});
        traj->a2.push_back({0, 0, 0});
    }

    for (size_t seg = 0; seg + 1 < w.size(); ++seg) {
        double ta = w.t[seg], tb = w.t[seg + 1];
        double o0 = w.omega[seg];
        double slope = (w.omega[seg + 1] - w.omega[seg]) / (tb - ta);
        auto om = [&](double t) { return o0 + slope * (t - ta); };
        auto rhs = [&](double t, const double* y, double* dy) {
            detail::evolve_rhs(om(t), w.delta, delta_noise, y, dy);
        };
        double t = ta;
        double h = tb - ta;
        bool k1_valid = false;
        while (t < tb - 1e-15 * w.duration()) {
            h = std::min(h, tb - t);
            if (h < 1e-15 * w.duration())
                throw solver_error("evolve: step underflow (stiffness) at t=" +
                                   std::to_string(t));
            if (!k1_valid) rhs(t, s.y, k1);
            for (int i = 0; i < N; ++i) ytmp[i] = s.y[i] + h * a21 * k1[i];
            rhs(t + c2 * h, ytmp, k2);
            for (int i = 0; i < N; ++i)
                ytmp[i] = s.y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(t + c3 * h, ytmp, k3);
            for (int i = 0; i < N; ++i)
                ytmp[i] = s.y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(t + c4 * h, ytmp, k4);
            for (int i = 0; i < N; ++i)
                ytmp[i] = s.y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                        a54 * k4[i]);
            rhs(t + c5 * h, ytmp, k5);
            for (int i = 0; i < N; ++i)
                ytmp[i] = s.y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                        a64 * k4[i] + a65 * k5[i]);
            rhs(t + h, ytmp, k6);
            for (int i = 0; i < N; ++i)
                y5[i] = s.y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                      b5 * k5[i] + b6 * k6[i]);
            rhs(t + h, y5, k7);
            double err = 0;
            for (int i = 0; i < N; ++i) {
                double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                 e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                double sc = opt.atol + opt.rtol * std::max(std::abs(s.y[i]),
                                                           std::abs(y5[i]));
                err += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(err / N);
            if (err <= 1.0) {
                t += h;
                for (int i = 0; i < N; ++i) s.y[i] = y5[i];
                // renormalize the unitary blocks
                Mat2c u0 = s.u0(), ui = s.ui();
                max_defect = std::max(max_defect,
                                      std::max(u0.unitarity_defect(),
                                               ui.unitarity_defect()));
                s.set_u0(u0.unitarized());
                s.set_ui(ui.unitarized());
                k1_valid = false;
            } else {
                k1_valid = false;
            }
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::clamp(fac, 0.2, 5.0);
        }
        if (traj) {
            traj->t.push_back(tb);
            traj->a1.push_back(s.r());
            traj->a2.push_back(s.a2());
        }
    }

    Mat2c u0 = s.u0(), ui = s.ui();
    res.unitary = u0.mul(ui);
    res.unitary_ideal = u0;
    res.p_lz = std::norm(res.unitary.m10);
    res.fidelity = 0.5 * std::abs(ui.trace());
    res.a1_vector = s.r();
    res.a2_vector = s.a2();
    res.max_unitarity_defect = max_defect;
    return res;
}

// A1(t), A2(t) accumulated alongside the noiseless propagation, sampled at
// the waveform nodes
inline MagnusTrajectory magnus_terms(const Waveform& w) {
    MagnusTrajectory traj;
    EvolveOptions opt;
    opt.trajectory = &traj;
    evolve(w, 0.0, opt);
    return traj;
}

// ============================================================ noise averaging

struct NoiseAverageResult {
    double mean_p_lz = 0;
    double std_error = 0;
    std::vector<double> p_samples;
};

// delta_i ~ N(0, sigma^2) with the counter-based generator: the i-th draw is
// a pure function of (seed, i), so the result is independent of threading.
inline NoiseAverageResult noise_average(const Waveform& w, const NoiseModel& nm,
                                        int threads = 0) {
    if (nm.n_samples < 1) throw contract_error("noise_average: n_samples >= 1");
    if (nm.sigma_delta < 0) throw contract_error("noise_average: sigma >= 0");
    int n = nm.n_samples;
    std::vector<double> p(n);
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) break;
            double d = nm.sigma_delta == 0
                           ? 0.0
                           : nm.sigma_delta * normal_draw(nm.seed, i);
            p[i] = evolve(w, d).p_lz;
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    double mean = 0;
    for (double v : p) mean += v;
    mean /= n;
    double var = 0;
    for (double v : p) var += (v - mean) * (v - mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    NoiseAverageResult out;
    out.mean_p_lz = mean;
    out.std_error = std::sqrt(var / n);
    out.p_samples = std::move(p);
    return out;
}

// ========================================================== robustness order

struct RobustnessResult {
    std::optional<int> order;  // 0, 1 or 2; empty when ambiguous
    double slope = 0;
    std::vector<double> deltas, p_lz;
};

// log-log slope of P_LZ vs delta over delta*T in [1e-4, 1e-2]; leading Magnus
// order delta^(k+1) gives probability delta^(2k+2), so slopes 2/4/6 classify
// robustness order 0/1/2
inline RobustnessResult robustness_order(const Waveform& w, int n_points = 13,
                                         int threads = 0) {
    double T = w.duration();
    RobustnessResult res;
    res.deltas.resize(n_points);
    res.p_lz.assign(n_points, 0.0);
    for (int i = 0; i < n_points; ++i)
        res.deltas[i] =
            std::pow(10.0, -4.0 + 2.0 * i / (n_points - 1)) / T;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_points));
    std::atomic<int> next{0};
    EvolveOptions opt;
    opt.rtol = 1e-11;
    opt.atol = 1e-14;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n_points) break;
            res.p_lz[i] = std::max(evolve(w, res.deltas[i], opt).p_lz, 1e-280);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> lx(n_points), ly(n_points);
    for (int i = 0; i < n_points; ++i) {
        lx[i] = std::log(res.deltas[i]);
        ly[i] = std::log(res.p_lz[i]);
    }
    res.slope = fit_line(lx, ly).slope;
    for (int k = 0; k <= 2; ++k)
        if (std::abs(res.slope - (2.0 * k + 2.0)) <= 0.5) res.order = k;
    return res;
}

// ============================================================== scaling law

struct ScalingPoint {
    double x = 0;          // (2 delta)^2 / v
    double log1m_plz = 0;  // log_e(1 - P_LZ)
};

// evaluate log(1 - P_LZ) on an x = (2 delta)^2 / v grid. With the noise
// entering as delta sigma_x (gap 2 delta), the infinite linear sweep obeys
// log(1 - P) = -(pi/2) x exactly.
inline std::vector<ScalingPoint> scaling_points(const Waveform& w, double v,
                                                const std::vector<double>& xs,
                                                int threads = 0) {
    std::vector<ScalingPoint> out(xs.size());
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max<int>(1, std::min<int>(threads, static_cast<int>(xs.size())));
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= xs.size()) break;
            double delta = std::sqrt(xs[i] * v) / 2.0;
            double p = evolve(w, delta).p_lz;
            out[i] = {xs[i], std::log(std::max(1.0 - p, 1e-300))};
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

inline std::vector<ScalingPoint> scaling_points_infinite_reference(
    const std::vector<double>& xs) {
    std::vector<ScalingPoint> out(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) out[i] = {xs[i], -M_PI_2 * xs[i]};
    return out;
}

struct QuarticFit {
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
};

// least-squares quartic in x with zero constant term
inline QuarticFit scaling_fit(const std::vector<ScalingPoint>& pts) {
    if (pts.size() < 4) throw solver_error("scaling_fit: need >= 4 points");
    std::vector<std::vector<double>> cols(4, std::vector<double>(pts.size()));
    std::vector<double> y(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        double x = pts[i].x;
        cols[0][i] = x;
        cols[1][i] = x * x;
        cols[2][i] = x * x * x;
        cols[3][i] = x * x * x * x;
        y[i] = pts[i].log1m_plz;
    }
    auto c = lstsq(cols, y);
    return {c[0], c[1], c[2], c[3]};
}

}  // namespace lzsweep
