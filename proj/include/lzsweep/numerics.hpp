#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "vec.hpp"

namespace lzsweep {

// ---------------------------------------------------------------- quadrature

namespace detail {
// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule
inline constexpr double kGK15Nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kGK15Weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kG7Weights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};
}  // namespace detail

// single Gauss-Kronrod panel; err estimates the G7/K15 difference
template <class F>
double gk15_panel(F&& f, double a, double b, double* err = nullptr) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double k = 0, g = 0;
    for (int i = 0; i < 15; ++i) {
        double fv = f(mid + half * detail::kGK15Nodes[i]);
        k += detail::kGK15Weights[i] * fv;
        if (i % 2 == 1) g += detail::kG7Weights[i / 2] * fv;
    }
    if (err) *err = std::abs(k - g) * std::abs(half);
    return k * half;
}

// adaptive bisection driver
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-13,
                          int max_depth = 48) {
    struct Item {
        double a, b;
        int depth;
    };
    std::vector<Item> stack{{a, b, 0}};
    double total = 0;
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        double err;
        double val = gk15_panel(f, it.a, it.b, &err);
        if (err < tol * std::max(1.0, std::abs(val)) / 4 || it.depth >= max_depth) {
            total += val;
        } else {
            double m = 0.5 * (it.a + it.b);
            stack.push_back({it.a, m, it.depth + 1});
            stack.push_back({m, it.b, it.depth + 1});
        }
    }
    return total;
}

// ------------------------------------------------- finite-difference weights

// Fornberg's algorithm: weights for the m-th derivative at x0 on nodes xs
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs,
                                      int m) {
    int n = static_cast<int>(xs.size()) - 1;
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

// ------------------------------------------------------------- least squares

// solve min ||A c - y|| by modified Gram-Schmidt QR; A is m x n, column-major
inline std::vector<double> lstsq(std::vector<std::vector<double>> cols,
                                 std::vector<double> y) {
    size_t n = cols.size(), m = y.size();
    std::vector<std::vector<double>> q(n);
    std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
    for (size_t j = 0; j < n; ++j) {
        std::vector<double> v = cols[j];
        for (size_t i = 0; i < j; ++i) {
            double d = 0;
            for (size_t k = 0; k < m; ++k) d += q[i][k] * v[k];
            r[i][j] = d;
            for (size_t k = 0; k < m; ++k) v[k] -= d * q[i][k];
        }
        double nv = 0;
        for (double t : v) nv += t * t;
        nv = std::sqrt(nv);
        if (nv < 1e-300) throw solver_error("lstsq: rank-deficient system");
        r[j][j] = nv;
        for (size_t k = 0; k < m; ++k) v[k] /= nv;
        q[j] = std::move(v);
    }
    std::vector<double> b(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < m; ++k) b[i] += q[i][k] * y[k];
    std::vector<double> c(n, 0.0);
    for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
        double s = b[i];
        for (size_t j = i + 1; j < n; ++j) s -= r[i][j] * c[j];
        c[i] = s / r[i][i];
    }
    return c;
}

struct LineFit {
    double slope = 0, intercept = 0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = x.size();
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double d = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / d, (sxx * sy - sx * sxy) / d};
}

// ---------------------------------------------------------------- Nelder-Mead

struct NelderMeadOptions {
    int max_iter = 500;
    double f_target = -std::numeric_limits<double>::infinity();
    double x_tol = 1e-12;
    double f_tol = 1e-14;
    double initial_step = 1e-3;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0;
    int iterations = 0;
    bool converged = false;
};

// standard reflection/expansion/contraction coefficients (1, 2, 0.5, 0.5)
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const NelderMeadOptions& opt = {},
    const std::function<void(int, const std::vector<double>&, double)>&
        on_iterate = nullptr) {
    const size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (size_t i = 0; i < n; ++i) {
        double step = opt.initial_step * std::max(1.0, std::abs(x0[i]));
        xs[i + 1][i] += step;
    }
    for (size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    NelderMeadResult res;
    int iter = 0;
    auto order = [&] {
        std::vector<size_t> idx(n + 1);
        for (size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> xs2;
        std::vector<double> fs2;
        for (size_t i : idx) {
            xs2.push_back(xs[i]);
            fs2.push_back(fs[i]);
        }
        xs.swap(xs2);
        fs.swap(fs2);
    };
    for (; iter < opt.max_iter; ++iter) {
        order();
        if (on_iterate) on_iterate(iter, xs[0], fs[0]);
        if (fs[0] <= opt.f_target) {
            res.converged = true;
            break;
        }
        double spread = 0;
        for (size_t i = 0; i < n; ++i)
            spread = std::max(spread, std::abs(xs[n][i] - xs[0][i]));
        if (spread < opt.x_tol && std::abs(fs[n] - fs[0]) < opt.f_tol) {
            res.converged = fs[0] <= opt.f_target;
            break;
        }
        std::vector<double> c(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) c[j] += xs[i][j];
        }
        for (double& v : c) v /= n;
        auto blend = [&](const std::vector<double>& from, double coef) {
            std::vector<double> p(n);
            for (size_t j = 0; j < n; ++j) p[j] = c[j] + coef * (c[j] - from[j]);
            return p;
        };
        auto xr = blend(xs[n], 1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            auto xe = blend(xs[n], 2.0);
            double fe = f(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            bool outside = fr < fs[n];
            auto xc = outside ? blend(xs[n], 0.5) : blend(xs[n], -0.5);
            double fc = f(xc);
            if (fc < (outside ? fr : fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (size_t i = 1; i <= n; ++i) {
                    for (size_t j = 0; j < n; ++j)
                        xs[i][j] = xs[0][j] + 0.5 * (xs[i][j] - xs[0][j]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }
    order();
    res.x = xs[0];
    res.f = fs[0];
    res.iterations = iter;
    if (fs[0] <= opt.f_target) res.converged = true;
    return res;
}

// ------------------------------------------------------------ random numbers

// counter-based generator: draw k of stream `seed` is a pure function of
// (seed, k), so Monte-Carlo runs are reproducible independent of threading.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t r = splitmix64(splitmix64(seed) ^ (k * 0xD1342543DE82EF95ULL + 1));
    return ((r >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // (0,1)
}

// standard normal via Box-Muller on draws (2k, 2k+1) of the stream
inline double normal_draw(std::uint64_t seed, std::uint64_t k) {
    double u1 = uniform01(seed, 2 * k);
    double u2 = uniform01(seed, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace lzsweep
