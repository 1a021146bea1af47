#pragma once
#include <algorithm>
#include <cmath>
#include <vector>

#include "vec.hpp"

namespace lzsweep {

// natural cubic spline, used for geometric resampling
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> xs, std::vector<double> ys)
        : x_(std::move(xs)), y_(std::move(ys)) {
        size_t n = x_.size();
        if (n < 3) throw contract_error("CubicSpline: need at least 3 points");
        for (size_t i = 0; i + 1 < n; ++i)
            if (!(x_[i + 1] > x_[i]))
                throw contract_error("CubicSpline: abscissae must increase");
        // second derivatives via the tridiagonal system (natural ends)
        std::vector<double> a(n, 0), b(n, 0), c(n, 0), d(n, 0);
        b[0] = b[n - 1] = 1.0;
        for (size_t i = 1; i + 1 < n; ++i) {
            double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        }
        m_.assign(n, 0.0);
        // Thomas algorithm
        std::vector<double> cp(n, 0), dp(n, 0);
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for (size_t i = 1; i < n; ++i) {
            double den = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / den;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
        }
        m_[n - 1] = dp[n - 1];
        for (size_t i = n - 1; i-- > 0;) m_[i] = dp[i] - cp[i] * m_[i + 1];
    }

    double operator()(double q) const {
        size_t i = cell(q);
        double h = x_[i + 1] - x_[i];
        double A = (x_[i + 1] - q) / h, B = (q - x_[i]) / h;
        return A * y_[i] + B * y_[i + 1] +
               ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h /
                   6.0;
    }

    double deriv(double q) const {
        size_t i = cell(q);
        double h = x_[i + 1] - x_[i];
        double A = (x_[i + 1] - q) / h, B = (q - x_[i]) / h;
        return (y_[i + 1] - y_[i]) / h +
               ((3 * B * B - 1) * m_[i + 1] - (3 * A * A - 1) * m_[i]) * h / 6.0;
    }

private:
    size_t cell(double q) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), q);
        size_t i = (it == x_.begin()) ? 0 : (it - x_.begin() - 1);
        return std::min(i, x_.size() - 2);
    }
    std::vector<double> x_, y_, m_;
};

// Local piecewise-Lagrange interpolation of degree M: the query cell selects
// the M+1 nearest sites and the polynomial through them is evaluated in
// Newton form. Continuous everywhere; smooth across a gap in the sites as
// long as the gap lies inside one stencil.
class LagrangeInterpolant {
public:
    LagrangeInterpolant() = default;
    LagrangeInterpolant(std::vector<double> xs, std::vector<double> ys, int order)
        : x_(std::move(xs)), y_(std::move(ys)), m_(order) {
        if (m_ < 1) throw contract_error("LagrangeInterpolant: order must be >= 1");
        if (x_.size() < static_cast<size_t>(m_ + 1))
            throw contract_error("LagrangeInterpolant: not enough points for order");
        for (size_t i = 0; i + 1 < x_.size(); ++i)
            if (!(x_[i + 1] > x_[i]))
                throw contract_error("LagrangeInterpolant: abscissae must increase");
    }

    int order() const { return m_; }
    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    const std::vector<double>& sites() const { return x_; }

    double operator()(double q) const {
        double f, d1, d2;
        eval(q, f, d1, d2);
        return f;
    }

    // evaluate the polynomial piece selected by `anchor` at a nearby q;
    // keeps a whole finite-difference stencil on one polynomial so that
    // derivative estimates never mix adjacent pieces
    double eval_piece(double anchor, double q) const {
        size_t j = stencil_start(anchor);
        if (j != cached_j_) {
            cached_j_ = j;
            build_newton(j);
        }
        double p = coef_[m_];
        for (int k = m_ - 1; k >= 0; --k)
            p = p * (q - x_[cached_j_ + k]) + coef_[k];
        return p;
    }

    // value plus first two derivatives of the local polynomial
    void eval(double q, double& f, double& d1, double& d2) const {
        size_t j = stencil_start(q);
        if (j != cached_j_) {
            cached_j_ = j;
            build_newton(j);
        }
        // Horner evaluation of the Newton form with derivative propagation
        int n = m_;
        double p = coef_[n], p1 = 0, p2 = 0;
        for (int k = n - 1; k >= 0; --k) {
            double dx = q - x_[cached_j_ + k];
            p2 = p2 * dx + 2 * p1;
            p1 = p1 * dx + p;
            p = p * dx + coef_[k];
        }
        f = p;
        d1 = p1;
        d2 = p2;
    }

private:
    size_t stencil_start(double q) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), q);
        size_t i = (it == x_.begin()) ? 0 : (it - x_.begin() - 1);
        i = std::min(i, x_.size() - 2);
        long j = static_cast<long>(i) - m_ / 2;
        j = std::max(0L, std::min(j, static_cast<long>(x_.size()) - 1 - m_));
        return static_cast<size_t>(j);
    }
    void build_newton(size_t j) const {
        coef_.assign(y_.begin() + j, y_.begin() + j + m_ + 1);
        for (int k = 1; k <= m_; ++k)
            for (int i = m_; i >= k; --i)
                coef_[i] = (coef_[i] - coef_[i - 1]) / (x_[j + i] - x_[j + i - k]);
    }

    std::vector<double> x_, y_;
    int m_ = 3;
    mutable size_t cached_j_ = static_cast<size_t>(-1);
    mutable std::vector<double> coef_;
};

}  // namespace lzsweep
