#pragma once
#include <cmath>
#include <complex>

#include "numerics.hpp"

namespace lzsweep {

struct FresnelValue {
    double c = 0;  // integral of cos(u^2) from 0 to w
    double s = 0;  // integral of sin(u^2) from 0 to w
};

// Fresnel integrals in the unnormalized convention C(w) = int_0^w cos(u^2) du,
// S(w) = int_0^w sin(u^2) du, so that the error curve of a linear sweep is
// x(t) = sqrt(2/v) C(sqrt(v/2) t), y(t) = -sqrt(2/v) S(sqrt(v/2) t).
// Limit for w -> inf is sqrt(pi/8) for both.
//
// |w| <= 6: adaptive Gauss-Kronrod on the defining integrals.
// |w| > 6: asymptotic series for int_w^inf e^{i u^2} du via repeated
// integration by parts; terms fall below 1e-17 before they start growing.
inline FresnelValue fresnel(double w) {
    double aw = std::abs(w);
    FresnelValue out;
    if (aw <= 6.0) {
        out.c = integrate_adaptive([](double u) { return std::cos(u * u); }, 0.0,
                                   aw, 1e-15);
        out.s = integrate_adaptive([](double u) { return std::sin(u * u); }, 0.0,
                                   aw, 1e-15);
    } else {
        const std::complex<double> I(0.0, 1.0);
        std::complex<double> tail(0.0, 0.0);
        std::complex<double> term = I * std::exp(I * aw * aw) / (2.0 * aw);
        double prev = std::abs(term);
        for (int k = 0; k < 64; ++k) {
            tail += term;
            term *= -I * double(2 * k + 1) / (2.0 * aw * aw);
            double mag = std::abs(term);
            if (mag < 1e-18 || mag > prev) break;
            prev = mag;
        }
        const double lim = std::sqrt(M_PI / 8.0);
        out.c = lim - tail.real();
        out.s = lim - tail.imag();
    }
    if (w < 0) {
        out.c = -out.c;
        out.s = -out.s;
    }
    return out;
}

// point on the unit-speed Euler spiral for velocity v at time t:
// (x, y) = (int_0^t cos(v u^2/2) du, -int_0^t sin(v u^2/2) du)
inline Vec3 euler_spiral_point(double v, double t) {
    if (v <= 0) throw contract_error("euler_spiral: v must be positive");
    double scale = std::sqrt(2.0 / v);
    FresnelValue f = fresnel(std::sqrt(v / 2.0) * t);
    return {scale * f.c, -scale * f.s, 0.0};
}

}  // namespace lzsweep
