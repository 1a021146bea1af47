#pragma once
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lzsweep {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_ = 0) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0 ? *this / n : Vec3{};
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// rotation by +90 degrees in the xy plane (the 2D normal convention)
inline Vec3 rot90(const Vec3& v) { return {-v.y, v.x, v.z * 0}; }

struct Mat3 {
    // row-major
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 r;
        r.m = {c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z};
        return r;
    }
    static Mat3 rotation_z(double th) {
        Mat3 r;
        double c = std::cos(th), s = std::sin(th);
        r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
        return r;
    }
    Vec3 apply(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transpose() const {
        Mat3 r;
        r.m = {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
        return r;
    }
    Mat3 mul(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += m[3 * i + k] * o.m[3 * k + j];
                r.m[3 * i + j] = s;
            }
        return r;
    }
};

// error taxonomy: everything derives from std::runtime_error so the CLI can
// map categories to exit codes
struct contract_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct verification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lzsweep
