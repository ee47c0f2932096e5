#pragma once

#include <cmath>
#include <cstdint>

namespace crossview {

struct Vec2d {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2d&) const = default;
};

struct Vec3d {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3d operator+(const Vec3d& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3d operator-(const Vec3d& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3d operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3d& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3d operator*(double s, const Vec3d& v) { return v * s; }

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb8& o) const { return r == o.r && g == o.g && b == o.b; }
    bool operator!=(const Rgb8& o) const { return !(*this == o); }
};

inline constexpr double kPi = 3.1415926535897932384626433832795;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps an angle to [-pi, pi).
inline double wrap_pi(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r >= kTwoPi / 2.0) r -= kTwoPi;  // remainder may return exactly +pi
    return r;
}

/// Rounds half-up to the nearest integer (floor(x + 0.5)).
inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

/// Non-negative modulo.
inline long mod_floor(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace crossview
