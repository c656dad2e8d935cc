#pragma once

#include <cmath>

namespace vfcw {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
    constexpr bool operator==(const Vec2&) const = default;

    double norm() const noexcept { return std::hypot(x, y); }
};

constexpr Vec2 operator*(double s, Vec2 v) noexcept { return v * s; }

inline double distance(Vec2 a, Vec2 b) noexcept { return (a - b).norm(); }

inline bool finite(Vec2 v) noexcept { return std::isfinite(v.x) && std::isfinite(v.y); }

} // namespace vfcw
