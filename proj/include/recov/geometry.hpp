#pragma once

#include <cmath>
#include <vector>

#include "recov/common.hpp"

namespace recov {

// Internal pitch: 105 x 68 metres, origin bottom-left, attacking goal of the
// oriented team at (105, 34). Provider pitch: 120 x 80 units, y grows downward.
inline constexpr double kPitchLength = 105.0;
inline constexpr double kPitchWidth = 68.0;
inline constexpr double kProviderLength = 120.0;
inline constexpr double kProviderWidth = 80.0;
inline constexpr double kGoalX = 105.0;
inline constexpr double kGoalY = 34.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Polygon = std::vector<Vec2>;

// Provider units -> internal metres. The provider y axis points down, so the
// map flips it: x' = x * 105/120, y' = (80 - y) * 68/80.
inline Vec2 to_internal_xy(Vec2 p) {
    if (p.x < 0.0 || p.x > kProviderLength || p.y < 0.0 || p.y > kProviderWidth)
        throw RangeError(strfmt("provider coordinate (%g, %g) outside [0,%g]x[0,%g]",
                                p.x, p.y, kProviderLength, kProviderWidth));
    return {p.x * kPitchLength / kProviderLength,
            (kProviderWidth - p.y) * kPitchWidth / kProviderWidth};
}

inline Vec2 internal_to_provider(Vec2 p) {
    return {p.x * kProviderLength / kPitchLength,
            kProviderWidth - p.y * kProviderWidth / kPitchWidth};
}

inline Vec2 clamp_to_provider(Vec2 p) {
    return {std::fmin(std::fmax(p.x, 0.0), kProviderLength),
            std::fmin(std::fmax(p.y, 0.0), kProviderWidth)};
}

inline Vec2 clamp_to_pitch(Vec2 p) {
    return {std::fmin(std::fmax(p.x, 0.0), kPitchLength),
            std::fmin(std::fmax(p.y, 0.0), kPitchWidth)};
}

// Half-turn about the pitch centre; maps a right-to-left attack onto the
// canonical left-to-right frame. Involution.
inline Vec2 flip_ltr(Vec2 p) { return {kPitchLength - p.x, kPitchWidth - p.y}; }

inline double dist_to_goal(Vec2 p) { return dist(p, {kGoalX, kGoalY}); }

// Absolute angle between the line to the goal centre and the x axis.
// At the goal centre both legs are zero and the angle is 0.
inline double angle_to_goal(Vec2 p) {
    return std::atan2(std::fabs(kGoalY - p.y), kGoalX - p.x);
}

inline bool point_on_segment(Vec2 p, Vec2 a, Vec2 b, double eps = 1e-9) {
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (std::fabs(cross) > eps * (1.0 + dist(a, b))) return false;
    const double d = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    return d >= -eps && d <= dist(a, b) * dist(a, b) + eps;
}

// Even-odd crossing test; boundary points count as inside.
inline bool point_in_polygon(const Polygon& poly, Vec2 p) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0, j = n - 1; i < n; j = i++)
        if (point_on_segment(p, poly[j], poly[i])) return true;
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j], b = poly[i];
        if ((b.y > p.y) != (a.y > p.y)) {
            const double xint = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

// Proper self-intersection count between non-adjacent edges. Used as a
// diagnostic; the even-odd rule above stays well defined either way.
inline int polygon_self_intersections(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 4) return 0;
    auto seg_cross = [](Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
        auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
            const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
            return (v > 1e-12) - (v < -1e-12);
        };
        const int o1 = orient(a, b, c), o2 = orient(a, b, d);
        const int o3 = orient(c, d, a), o4 = orient(c, d, b);
        return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
    };
    int count = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
            if (seg_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) ++count;
        }
    }
    return count;
}

}  // namespace recov
