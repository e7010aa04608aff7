#include "codecheck/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "codecheck/error.hpp"

namespace codecheck::geometry {

namespace {

// Cross-product magnitude below this fraction of diameter^2 counts as
// collinear.
constexpr double kDegenerateRatio = 1e-12;

// Horizontal normal component below this is treated as exactly vertical.
constexpr double kHorizontalEpsilon = 1e-9;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

} // namespace

Vec3 operator+(const Vec3& a, const Vec3& b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(const Vec3& a, const Vec3& b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(const Vec3& a, double s) noexcept { return {a.x * s, a.y * s, a.z * s}; }
double dot(const Vec3& a, const Vec3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(const Vec3& a) noexcept { return std::hypot(a.x, a.y, a.z); }

std::size_t distinct_points(std::span<const Vec3> loop) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i && !seen; ++j) {
            seen = loop[i] == loop[j];
        }
        if (!seen) {
            ++count;
        }
    }
    return count;
}

Vec3 newell_sum(std::span<const Vec3> loop) noexcept {
    Vec3 sum;
    if (loop.empty()) {
        return sum;
    }
    const Vec3 origin = loop.front();
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec3 a = loop[i] - origin;
        const Vec3 b = loop[(i + 1) % loop.size()] - origin;
        sum = sum + cross(a, b);
    }
    return sum;
}

double loop_diameter(std::span<const Vec3> loop) noexcept {
    double best = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        for (std::size_t j = i + 1; j < loop.size(); ++j) {
            best = std::max(best, norm(loop[i] - loop[j]));
        }
    }
    return best;
}

bool is_degenerate(std::span<const Vec3> loop) {
    if (distinct_points(loop) < 3) {
        return true;
    }
    const double diameter = loop_diameter(loop);
    return norm(newell_sum(loop)) <= kDegenerateRatio * diameter * diameter;
}

double loop_area(std::span<const Vec3> loop) {
    if (is_degenerate(loop)) {
        throw Error(Errc::DegenerateLoop, "loop is collinear or has fewer than 3 distinct vertices");
    }
    return 0.5 * norm(newell_sum(loop));
}

Vec3 unit_normal(std::span<const Vec3> loop) {
    if (is_degenerate(loop)) {
        throw Error(Errc::DegenerateLoop, "loop is collinear or has fewer than 3 distinct vertices");
    }
    const Vec3 n = newell_sum(loop);
    return n * (1.0 / norm(n));
}

double tilt_degrees(const Vec3& normal) noexcept {
    // atan2 stays accurate near 0 and 180 where acos loses precision.
    return std::atan2(std::hypot(normal.x, normal.y), normal.z) * kRadToDeg;
}

double azimuth_degrees(const Vec3& normal) {
    const double horizontal = std::hypot(normal.x, normal.y);
    if (horizontal <= kHorizontalEpsilon * norm(normal)) {
        throw Error(Errc::HorizontalSurface, "azimuth is undefined for a horizontal surface");
    }
    double degrees = std::atan2(normal.x, normal.y) * kRadToDeg;
    if (degrees < 0.0) {
        degrees += 360.0;
    }
    if (degrees >= 360.0) {
        degrees -= 360.0;
    }
    return degrees;
}

double max_plane_deviation(std::span<const Vec3> loop) {
    const Vec3 n = unit_normal(loop);
    Vec3 centroid;
    for (const auto& p : loop) {
        centroid = centroid + p;
    }
    centroid = centroid * (1.0 / static_cast<double>(loop.size()));
    double worst = 0.0;
    for (const auto& p : loop) {
        worst = std::max(worst, std::abs(dot(p - centroid, n)));
    }
    return worst;
}

} // namespace codecheck::geometry
