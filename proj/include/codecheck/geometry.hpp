#pragma once

#include <cstddef>
#include <span>

namespace codecheck::geometry {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

Vec3 operator+(const Vec3& a, const Vec3& b) noexcept;
Vec3 operator-(const Vec3& a, const Vec3& b) noexcept;
Vec3 operator*(const Vec3& a, double s) noexcept;
double dot(const Vec3& a, const Vec3& b) noexcept;
Vec3 cross(const Vec3& a, const Vec3& b) noexcept;
double norm(const Vec3& a) noexcept;

/// Number of distinct points in a loop (exact comparison).
std::size_t distinct_points(std::span<const Vec3> loop);

/// Twice the vector area of a closed loop: the sum over edges of p_i x p_{i+1}.
/// Vertices are shifted to the first vertex before accumulating, which keeps
/// the sum well-conditioned for loops far from the origin.
Vec3 newell_sum(std::span<const Vec3> loop) noexcept;

/// True when the loop has fewer than three distinct points or encloses no
/// area relative to its extent.
bool is_degenerate(std::span<const Vec3> loop);

/// Area in squared loop units. Throws Error{DegenerateLoop}.
double loop_area(std::span<const Vec3> loop);

/// Unit normal, oriented by winding (counter-clockwise seen from +normal).
/// Throws Error{DegenerateLoop}.
Vec3 unit_normal(std::span<const Vec3> loop);

/// Angle in degrees between the normal and +Z: 0 facing up, 90 vertical,
/// 180 facing down.
double tilt_degrees(const Vec3& normal) noexcept;

/// Clockwise angle in [0, 360) from +Y (project north) of the normal's
/// horizontal projection. Throws Error{HorizontalSurface} when that
/// projection vanishes.
double azimuth_degrees(const Vec3& normal);

/// Largest point distance between any two vertices.
double loop_diameter(std::span<const Vec3> loop) noexcept;

/// Largest distance of a vertex from the best-fit plane through the vertex
/// centroid with the Newell normal.
double max_plane_deviation(std::span<const Vec3> loop);

} // namespace codecheck::geometry
