#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

namespace terracover {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 xy() const { return {x, y}; }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline bool operator==(Vec3 a, Vec3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
inline double norm(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline Vec3 lerp(Vec3 a, Vec3 b, double t) { return a + t * (b - a); }

/// Unit vector at angle `heading` from the +x axis.
inline Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Axis-aligned rectangle in the map plane.
struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Vec2 p, double tol = 0.0) const {
    return p.x >= min_x - tol && p.x <= max_x + tol && p.y >= min_y - tol &&
           p.y <= max_y + tol;
  }
  Bounds expanded(double margin) const {
    return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
  }
};

/// Ordered sequence of 3D points (lanes, references, contours lifted to 3D).
struct Polyline3 {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double length() const;         // 3D arc length
  double planar_length() const;  // x-y arc length
};

/// Throws Error(validation) unless `line` has at least two finite points and no
/// two consecutive points coincide in the x-y plane.
void validate_polyline(const Polyline3& line, std::string_view module,
                       std::string_view operation);

/// Parameter of the ray/rectangle exit point: the largest t >= 0 with
/// origin + t * dir inside `box`. Returns 0 if the origin is outside.
double ray_exit_distance(Vec2 origin, Vec2 dir, const Bounds& box);

}  // namespace terracover
