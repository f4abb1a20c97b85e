#include "terracover/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "terracover/error.hpp"

namespace terracover {

double Polyline3::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
  return total;
}

double Polyline3::planar_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    total += distance(points[i - 1].xy(), points[i].xy());
  }
  return total;
}

void validate_polyline(const Polyline3& line, std::string_view module,
                       std::string_view operation) {
  const std::string mod(module);
  const std::string op(operation);
  if (line.size() < 2) {
    throw Error(ErrorKind::validation, mod, op, "polyline needs at least two points");
  }
  for (std::size_t i = 0; i < line.size(); ++i) {
    const Vec3& p = line.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw Error(ErrorKind::validation, mod, op, "non-finite polyline coordinate", i);
    }
    if (i > 0 && line.points[i - 1].xy() == p.xy()) {
      throw Error(ErrorKind::validation, mod, op,
                  "consecutive polyline points coincide in the x-y plane", i);
    }
  }
}

double ray_exit_distance(Vec2 origin, Vec2 dir, const Bounds& box) {
  if (!box.contains(origin)) return 0.0;
  double t = std::numeric_limits<double>::infinity();
  if (dir.x > 0) t = std::min(t, (box.max_x - origin.x) / dir.x);
  if (dir.x < 0) t = std::min(t, (box.min_x - origin.x) / dir.x);
  if (dir.y > 0) t = std::min(t, (box.max_y - origin.y) / dir.y);
  if (dir.y < 0) t = std::min(t, (box.min_y - origin.y) / dir.y);
  return std::isfinite(t) ? std::max(t, 0.0) : 0.0;
}

}  // namespace terracover
