#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "terracover/geometry.hpp"
#include "terracover/terrain.hpp"

namespace terracover {

/// Simple polygon field boundary in the map plane, normalized counter-clockwise
/// and stored without a repeated closing vertex.
class FieldContour {
 public:
  /// Validates and normalizes a ring. A closing vertex equal to the first one
  /// is dropped; clockwise rings are reversed.
  static FieldContour from_ring(std::vector<Vec2> ring);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Vec2 vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  double area() const;
  Bounds bounds() const;
  double perimeter() const;

 private:
  explicit FieldContour(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {}
  std::vector<Vec2> vertices_;
};

/// Signed shoelace area, positive for counter-clockwise rings.
double signed_area(std::span<const Vec2> ring);

struct HeadlandSpec {
  std::size_t passes = 0;
  double pass_width = 36.0;
};

/// Even-odd containment; points on the boundary count as inside.
bool contains(const FieldContour& contour, Vec2 point);

/// Polygon shrunk by `distance` with mitered corners (miter limit 4). If the
/// result splits, the largest part is kept.
FieldContour inward_offset(const FieldContour& contour, double distance);

/// Maximal sub-polylines whose x-y projection lies inside the contour. Pieces
/// crossing the boundary end exactly on the crossed edge, with z interpolated
/// linearly along the lane.
std::vector<Polyline3> clip_lane(const Polyline3& lane, const FieldContour& contour);

/// Drapes a 2D path over the terrain: z = f(x, y) + lift.
Polyline3 project_vertical(std::span<const Vec2> path, const UniformGrid& terrain,
                           double lift);

/// Headland passes as inward-offset rings at (p + 1/2) * pass_width, closed and
/// vertically projected with the given lift.
std::vector<Polyline3> headland_paths(const FieldContour& contour, const HeadlandSpec& spec,
                                      const UniformGrid& terrain, double lift);

/// The region left for mainfield lanes after `spec.passes` headland passes.
FieldContour mainfield_contour(const FieldContour& contour, const HeadlandSpec& spec);

/// Straight first-lane line: the chosen contour edge (default: longest) shifted
/// inward by `offset` and clipped to the contour. `normal` points into the
/// field, i.e. toward the following lanes.
struct SeedLine {
  Vec2 start;
  Vec2 end;
  Vec2 normal;
  std::size_t edge = 0;
};
SeedLine select_seed_line(const FieldContour& contour, double offset,
                          std::optional<std::size_t> edge = std::nullopt);

/// Intersections of the infinite line through `origin` along `dir` with the
/// contour, as sorted inside intervals [t0, t1] of the line parameter.
std::vector<std::pair<double, double>> line_inside_intervals(const FieldContour& contour,
                                                             Vec2 origin, Vec2 dir);

}  // namespace terracover
