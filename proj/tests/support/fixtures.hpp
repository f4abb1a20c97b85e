#pragma once

#include <cmath>
#include <vector>

#include "terracover/coverage_metrics.hpp"
#include "terracover/field_geometry.hpp"
#include "terracover/lane_planner.hpp"
#include "terracover/synth.hpp"
#include "terracover/terrain.hpp"

namespace fixtures {

using namespace terracover;

// Grid of `surface` built from 1 m regular samples over `extent`; samples sit
// on the grid nodes, so node values are the exact surface values.
inline UniformGrid analytic_grid(const TerrainKind& surface, const Bounds& extent) {
  const auto samples = synth_terrain(AnalyticSurface(surface), extent, SamplePattern{});
  return build_uniform_grid(samples, GridBuildParams{});
}

inline FieldContour rectangle(double width, double height, double x0 = 0.0, double y0 = 0.0) {
  return FieldContour::from_ring(
      {{x0, y0}, {x0 + width, y0}, {x0 + width, y0 + height}, {x0, y0 + height}});
}

inline constexpr double kInclineSlope = 0.2;

inline double incline_angle() { return std::atan(kInclineSlope); }

// Terrain padded 60 m around a field of the given size.
inline Bounds padded(double width, double height) { return {-60.0, -60.0, width + 60.0, height + 60.0}; }

// Plan options that seed on the bottom edge (edge 0 of `rectangle`).
inline PlanOptions bottom_seed() {
  PlanOptions o;
  o.seed_edge = 0;
  return o;
}

inline Polyline3 line3(std::vector<Vec3> pts) { return Polyline3{std::move(pts)}; }

}  // namespace fixtures
