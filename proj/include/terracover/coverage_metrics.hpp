#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "terracover/field_geometry.hpp"
#include "terracover/lane_planner.hpp"
#include "terracover/terrain.hpp"

namespace terracover {

/// Plan-in-2D-then-drape reference: straight lanes spaced exactly w in the map
/// plane, parallel to the same seed line the 3D planner starts from, clipped to
/// the mainfield and lifted vertically by h.
Plan baseline_2d_plan(const FieldContour& contour, const UniformGrid& terrain,
                      const VehicleConfig& vehicle, const SolverConfig& solver,
                      const PlanOptions& options);

/// One across-lane measurement: `from` on lane A, `to` where the boom-normal
/// line through it meets lane B, their terrain foot points, and the ground
/// arc between the feet.
struct SpacingSample {
  Vec3 from;
  Vec3 to;
  Vec3 foot_from;
  Vec3 foot_to;
  double spacing = 0.0;     // along-terrain distance between the feet
  double chord_tilt = 0.0;  // roll of the from->to chord (implied half-boom tilt)
};

std::vector<SpacingSample> ground_spacing_samples(const std::vector<Polyline3>& lane_a,
                                                  const std::vector<Polyline3>& lane_b,
                                                  const UniformGrid& terrain,
                                                  double sample_step, double boom_height);

/// Ground spacing between two lanes sampled every `sample_step` along lane A.
/// Empty when the lanes do not face each other.
std::vector<double> ground_spacing_profile(const std::vector<Polyline3>& lane_a,
                                           const std::vector<Polyline3>& lane_b,
                                           const UniformGrid& terrain, double sample_step,
                                           double boom_height);

/// Largest map-plane distance from a point of one plan's lane to the matching
/// lane of the other plan (symmetric Hausdorff per lane, max over lanes).
double lateral_deviation(const Plan& a, const Plan& b);

struct GapOverlap {
  double gap_fraction = 0.0;
  double overlap_fraction = 0.0;
  std::size_t domain_cells = 0;
  std::size_t columns = 0;
  std::size_t rows = 0;
  Bounds raster_bounds;
  std::vector<unsigned short> coverage;  // per cell pass count, row-major
  std::vector<unsigned char> in_domain;
};

/// Rasterized swath coverage of `plan` over `domain`. Each lane point carries a
/// two-half boom: each half spans w/2 along the chord to the neighboring lane
/// on that side (mirrored from the other half at the plan's outer lanes), and
/// its ends are projected vertically onto the map plane.
GapOverlap gap_overlap_raster(const Plan& plan, const FieldContour& domain,
                              const UniformGrid& terrain, const VehicleConfig& vehicle,
                              double cell);

struct LanePairStats {
  std::size_t lane = 0;  // pair (lane, lane + 1)
  std::size_t samples = 0;
  double mean_spacing = 0.0;
  double min_spacing = 0.0;
  double max_spacing = 0.0;
  double max_spacing_error = 0.0;  // max |spacing - w|
  double mean_tilt = 0.0;          // mean |chord roll|, radians
  double max_tilt = 0.0;
  std::vector<double> profile;
};

struct LaneStats {
  std::size_t lane = 0;
  std::size_t points = 0;
  std::size_t converged = 0;
  std::size_t excessive_roll = 0;
  double max_abs_roll = 0.0;
  double min_height = 0.0;
  double max_height = 0.0;
};

struct ReportOptions {
  double sample_step = 10.0;
  double raster_cell = 0.5;
};

struct CoverageReport {
  std::vector<LanePairStats> pairs;
  std::vector<LaneStats> lanes;
  double gap_fraction = 0.0;
  double overlap_fraction = 0.0;
  double max_spacing_error = 0.0;
};

CoverageReport coverage_report(const Plan& plan, const UniformGrid& terrain,
                               const VehicleConfig& vehicle, const ReportOptions& options);

}  // namespace terracover
