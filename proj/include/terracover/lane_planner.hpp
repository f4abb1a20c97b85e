#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "terracover/field_geometry.hpp"
#include "terracover/geometry.hpp"
#include "terracover/terrain.hpp"

namespace terracover {

/// Machine geometry. Angles in radians, lengths in meters.
struct VehicleConfig {
  double working_width = 36.0;   // w, boom width covered per pass
  double boom_height = 2.0;      // h, nominal projection distance above ground
  double axle_half_width = 1.5;  // a, lateral probe distance for the ground tilt
  double max_roll = deg_to_rad(30.0);

  void validate() const;
};

enum class OffsetSide { left, right };

struct SolverConfig {
  double tolerance = 0.1;                    // epsilon on |h_proj - h|
  double roll_step = deg_to_rad(1.0);        // delta beta of the fixed-step walk
  std::size_t max_iterations = 0;            // 0: derived from max_roll and roll_step
  OffsetSide side = OffsetSide::left;        // heading + pi/2 (left) or - pi/2
  double max_heading_change = deg_to_rad(30.0);  // delta psi_max for reference spacing

  void validate() const;
  /// max_iterations, or ceil(2 * max_roll / roll_step) + 10 when unset.
  std::size_t iteration_cap(const VehicleConfig& vehicle) const;
};

/// Local frame of one reference segment: heading, midpoint and the point lifted
/// to boom height above the ground under it.
struct SegmentFrame {
  double heading = 0.0;  // psi, full-quadrant
  Vec2 lateral;          // unit offset direction (heading +/- pi/2)
  Vec3 midpoint;
  Vec3 lifted;
  double ground_tilt = 0.0;  // alpha, from the probe at the axle half-width
  bool midpoint_at_height = false;
};

/// One evaluation of the adjacent-lane candidate at a given roll.
struct RollCandidate {
  Vec3 position;
  double roll = 0.0;
  double effective_offset = 0.0;  // w * cos(roll)
  double vertical_offset = 0.0;   // z - f(x, y)
  double projected_height = 0.0;  // |vertical_offset * cos(roll)|
};

struct RollSample {
  double roll = 0.0;
  double height = 0.0;
};

struct LanePointResult {
  Vec3 position;
  Vec3 lifted_reference;  // the reference point the offset was measured from
  double roll = 0.0;
  double effective_offset = 0.0;
  double achieved_height = 0.0;
  std::size_t iterations = 0;
  std::size_t segment = 0;
  bool converged = false;
  bool excessive_roll = false;
  bool exits_extent = false;
};

SegmentFrame segment_frame(Vec3 p, Vec3 q, const UniformGrid& terrain,
                           const VehicleConfig& vehicle, const SolverConfig& solver,
                           std::size_t index = 0);

RollCandidate candidate_offset(const SegmentFrame& frame, double roll,
                               const UniformGrid& terrain, const VehicleConfig& vehicle);

/// Starting roll from the terrain elevation one full working width away.
double initial_roll(const SegmentFrame& frame, const UniformGrid& terrain,
                    const VehicleConfig& vehicle);

/// Inverse-error weighted roll between two iterates that bracket the target
/// height (weights 1/|height - target|).
double blend_roll(RollSample previous, RollSample current, double target_height);

/// Fixed-step roll walk from `initial` until the projected height is within
/// tolerance, refined by one blend when the error changes sign. The error is
/// signed by the vertical offset, so a candidate under the terrain reads as too
/// low. `trace`, if given, receives every evaluated (roll, signed height) pair.
LanePointResult refine_roll(const SegmentFrame& frame, double initial,
                            const UniformGrid& terrain, const VehicleConfig& vehicle,
                            const SolverConfig& solver,
                            std::vector<RollSample>* trace = nullptr);

struct TerrainProjection {
  Vec3 foot;
  double distance = 0.0;
};

/// Closest terrain point by dense search over a square window of half-size
/// `search_radius` at `step`, followed by two local refinements.
TerrainProjection project_onto_terrain(Vec3 point, const UniformGrid& terrain,
                                       double search_radius, double step);

double exact_projection_distance(Vec3 point, const UniformGrid& terrain,
                                 double search_radius, double step);

struct AdjacentLane {
  Polyline3 lane;                       // points that stayed inside the terrain
  std::vector<LanePointResult> points;  // one per reference segment

  bool empty() const { return lane.empty(); }
};

/// The lane one working width beside `reference`, one point per reference
/// segment. Points whose probes leave the terrain are flagged and omitted from
/// `lane`; the remaining points are still computed.
AdjacentLane adjacent_lane(const Polyline3& reference, const UniformGrid& terrain,
                           const VehicleConfig& vehicle, const SolverConfig& solver);

/// Smallest tangential spacing that keeps a lane offset by `working_width`
/// free of back-steps at heading changes up to `max_heading_change`:
/// w (1 - cos dpsi) / sin dpsi, evaluated as w tan(dpsi / 2).
double min_tangential_spacing(double working_width, double max_heading_change);

/// Evenly resamples by 3D arc length with the largest count whose spacing is
/// still >= `min_spacing`. Endpoints are kept.
Polyline3 resample_at_spacing(const Polyline3& line, double min_spacing);

Polyline3 resample_reference(const Polyline3& line, const VehicleConfig& vehicle,
                             double max_heading_change);

/// Lifts a reference lying on the ground to boom height, vertex by vertex:
/// shift h sin(alpha) sideways and h cos(alpha) up from the ground under it.
/// `tilts`, if given, receives the ground tilt used at each vertex.
Polyline3 lift_reference(const Polyline3& ground_line, const UniformGrid& terrain,
                         const VehicleConfig& vehicle, const SolverConfig& solver,
                         std::vector<double>* tilts = nullptr);

/// Extends both ends along their end headings until they leave `target`,
/// staying inside the terrain. New points keep the end's height above ground.
Polyline3 extend_lane(const Polyline3& lane, const UniformGrid& terrain, const Bounds& target,
                      double step);

/// A lane of a plan: its clipped geometry plus per-point planner diagnostics.
struct PlanLane {
  std::vector<Polyline3> pieces;
  std::vector<LanePointResult> points;

  bool has_excessive_roll() const;
  std::size_t converged_count() const;
};

/// Lanes generated outward from `seed`, each the adjacent lane of the previous
/// one, clipped to `field`. Stops when a lane falls entirely outside the field
/// or after `max_lanes` lanes. The seed itself is not included.
std::vector<PlanLane> cascade_lanes(const Polyline3& seed, const UniformGrid& terrain,
                                    const FieldContour& field, const VehicleConfig& vehicle,
                                    const SolverConfig& solver, std::size_t max_lanes);

struct PlanOptions {
  HeadlandSpec headland{0, 36.0};
  std::optional<std::size_t> seed_edge;  // contour edge for the first lane; longest if unset
  std::size_t max_lanes = 500;
};

struct Plan {
  FieldContour mainfield;
  std::vector<Polyline3> headland;
  std::vector<PlanLane> lanes;
};

/// Full terrain-following plan: headland rings, a seed lane half a working
/// width inside the mainfield edge, and the lane cascade from it.
Plan plan_field(const FieldContour& contour, const UniformGrid& terrain,
                const VehicleConfig& vehicle, const SolverConfig& solver,
                const PlanOptions& options);

}  // namespace terracover
