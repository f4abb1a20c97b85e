#include "terracover/lane_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "terracover/error.hpp"

namespace terracover {

namespace {

constexpr const char* kModule = "lane_planner";

double side_sign(OffsetSide side) { return side == OffsetSide::left ? 1.0 : -1.0; }

// heading + pi/2 for the left side, heading - pi/2 for the right.
Vec2 lateral_direction(double heading, OffsetSide side) {
  const double s = side_sign(side);
  return {-s * std::sin(heading), s * std::cos(heading)};
}

// Terrain lookup that re-labels an out-of-extent failure for the caller.
double ground(const UniformGrid& terrain, Vec2 p, const char* operation, const char* message,
              std::size_t index) {
  if (!terrain.contains(p)) {
    throw Error(ErrorKind::out_of_extent, kModule, operation, message, index);
  }
  return terrain.elevation(p);
}

struct LiftedPoint {
  Vec3 point;
  double tilt = 0.0;
};

// Ground tilt from a probe at the axle half-width, then the point at boom
// height along the tilted ground normal.
LiftedPoint lift_from_ground(Vec2 base, Vec2 lateral, const UniformGrid& terrain,
                             const VehicleConfig& vehicle, const char* operation,
                             std::size_t index) {
  const char* msg = "probe outside terrain extent";
  const double z_ground = ground(terrain, base, operation, msg, index);
  const double z_probe =
      ground(terrain, base + vehicle.axle_half_width * lateral, operation, msg, index);
  const double tilt = std::atan((z_ground - z_probe) / vehicle.axle_half_width);
  const double h = vehicle.boom_height;
  const Vec2 xy = base + (h * std::sin(tilt)) * lateral;
  return {{xy.x, xy.y, z_ground + h * std::cos(tilt)}, tilt};
}

}  // namespace

void VehicleConfig::validate() const {
  auto fail = [](const char* msg) {
    throw Error(ErrorKind::validation, kModule, "VehicleConfig", msg);
  };
  if (!(working_width > 0.0) || !std::isfinite(working_width)) fail("working width must be positive");
  if (!(boom_height > 0.0) || !std::isfinite(boom_height)) fail("boom height must be positive");
  if (!(axle_half_width > 0.0) || !std::isfinite(axle_half_width)) {
    fail("axle half-width must be positive");
  }
  if (!(max_roll > 0.0) || !(max_roll < kPi / 2)) fail("max roll must lie in (0, 90) degrees");
}

void SolverConfig::validate() const {
  auto fail = [](const char* msg) {
    throw Error(ErrorKind::validation, kModule, "SolverConfig", msg);
  };
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) fail("tolerance must be positive");
  if (!(roll_step > 0.0) || !std::isfinite(roll_step)) fail("roll step must be positive");
  if (!(max_heading_change > 0.0) || !(max_heading_change < kPi / 2)) {
    fail("max heading change must lie in (0, 90) degrees");
  }
}

std::size_t SolverConfig::iteration_cap(const VehicleConfig& vehicle) const {
  if (max_iterations > 0) return max_iterations;
  return static_cast<std::size_t>(std::ceil(2.0 * vehicle.max_roll / roll_step)) + 10;
}

SegmentFrame segment_frame(Vec3 p, Vec3 q, const UniformGrid& terrain,
                           const VehicleConfig& vehicle, const SolverConfig& solver,
                           std::size_t index) {
  const Vec2 delta = q.xy() - p.xy();
  if (delta.x == 0.0 && delta.y == 0.0) {
    throw Error(ErrorKind::validation, kModule, "segment_frame",
                "segment endpoints coincide in the x-y plane", index);
  }
  SegmentFrame frame;
  frame.heading = std::atan2(delta.y, delta.x);
  frame.lateral = lateral_direction(frame.heading, solver.side);
  frame.midpoint = 0.5 * (p + q);

  const LiftedPoint lifted = lift_from_ground(frame.midpoint.xy(), frame.lateral, terrain,
                                              vehicle, "segment_frame", index);
  frame.ground_tilt = lifted.tilt;
  const double vertical = frame.midpoint.z - terrain.elevation(frame.midpoint.xy());
  frame.midpoint_at_height =
      std::abs(vertical * std::cos(lifted.tilt) - vehicle.boom_height) <= solver.tolerance;
  frame.lifted = frame.midpoint_at_height ? frame.midpoint : lifted.point;
  return frame;
}

RollCandidate candidate_offset(const SegmentFrame& frame, double roll,
                               const UniformGrid& terrain, const VehicleConfig& vehicle) {
  const double w = vehicle.working_width;
  RollCandidate c;
  c.roll = roll;
  c.effective_offset = w * std::cos(roll);
  const Vec2 xy = frame.lifted.xy() + c.effective_offset * frame.lateral;
  c.position = {xy.x, xy.y, frame.lifted.z - w * std::sin(roll)};
  c.vertical_offset =
      c.position.z - ground(terrain, xy, "candidate_offset", "lane exits terrain extent", 0);
  c.projected_height = std::abs(c.vertical_offset * std::cos(roll));
  return c;
}

double initial_roll(const SegmentFrame& frame, const UniformGrid& terrain,
                    const VehicleConfig& vehicle) {
  const double w = vehicle.working_width;
  const Vec2 probe = frame.lifted.xy() + w * frame.lateral;
  const double z_probe = ground(terrain, probe, "initial_roll", "lane exits terrain extent", 0);
  return std::atan((frame.lifted.z - z_probe - vehicle.boom_height) / w);
}

double blend_roll(RollSample previous, RollSample current, double target_height) {
  const double eta_current = 1.0 / std::abs(current.height - target_height);
  const double eta_previous = 1.0 / std::abs(previous.height - target_height);
  return (eta_current * current.roll + eta_previous * previous.roll) /
         (eta_current + eta_previous);
}

LanePointResult refine_roll(const SegmentFrame& frame, double initial,
                            const UniformGrid& terrain, const VehicleConfig& vehicle,
                            const SolverConfig& solver, std::vector<RollSample>* trace) {
  if (!std::isfinite(initial)) {
    throw Error(ErrorKind::validation, kModule, "refine_roll", "initial roll is not finite");
  }
  const double h = vehicle.boom_height;
  const double eps = solver.tolerance;
  auto evaluate = [&](double roll) {
    RollCandidate c = candidate_offset(frame, roll, terrain, vehicle);
    if (trace) trace->push_back({c.roll, std::copysign(c.projected_height, c.vertical_offset)});
    return c;
  };
  std::size_t iterations = 0;
  auto finish = [&](const RollCandidate& c, bool converged) {
    LanePointResult r;
    r.position = c.position;
    r.lifted_reference = frame.lifted;
    r.roll = c.roll;
    r.effective_offset = c.effective_offset;
    r.achieved_height = c.projected_height;
    r.iterations = iterations;
    r.converged = converged;
    r.excessive_roll = std::abs(c.roll) > vehicle.max_roll;
    return r;
  };
  // Signed error: a candidate below the terrain counts as too low, so the walk
  // raises it instead of drifting further underground.
  auto error = [h](const RollCandidate& c) {
    return std::copysign(c.projected_height, c.vertical_offset) - h;
  };

  RollCandidate current = evaluate(initial);
  if (std::abs(error(current)) <= eps) return finish(current, true);
  RollCandidate best = current;

  const std::size_t cap = solver.iteration_cap(vehicle);
  while (iterations < cap) {
    const RollCandidate previous = current;
    const double next = error(previous) < 0.0 ? previous.roll - solver.roll_step
                                              : previous.roll + solver.roll_step;
    current = evaluate(next);
    ++iterations;
    if (std::abs(error(current)) < std::abs(error(best))) best = current;
    if (std::abs(error(current)) <= eps) return finish(current, true);
    if ((error(current) > 0) != (error(previous) > 0)) {
      const double blended = blend_roll({previous.roll, error(previous) + h},
                                        {current.roll, error(current) + h}, h);
      const RollCandidate refined = evaluate(blended);
      ++iterations;
      return finish(refined, std::abs(error(refined)) <= eps);
    }
  }
  // No bracket within the cap: report the best iterate seen.
  return finish(best, false);
}

TerrainProjection project_onto_terrain(Vec3 point, const UniformGrid& terrain,
                                       double search_radius, double step) {
  if (!(search_radius > 0.0) || !(step > 0.0)) {
    throw Error(ErrorKind::validation, kModule, "exact_projection_distance",
                "search radius and step must be positive");
  }
  const Bounds window{point.x - search_radius, point.y - search_radius,
                      point.x + search_radius, point.y + search_radius};
  const Bounds& tb = terrain.bounds();
  if (window.min_x < tb.min_x || window.min_y < tb.min_y || window.max_x > tb.max_x ||
      window.max_y > tb.max_y) {
    throw Error(ErrorKind::out_of_extent, kModule, "exact_projection_distance",
                "search window exits terrain extent");
  }

  TerrainProjection best{{point.x, point.y, terrain.elevation(point.xy())}, 0.0};
  best.distance = distance(point, best.foot);

  auto scan = [&](Vec2 center, double radius, std::size_t half_count) {
    const double h = radius / static_cast<double>(half_count);
    const auto n = static_cast<long>(half_count);
    TerrainProjection local = best;
    for (long j = -n; j <= n; ++j) {
      for (long i = -n; i <= n; ++i) {
        const Vec2 q{center.x + static_cast<double>(i) * h, center.y + static_cast<double>(j) * h};
        if (!tb.contains(q)) continue;
        const Vec3 foot{q.x, q.y, terrain.elevation(q)};
        const double d = distance(point, foot);
        if (d < local.distance) local = {foot, d};
      }
    }
    best = local;
    return h;
  };

  const auto half = static_cast<std::size_t>(std::ceil(search_radius / step));
  double h = scan(point.xy(), search_radius, half);
  for (int round = 0; round < 2; ++round) h = scan(best.foot.xy(), h, 4);
  return best;
}

double exact_projection_distance(Vec3 point, const UniformGrid& terrain, double search_radius,
                                 double step) {
  return project_onto_terrain(point, terrain, search_radius, step).distance;
}

AdjacentLane adjacent_lane(const Polyline3& reference, const UniformGrid& terrain,
                           const VehicleConfig& vehicle, const SolverConfig& solver) {
  validate_polyline(reference, kModule, "adjacent_lane");
  const std::size_t segments = reference.size() - 1;
  AdjacentLane out;
  out.points.resize(segments);
  detail::parallel_for(segments, [&](std::size_t i) {
    LanePointResult& r = out.points[i];
    try {
      const SegmentFrame frame = segment_frame(reference.points[i], reference.points[i + 1],
                                               terrain, vehicle, solver, i);
      const double start = initial_roll(frame, terrain, vehicle);
      r = refine_roll(frame, start, terrain, vehicle, solver);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::out_of_extent) throw;
      r = LanePointResult{};
      r.exits_extent = true;
    }
    r.segment = i;
  }, 16);
  for (const auto& r : out.points) {
    if (!r.exits_extent) out.lane.points.push_back(r.position);
  }
  return out;
}

double min_tangential_spacing(double working_width, double max_heading_change) {
  return working_width * std::tan(0.5 * max_heading_change);
}

Polyline3 resample_at_spacing(const Polyline3& line, double min_spacing) {
  const double total = line.length();
  if (line.size() < 2 || !(total > 0.0) || !(min_spacing > 0.0)) return line;
  const double ratio = total / min_spacing;
  if (ratio > 1e7) {
    throw Error(ErrorKind::validation, kModule, "resample_reference",
                "spacing too small for the line length");
  }
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio)));
  const double spacing = total / static_cast<double>(count);

  Polyline3 out;
  out.points.reserve(count + 1);
  out.points.push_back(line.points.front());
  std::size_t seg = 0;
  double seg_start = 0.0;  // arc length at line.points[seg]
  for (std::size_t k = 1; k < count; ++k) {
    const double s = static_cast<double>(k) * spacing;
    while (seg + 1 < line.size() &&
           seg_start + distance(line.points[seg], line.points[seg + 1]) < s) {
      seg_start += distance(line.points[seg], line.points[seg + 1]);
      ++seg;
    }
    const double len = distance(line.points[seg], line.points[seg + 1]);
    const double t = len > 0.0 ? std::clamp((s - seg_start) / len, 0.0, 1.0) : 0.0;
    out.points.push_back(lerp(line.points[seg], line.points[seg + 1], t));
  }
  out.points.push_back(line.points.back());
  return out;
}

Polyline3 resample_reference(const Polyline3& line, const VehicleConfig& vehicle,
                             double max_heading_change) {
  if (!(max_heading_change > 0.0) || !(max_heading_change < kPi / 2)) {
    throw Error(ErrorKind::validation, kModule, "resample_reference",
                "max heading change must lie in (0, 90) degrees");
  }
  return resample_at_spacing(line,
                             min_tangential_spacing(vehicle.working_width, max_heading_change));
}

Polyline3 lift_reference(const Polyline3& ground_line, const UniformGrid& terrain,
                         const VehicleConfig& vehicle, const SolverConfig& solver,
                         std::vector<double>* tilts) {
  validate_polyline(ground_line, kModule, "lift_reference");
  Polyline3 out;
  out.points.reserve(ground_line.size());
  for (std::size_t i = 0; i < ground_line.size(); ++i) {
    const std::size_t a = i + 1 < ground_line.size() ? i : i - 1;
    const Vec2 delta = ground_line.points[a + 1].xy() - ground_line.points[a].xy();
    const Vec2 lateral = lateral_direction(std::atan2(delta.y, delta.x), solver.side);
    const LiftedPoint lifted =
        lift_from_ground(ground_line.points[i].xy(), lateral, terrain, vehicle, "lift_reference", i);
    out.points.push_back(lifted.point);
    if (tilts) tilts->push_back(lifted.tilt);
  }
  return out;
}

Polyline3 extend_lane(const Polyline3& lane, const UniformGrid& terrain, const Bounds& target,
                      double step) {
  if (lane.size() < 2) return lane;
  auto extension = [&](Vec3 end, Vec3 inner) {
    std::vector<Vec3> added;
    const Vec2 d = end.xy() - inner.xy();
    const double len = norm(d);
    if (!(len > 0.0)) return added;
    const Vec2 dir = (1.0 / len) * d;
    const double reach = std::min(ray_exit_distance(end.xy(), dir, target),
                                  ray_exit_distance(end.xy(), dir, terrain.bounds()) *
                                      (1.0 - 1e-12));
    if (!(reach > 1e-9)) return added;
    const double above = end.z - terrain.elevation(end.xy());
    const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(reach / step)));
    for (std::size_t k = 1; k <= count; ++k) {
      const Vec2 q = end.xy() + (reach * static_cast<double>(k) / static_cast<double>(count)) * dir;
      added.push_back({q.x, q.y, terrain.elevation(q) + above});
    }
    return added;
  };

  const auto head = extension(lane.points.front(), lane.points[1]);
  const auto tail = extension(lane.points.back(), lane.points[lane.size() - 2]);
  Polyline3 out;
  out.points.reserve(head.size() + lane.size() + tail.size());
  out.points.insert(out.points.end(), head.rbegin(), head.rend());
  out.points.insert(out.points.end(), lane.points.begin(), lane.points.end());
  out.points.insert(out.points.end(), tail.begin(), tail.end());
  return out;
}

bool PlanLane::has_excessive_roll() const {
  return std::any_of(points.begin(), points.end(),
                     [](const LanePointResult& p) { return p.excessive_roll; });
}

std::size_t PlanLane::converged_count() const {
  return static_cast<std::size_t>(std::count_if(
      points.begin(), points.end(), [](const LanePointResult& p) { return p.converged; }));
}

std::vector<PlanLane> cascade_lanes(const Polyline3& seed, const UniformGrid& terrain,
                                    const FieldContour& field, const VehicleConfig& vehicle,
                                    const SolverConfig& solver, std::size_t max_lanes) {
  vehicle.validate();
  solver.validate();
  validate_polyline(seed, kModule, "cascade_lanes");
  if (std::none_of(seed.points.begin(), seed.points.end(),
                   [&](const Vec3& p) { return contains(field, p.xy()); })) {
    throw Error(ErrorKind::validation, kModule, "cascade_lanes", "seed outside field");
  }
  const double spacing =
      min_tangential_spacing(vehicle.working_width, solver.max_heading_change);
  const Bounds target = field.bounds().expanded(std::max(spacing, terrain.spacing()));

  std::vector<PlanLane> lanes;
  Polyline3 reference = resample_at_spacing(extend_lane(seed, terrain, target, spacing), spacing);
  while (lanes.size() < max_lanes) {
    const AdjacentLane next = adjacent_lane(reference, terrain, vehicle, solver);
    if (next.lane.size() < 2) break;
    const Polyline3 extended = extend_lane(next.lane, terrain, target, spacing);
    PlanLane lane;
    lane.pieces = clip_lane(extended, field);
    if (lane.pieces.empty()) break;
    for (const auto& p : next.points) {
      if (!p.exits_extent && contains(field, p.position.xy())) lane.points.push_back(p);
    }
    lanes.push_back(std::move(lane));
    reference = resample_at_spacing(extended, spacing);
  }
  return lanes;
}

Plan plan_field(const FieldContour& contour, const UniformGrid& terrain,
                const VehicleConfig& vehicle, const SolverConfig& solver,
                const PlanOptions& options) {
  vehicle.validate();
  solver.validate();
  const double w = vehicle.working_width;
  const double spacing = min_tangential_spacing(w, solver.max_heading_change);

  Plan plan{mainfield_contour(contour, options.headland), {}, {}};
  plan.headland = headland_paths(contour, options.headland, terrain, vehicle.boom_height);

  SeedLine seed = select_seed_line(plan.mainfield, 0.5 * w, options.seed_edge);
  if (solver.side == OffsetSide::right) std::swap(seed.start, seed.end);
  const Vec2 dir = (1.0 / distance(seed.start, seed.end)) * (seed.end - seed.start);

  // Seed line running from target edge to target edge, on the ground.
  const Bounds target = plan.mainfield.bounds().expanded(std::max(spacing, terrain.spacing()));
  Bounds reach_box = target;
  const Bounds& tb = terrain.bounds();
  reach_box = {std::max(reach_box.min_x, tb.min_x), std::max(reach_box.min_y, tb.min_y),
               std::min(reach_box.max_x, tb.max_x), std::min(reach_box.max_y, tb.max_y)};
  const Vec2 from = seed.start - ray_exit_distance(seed.start, -1.0 * dir, reach_box) * dir;
  const Vec2 to = seed.end + ray_exit_distance(seed.end, dir, reach_box) * dir;
  const double length = distance(from, to);
  const auto count =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(length / spacing)));
  std::vector<Vec2> line2d;
  for (std::size_t k = 0; k <= count; ++k) {
    line2d.push_back(from + (static_cast<double>(k) / static_cast<double>(count)) * (to - from));
  }
  std::vector<double> tilts;
  const Polyline3 seed_lane =
      lift_reference(project_vertical(line2d, terrain, 0.0), terrain, vehicle, solver, &tilts);

  PlanLane first;
  first.pieces = clip_lane(seed_lane, plan.mainfield);
  if (first.pieces.empty()) {
    throw Error(ErrorKind::planning, kModule, "plan_field", "seed lane outside the mainfield");
  }
  for (std::size_t i = 0; i < seed_lane.size(); ++i) {
    const Vec3& p = seed_lane.points[i];
    if (!contains(plan.mainfield, p.xy())) continue;
    LanePointResult r;
    r.position = p;
    r.lifted_reference = p;
    r.effective_offset = w;
    r.achieved_height = std::abs((p.z - terrain.elevation(p.xy())) * std::cos(tilts[i]));
    r.converged = true;
    r.segment = i;
    first.points.push_back(r);
  }
  plan.lanes.push_back(std::move(first));

  if (options.max_lanes > 1) {
    auto rest = cascade_lanes(seed_lane, terrain, plan.mainfield, vehicle, solver,
                              options.max_lanes - 1);
    for (auto& lane : rest) plan.lanes.push_back(std::move(lane));
  }
  return plan;
}

}  // namespace terracover
