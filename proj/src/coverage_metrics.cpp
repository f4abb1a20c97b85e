#include "terracover/coverage_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "terracover/error.hpp"

namespace terracover {

namespace {

constexpr const char* kModule = "coverage_metrics";
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec2 left_normal(Vec2 dir) { return {-dir.y, dir.x}; }

// Unit heading of `line` at vertex i: central difference inside, one-sided at
// the ends.
Vec2 vertex_direction(const Polyline3& line, std::size_t i) {
  const std::size_t a = i == 0 ? 0 : i - 1;
  const std::size_t b = std::min(i + 1, line.size() - 1);
  const Vec2 d = line.points[b].xy() - line.points[a].xy();
  return (1.0 / norm(d)) * d;
}

struct Hit {
  Vec3 point;
  double t = kInf;
};

// Closest crossing of the line origin + t*dir with any segment of `lanes`.
// One-sided searches only accept t > 0.
Hit nearest_crossing(Vec2 origin, Vec2 dir, const std::vector<Polyline3>& lanes,
                     bool one_sided) {
  Hit best;
  for (const auto& lane : lanes) {
    for (std::size_t i = 0; i + 1 < lane.size(); ++i) {
      const Vec3& c = lane.points[i];
      const Vec3& d = lane.points[i + 1];
      const Vec2 e = d.xy() - c.xy();
      const double denom = cross(dir, e);
      if (std::abs(denom) < 1e-12 * norm(e)) continue;
      const Vec2 oc = c.xy() - origin;
      const double t = cross(oc, e) / denom;
      const double u = cross(oc, dir) / denom;
      if (u < -1e-12 || u > 1.0 + 1e-12) continue;
      if (one_sided && t <= 1e-9) continue;
      if (std::abs(t) < std::abs(best.t)) best = {lerp(c, d, std::clamp(u, 0.0, 1.0)), t};
    }
  }
  return best;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

double point_lane_distance(Vec2 p, const std::vector<Polyline3>& pieces) {
  double best = kInf;
  for (const auto& piece : pieces) {
    if (piece.size() == 1) best = std::min(best, distance(p, piece.points[0].xy()));
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      best = std::min(best, point_segment_distance(p, piece.points[i].xy(),
                                                   piece.points[i + 1].xy()));
    }
  }
  return best;
}

double directed_hausdorff(const std::vector<Polyline3>& from, const std::vector<Polyline3>& to) {
  double worst = 0.0;
  for (const auto& piece : from) {
    for (const auto& p : piece.points) worst = std::max(worst, point_lane_distance(p.xy(), to));
  }
  return worst;
}

// Terrain arc between two map points, sampled at half the grid spacing.
double ground_arc(Vec2 a, Vec2 b, const UniformGrid& terrain) {
  const double len = distance(a, b);
  const auto steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(len / (0.5 * terrain.spacing()))));
  double arc = 0.0;
  Vec3 prev{a.x, a.y, terrain.elevation(a)};
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vec2 q = a + (static_cast<double>(k) / static_cast<double>(steps)) * (b - a);
    const Vec3 cur{q.x, q.y, terrain.elevation(q)};
    arc += distance(prev, cur);
    prev = cur;
  }
  return arc;
}

bool inside_polygon(const std::array<Vec2, 4>& poly, Vec2 p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

// Map-plane ends of the two boom halves at one lane point.
struct BoomEnds {
  Vec2 left;
  Vec2 right;
};

BoomEnds boom_ends(const Polyline3& piece, std::size_t i, const std::vector<Polyline3>& neighbors,
                   const UniformGrid& terrain, double half) {
  const Vec3 p = piece.points[i];
  const Vec2 n = left_normal(vertex_direction(piece, i));
  auto chord = [&](double s) -> std::optional<Vec3> {
    const Hit hit = nearest_crossing(p.xy(), s * n, neighbors, true);
    if (!std::isfinite(hit.t)) return std::nullopt;
    const Vec3 d = hit.point - p;
    return (1.0 / norm(d)) * d;
  };
  std::optional<Vec3> l = chord(1.0);
  std::optional<Vec3> r = chord(-1.0);
  if (!l && r) l = -1.0 * *r;
  if (!r && l) r = -1.0 * *l;
  if (!l) {
    // No neighbor on either side: halves follow the ground slope.
    auto along_ground = [&](double s) {
      const Vec2 q = p.xy() + (s * half) * n;
      const double dz = terrain.contains(q) ? terrain.elevation(q) - terrain.elevation(p.xy()) : 0.0;
      const Vec3 d{s * half * n.x, s * half * n.y, dz};
      return (1.0 / norm(d)) * d;
    };
    l = along_ground(1.0);
    r = along_ground(-1.0);
  }
  return {p.xy() + half * l->xy(), p.xy() + half * r->xy()};
}

}  // namespace

Plan baseline_2d_plan(const FieldContour& contour, const UniformGrid& terrain,
                      const VehicleConfig& vehicle, const SolverConfig& solver,
                      const PlanOptions& options) {
  vehicle.validate();
  solver.validate();
  const double w = vehicle.working_width;
  const double h = vehicle.boom_height;
  const double a = vehicle.axle_half_width;
  const double spacing = min_tangential_spacing(w, solver.max_heading_change);

  Plan plan{mainfield_contour(contour, options.headland), {}, {}};
  plan.headland = headland_paths(contour, options.headland, terrain, h);

  SeedLine seed = select_seed_line(plan.mainfield, 0.5 * w, options.seed_edge);
  if (solver.side == OffsetSide::right) std::swap(seed.start, seed.end);
  const Vec2 dir = (1.0 / distance(seed.start, seed.end)) * (seed.end - seed.start);
  const Vec2 n = left_normal(dir);

  for (std::size_t k = 0; k < options.max_lanes; ++k) {
    const Vec2 origin = seed.start + (static_cast<double>(k) * w) * seed.normal;
    const auto intervals = line_inside_intervals(plan.mainfield, origin, dir);
    PlanLane lane;
    for (const auto& [t0, t1] : intervals) {
      const Vec2 from = origin + t0 * dir;
      const Vec2 to = origin + t1 * dir;
      const double len = t1 - t0;
      if (!(len > 0.0)) continue;
      const auto count =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(len / spacing)));
      std::vector<Vec2> path;
      for (std::size_t j = 0; j <= count; ++j) {
        path.push_back(from + (static_cast<double>(j) / static_cast<double>(count)) * (to - from));
      }
      Polyline3 piece = project_vertical(path, terrain, h);
      for (std::size_t j = 0; j < piece.size(); ++j) {
        const Vec3& p = piece.points[j];
        const Vec2 probe = p.xy() + a * n;
        const double f = terrain.elevation(p.xy());
        const double tilt =
            terrain.contains(probe) ? std::atan((f - terrain.elevation(probe)) / a) : 0.0;
        LanePointResult r;
        r.position = p;
        r.lifted_reference = p;
        r.effective_offset = w;
        r.achieved_height = h * std::cos(tilt);
        r.converged = true;
        r.segment = j;
        lane.points.push_back(r);
      }
      lane.pieces.push_back(std::move(piece));
    }
    if (lane.pieces.empty()) {
      if (k == 0) {
        throw Error(ErrorKind::planning, kModule, "baseline_2d_plan",
                    "seed lane outside the mainfield");
      }
      break;
    }
    plan.lanes.push_back(std::move(lane));
  }
  return plan;
}

std::vector<SpacingSample> ground_spacing_samples(const std::vector<Polyline3>& lane_a,
                                                  const std::vector<Polyline3>& lane_b,
                                                  const UniformGrid& terrain,
                                                  double sample_step, double boom_height) {
  if (!(sample_step > 0.0) || !std::isfinite(sample_step)) {
    throw Error(ErrorKind::validation, kModule, "ground_spacing_profile",
                "sample step must be positive");
  }
  if (!(boom_height > 0.0)) {
    throw Error(ErrorKind::validation, kModule, "ground_spacing_profile",
                "boom height must be positive");
  }
  const double radius = 3.0 * boom_height;
  const double step = 0.25 * terrain.spacing();

  std::vector<SpacingSample> out;
  for (const auto& piece : lane_a) {
    double carried = 0.0;  // arc position of the next sample within the segment
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      const Vec3 p = piece.points[i];
      const Vec3 q = piece.points[i + 1];
      const double len = distance(p.xy(), q.xy());
      if (!(len > 0.0)) continue;
      const Vec2 dir = (1.0 / len) * (q.xy() - p.xy());
      const Vec2 n = left_normal(dir);
      const bool last = i + 2 == piece.size();
      for (double s = carried; s < len || (last && s <= len + 1e-9); s += sample_step) {
        const Vec3 from = lerp(p, q, std::min(s / len, 1.0));
        const Hit hit = nearest_crossing(from.xy(), n, lane_b, false);
        if (!std::isfinite(hit.t)) continue;
        try {
          SpacingSample sample;
          sample.from = from;
          sample.to = hit.point;
          sample.foot_from = project_onto_terrain(from, terrain, radius, step).foot;
          sample.foot_to = project_onto_terrain(hit.point, terrain, radius, step).foot;
          sample.spacing = ground_arc(sample.foot_from.xy(), sample.foot_to.xy(), terrain);
          sample.chord_tilt =
              std::atan2(hit.point.z - from.z, distance(hit.point.xy(), from.xy()));
          out.push_back(sample);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::out_of_extent) throw;
        }
      }
      carried = std::fmod(carried - len, sample_step);
      if (carried < 0.0) carried += sample_step;
    }
  }
  return out;
}

std::vector<double> ground_spacing_profile(const std::vector<Polyline3>& lane_a,
                                           const std::vector<Polyline3>& lane_b,
                                           const UniformGrid& terrain, double sample_step,
                                           double boom_height) {
  std::vector<double> profile;
  for (const auto& s : ground_spacing_samples(lane_a, lane_b, terrain, sample_step, boom_height)) {
    profile.push_back(s.spacing);
  }
  return profile;
}

double lateral_deviation(const Plan& a, const Plan& b) {
  if (a.lanes.size() != b.lanes.size()) {
    throw Error(ErrorKind::validation, kModule, "lateral_deviation", "lane count mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.lanes.size(); ++k) {
    const auto& pa = a.lanes[k].pieces;
    const auto& pb = b.lanes[k].pieces;
    if (pa.empty() || pb.empty()) {
      throw Error(ErrorKind::validation, kModule, "lateral_deviation", "empty lane", k);
    }
    worst = std::max({worst, directed_hausdorff(pa, pb), directed_hausdorff(pb, pa)});
  }
  return worst;
}

GapOverlap gap_overlap_raster(const Plan& plan, const FieldContour& domain,
                              const UniformGrid& terrain, const VehicleConfig& vehicle,
                              double cell) {
  vehicle.validate();
  const double w = vehicle.working_width;
  if (!(cell > 0.0) || cell > 0.1 * w) {
    throw Error(ErrorKind::validation, kModule, "gap_overlap_raster",
                "raster cell must be in (0, w/10]");
  }
  GapOverlap out;
  const Bounds box = domain.bounds();
  out.raster_bounds = box;
  out.columns = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.width() / cell)));
  out.rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.height() / cell)));
  const std::size_t cells = out.columns * out.rows;
  out.coverage.assign(cells, 0);
  out.in_domain.assign(cells, 0);

  auto center = [&](std::size_t i, std::size_t j) {
    return Vec2{box.min_x + (static_cast<double>(i) + 0.5) * cell,
                box.min_y + (static_cast<double>(j) + 0.5) * cell};
  };
  for (std::size_t j = 0; j < out.rows; ++j) {
    for (std::size_t i = 0; i < out.columns; ++i) {
      if (contains(domain, center(i, j))) {
        out.in_domain[j * out.columns + i] = 1;
        ++out.domain_cells;
      }
    }
  }
  if (out.domain_cells == 0) return out;

  // Each lane marks a cell at most once, however many of its quads cover it.
  std::vector<std::uint32_t> stamp(cells, 0);
  auto cell_range = [&](double lo, double hi, double origin, std::size_t count) {
    const double a = std::floor((lo - origin) / cell - 0.5);
    const double b = std::ceil((hi - origin) / cell - 0.5);
    const auto first = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(count)));
    const auto last = static_cast<std::size_t>(std::clamp(b + 1.0, 0.0, static_cast<double>(count)));
    return std::pair{first, last};
  };

  const double half = 0.5 * w;
  for (std::size_t k = 0; k < plan.lanes.size(); ++k) {
    std::vector<Polyline3> neighbors;
    if (k > 0) neighbors.insert(neighbors.end(), plan.lanes[k - 1].pieces.begin(),
                                plan.lanes[k - 1].pieces.end());
    if (k + 1 < plan.lanes.size()) {
      neighbors.insert(neighbors.end(), plan.lanes[k + 1].pieces.begin(),
                       plan.lanes[k + 1].pieces.end());
    }
    const auto id = static_cast<std::uint32_t>(k + 1);
    for (const auto& piece : plan.lanes[k].pieces) {
      if (piece.size() < 2) continue;
      std::vector<BoomEnds> ends;
      ends.reserve(piece.size());
      for (std::size_t i = 0; i < piece.size(); ++i) {
        ends.push_back(boom_ends(piece, i, neighbors, terrain, half));
      }
      for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
        const std::array<Vec2, 4> quad{ends[i].right, ends[i + 1].right, ends[i + 1].left,
                                       ends[i].left};
        double x0 = kInf, y0 = kInf, x1 = -kInf, y1 = -kInf;
        for (const auto& v : quad) {
          x0 = std::min(x0, v.x);
          y0 = std::min(y0, v.y);
          x1 = std::max(x1, v.x);
          y1 = std::max(y1, v.y);
        }
        const auto [ci0, ci1] = cell_range(x0, x1, box.min_x, out.columns);
        const auto [cj0, cj1] = cell_range(y0, y1, box.min_y, out.rows);
        for (std::size_t j = cj0; j < cj1; ++j) {
          for (std::size_t i = ci0; i < ci1; ++i) {
            const std::size_t c = j * out.columns + i;
            if (stamp[c] == id || !inside_polygon(quad, center(i, j))) continue;
            stamp[c] = id;
            if (out.coverage[c] < std::numeric_limits<unsigned short>::max()) ++out.coverage[c];
          }
        }
      }
    }
  }

  std::size_t gaps = 0;
  std::size_t overlaps = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (!out.in_domain[c]) continue;
    if (out.coverage[c] == 0) ++gaps;
    if (out.coverage[c] >= 2) ++overlaps;
  }
  out.gap_fraction = static_cast<double>(gaps) / static_cast<double>(out.domain_cells);
  out.overlap_fraction = static_cast<double>(overlaps) / static_cast<double>(out.domain_cells);
  return out;
}

CoverageReport coverage_report(const Plan& plan, const UniformGrid& terrain,
                               const VehicleConfig& vehicle, const ReportOptions& options) {
  CoverageReport report;
  const double w = vehicle.working_width;
  for (std::size_t k = 0; k < plan.lanes.size(); ++k) {
    const auto& lane = plan.lanes[k];
    LaneStats s;
    s.lane = k;
    s.min_height = kInf;
    s.max_height = -kInf;
    for (const auto& p : lane.points) {
      if (p.exits_extent) continue;
      ++s.points;
      if (p.converged) ++s.converged;
      if (p.excessive_roll) ++s.excessive_roll;
      s.max_abs_roll = std::max(s.max_abs_roll, std::abs(p.roll));
      s.min_height = std::min(s.min_height, p.achieved_height);
      s.max_height = std::max(s.max_height, p.achieved_height);
    }
    if (s.points == 0) s.min_height = s.max_height = 0.0;
    report.lanes.push_back(s);
  }

  for (std::size_t k = 0; k + 1 < plan.lanes.size(); ++k) {
    const auto samples = ground_spacing_samples(plan.lanes[k].pieces, plan.lanes[k + 1].pieces,
                                                terrain, options.sample_step,
                                                vehicle.boom_height);
    LanePairStats s;
    s.lane = k;
    s.samples = samples.size();
    if (!samples.empty()) {
      s.min_spacing = kInf;
      double sum = 0.0;
      double tilt_sum = 0.0;
      for (const auto& x : samples) {
        s.profile.push_back(x.spacing);
        sum += x.spacing;
        s.min_spacing = std::min(s.min_spacing, x.spacing);
        s.max_spacing = std::max(s.max_spacing, x.spacing);
        s.max_spacing_error = std::max(s.max_spacing_error, std::abs(x.spacing - w));
        tilt_sum += std::abs(x.chord_tilt);
        s.max_tilt = std::max(s.max_tilt, std::abs(x.chord_tilt));
      }
      const auto count = static_cast<double>(samples.size());
      // Summation rounding can push a mean of equal values past its max.
      s.mean_spacing = std::clamp(sum / count, s.min_spacing, s.max_spacing);
      s.mean_tilt = std::min(tilt_sum / count, s.max_tilt);
    }
    report.max_spacing_error = std::max(report.max_spacing_error, s.max_spacing_error);
    report.pairs.push_back(std::move(s));
  }

  const GapOverlap go =
      gap_overlap_raster(plan, plan.mainfield, terrain, vehicle, options.raster_cell);
  report.gap_fraction = go.gap_fraction;
  report.overlap_fraction = go.overlap_fraction;
  return report;
}

}  // namespace terracover
