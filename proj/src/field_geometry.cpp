#include "terracover/field_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "terracover/error.hpp"

namespace terracover {

namespace {

constexpr const char* kModule = "field_geometry";

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, /*clockwise=*/false>;
using BMultiPolygon = bg::model::multi_polygon<BPolygon>;

double scale_of(const std::vector<Vec2>& ring) {
  double s = 0.0;
  for (const auto& v : ring) s = std::max({s, std::abs(v.x), std::abs(v.y)});
  return std::max(s, 1.0);
}

bool on_segment(Vec2 p, Vec2 a, Vec2 b, double tol) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a) <= tol;
  if (std::abs(cross(ab, p - a)) > tol * std::sqrt(len2)) return false;
  const double t = dot(p - a, ab);
  return t >= -tol * std::sqrt(len2) && t <= len2 + tol * std::sqrt(len2);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return (d1 == 0 && on_segment(c, a, b, 0)) || (d2 == 0 && on_segment(d, a, b, 0)) ||
         (d3 == 0 && on_segment(a, c, d, 0)) || (d4 == 0 && on_segment(b, c, d, 0));
}

// Parameters t along origin + t*dir where the line meets edge c-d.
void line_edge_params(Vec2 origin, Vec2 dir, Vec2 c, Vec2 d, std::vector<double>& out) {
  const Vec2 e = d - c;
  const double denom = cross(dir, e);
  const double scale = norm(dir) * norm(e);
  if (std::abs(denom) <= 1e-14 * scale) {
    // Parallel: only a collinear overlap contributes, through its endpoints.
    if (std::abs(cross(dir, c - origin)) <= 1e-12 * norm(dir) * std::max(1.0, norm(c - origin))) {
      const double dd = dot(dir, dir);
      out.push_back(dot(c - origin, dir) / dd);
      out.push_back(dot(d - origin, dir) / dd);
    }
    return;
  }
  const double s = cross(origin - c, dir) / cross(e, dir);
  if (s < -1e-12 || s > 1.0 + 1e-12) return;
  out.push_back(cross(c - origin, e) / denom);
}

FieldContour from_boost(const BPolygon& poly) {
  std::vector<Vec2> ring;
  for (const auto& p : poly.outer()) ring.push_back({p.x(), p.y()});
  return FieldContour::from_ring(std::move(ring));
}

}  // namespace

double signed_area(std::span<const Vec2> ring) {
  double a = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    a += cross(ring[i], ring[(i + 1) % ring.size()]);
  }
  return 0.5 * a;
}

FieldContour FieldContour::from_ring(std::vector<Vec2> ring) {
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (!std::isfinite(ring[i].x) || !std::isfinite(ring[i].y)) {
      throw Error(ErrorKind::validation, kModule, "FieldContour", "non-finite vertex", i);
    }
  }
  std::vector<Vec2> clean;
  for (const auto& v : ring) {
    if (clean.empty() || !(clean.back() == v)) clean.push_back(v);
  }
  while (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
  if (clean.size() < 3) {
    throw Error(ErrorKind::validation, kModule, "FieldContour",
                "contour needs at least 3 distinct vertices");
  }
  const double area = signed_area(clean);
  const double s = scale_of(clean);
  if (std::abs(area) <= 1e-12 * s * s) {
    throw Error(ErrorKind::validation, kModule, "FieldContour", "contour has zero area");
  }
  const std::size_t n = clean.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(clean[i], clean[(i + 1) % n], clean[j], clean[(j + 1) % n])) {
        throw Error(ErrorKind::validation, kModule, "FieldContour",
                    "contour is not simple (self-intersection)", i);
      }
    }
  }
  if (area < 0) std::reverse(clean.begin(), clean.end());
  return FieldContour(std::move(clean));
}

double FieldContour::area() const { return signed_area(vertices_); }

double FieldContour::perimeter() const {
  double p = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) p += distance(vertex(i), vertex(i + 1));
  return p;
}

Bounds FieldContour::bounds() const {
  Bounds b{vertices_[0].x, vertices_[0].y, vertices_[0].x, vertices_[0].y};
  for (const auto& v : vertices_) {
    b.min_x = std::min(b.min_x, v.x);
    b.min_y = std::min(b.min_y, v.y);
    b.max_x = std::max(b.max_x, v.x);
    b.max_y = std::max(b.max_y, v.y);
  }
  return b;
}

bool contains(const FieldContour& contour, Vec2 point) {
  const auto& v = contour.vertices();
  const double tol = 1e-9 * scale_of(v);
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(point, v[i], v[(i + 1) % n], tol)) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y > point.y) != (v[j].y > point.y)) {
      const double x = v[j].x + (point.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (point.x < x) inside = !inside;
    }
  }
  return inside;
}

FieldContour inward_offset(const FieldContour& contour, double distance) {
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw Error(ErrorKind::validation, kModule, "inward_offset",
                "offset distance must be non-negative");
  }
  if (distance == 0.0) return contour;

  BPolygon poly;
  for (const auto& v : contour.vertices()) bg::append(poly.outer(), BPoint(v.x, v.y));
  bg::append(poly.outer(), BPoint(contour.vertex(0).x, contour.vertex(0).y));

  BMultiPolygon result;
  bg::strategy::buffer::distance_symmetric<double> offset(-distance);
  bg::strategy::buffer::join_miter join(4.0);
  bg::strategy::buffer::end_flat end;
  bg::strategy::buffer::point_circle circle(8);
  bg::strategy::buffer::side_straight side;
  bg::buffer(poly, result, offset, side, join, end, circle);

  const BPolygon* best = nullptr;
  double best_area = 0.0;
  for (const auto& part : result) {
    const double a = std::abs(bg::area(part));
    if (a > best_area) {
      best_area = a;
      best = &part;
    }
  }
  if (best == nullptr || best_area <= 1e-9) {
    throw Error(ErrorKind::validation, kModule, "inward_offset", "offset exceeds inradius");
  }
  return from_boost(*best);
}

std::vector<Polyline3> clip_lane(const Polyline3& lane, const FieldContour& contour) {
  std::vector<Polyline3> pieces;
  Polyline3 current;
  auto flush = [&] {
    if (current.size() >= 2 && current.planar_length() > 1e-12) pieces.push_back(current);
    current.points.clear();
  };
  auto push = [&](const Vec3& p) {
    if (current.empty() || !(current.points.back().xy() == p.xy())) current.points.push_back(p);
  };

  const auto& v = contour.vertices();
  const std::size_t n = v.size();
  if (lane.size() == 1) {
    return {};
  }
  for (std::size_t i = 0; i + 1 < lane.size(); ++i) {
    const Vec3 a = lane.points[i];
    const Vec3 b = lane.points[i + 1];
    const Vec2 dir = b.xy() - a.xy();
    std::vector<double> ts{0.0, 1.0};
    if (norm(dir) > 0) {
      for (std::size_t e = 0; e < n; ++e) line_edge_params(a.xy(), dir, v[e], v[(e + 1) % n], ts);
    }
    std::erase_if(ts, [](double t) { return t < 0.0 || t > 1.0; });
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(), [](double p, double q) { return q - p < 1e-12; }),
             ts.end());
    if (ts.back() < 1.0) ts.back() = 1.0;

    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double mid = 0.5 * (ts[k] + ts[k + 1]);
      if (contains(contour, lerp(a, b, mid).xy())) {
        push(lerp(a, b, ts[k]));
        push(ts[k + 1] == 1.0 ? b : lerp(a, b, ts[k + 1]));
      } else {
        flush();
      }
    }
  }
  flush();
  return pieces;
}

Polyline3 project_vertical(std::span<const Vec2> path, const UniformGrid& terrain, double lift) {
  Polyline3 out;
  out.points.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!terrain.contains(path[i])) {
      throw Error(ErrorKind::out_of_extent, kModule, "project_vertical",
                  "path point outside terrain extent", i);
    }
    out.points.push_back({path[i].x, path[i].y, terrain.elevation(path[i]) + lift});
  }
  return out;
}

FieldContour mainfield_contour(const FieldContour& contour, const HeadlandSpec& spec) {
  if (spec.passes == 0) return contour;
  return inward_offset(contour, static_cast<double>(spec.passes) * spec.pass_width);
}

std::vector<Polyline3> headland_paths(const FieldContour& contour, const HeadlandSpec& spec,
                                      const UniformGrid& terrain, double lift) {
  std::vector<Polyline3> out;
  for (std::size_t p = 0; p < spec.passes; ++p) {
    const FieldContour ring =
        inward_offset(contour, (static_cast<double>(p) + 0.5) * spec.pass_width);
    std::vector<Vec2> path;
    const double step = terrain.spacing();
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec2 a = ring.vertex(i);
      const Vec2 b = ring.vertex(i + 1);
      const auto pieces = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(distance(a, b) / step)));
      for (std::size_t k = 0; k < pieces; ++k) {
        path.push_back(a + (static_cast<double>(k) / static_cast<double>(pieces)) * (b - a));
      }
    }
    path.push_back(ring.vertex(0));
    out.push_back(project_vertical(path, terrain, lift));
  }
  return out;
}

std::vector<std::pair<double, double>> line_inside_intervals(const FieldContour& contour,
                                                             Vec2 origin, Vec2 dir) {
  const auto& v = contour.vertices();
  std::vector<double> ts;
  for (std::size_t e = 0; e < v.size(); ++e) {
    line_edge_params(origin, dir, v[e], v[(e + 1) % v.size()], ts);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(), [](double p, double q) { return q - p < 1e-12; }),
           ts.end());

  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double mid = 0.5 * (ts[k] + ts[k + 1]);
    if (!contains(contour, origin + mid * dir)) continue;
    if (!out.empty() && out.back().second == ts[k]) {
      out.back().second = ts[k + 1];
    } else {
      out.emplace_back(ts[k], ts[k + 1]);
    }
  }
  return out;
}

SeedLine select_seed_line(const FieldContour& contour, double offset,
                          std::optional<std::size_t> edge) {
  const std::size_t n = contour.size();
  std::size_t chosen = 0;
  if (edge) {
    if (*edge >= n) {
      throw Error(ErrorKind::validation, kModule, "select_seed_line",
                  "seed edge index out of range", *edge);
    }
    chosen = *edge;
  } else {
    double longest = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double len = distance(contour.vertex(i), contour.vertex(i + 1));
      if (len > longest) {
        longest = len;
        chosen = i;
      }
    }
  }
  const Vec2 a = contour.vertex(chosen);
  const Vec2 b = contour.vertex(chosen + 1);
  const Vec2 u = (1.0 / distance(a, b)) * (b - a);
  const Vec2 inward{-u.y, u.x};  // left of a counter-clockwise edge
  const Vec2 origin = a + offset * inward;

  const auto intervals = line_inside_intervals(contour, origin, u);
  const std::pair<double, double>* best = nullptr;
  for (const auto& iv : intervals) {
    if (best == nullptr || iv.second - iv.first > best->second - best->first) best = &iv;
  }
  if (best == nullptr || best->second - best->first <= 0.0) {
    throw Error(ErrorKind::validation, kModule, "select_seed_line",
                "seed offset leaves the field", chosen);
  }
  return {origin + best->first * u, origin + best->second * u, inward, chosen};
}

}  // namespace terracover
