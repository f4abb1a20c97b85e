#include "terracover/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "parallel.hpp"
#include "terracover/error.hpp"

namespace terracover {

namespace {

constexpr const char* kModule = "terrain_model";
constexpr std::size_t kLeafSize = 8;

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

double squared_distance(const SamplePoint& s, Vec2 q) {
  const double dx = s.x - q.x;
  const double dy = s.y - q.y;
  return dx * dx + dy * dy;
}

}  // namespace

void GridBuildParams::validate() const {
  if (!(grid_spacing > 0.0) || !std::isfinite(grid_spacing)) {
    throw Error(ErrorKind::validation, kModule, "build_uniform_grid",
                "grid spacing must be positive");
  }
  if (idw_neighbors < 1) {
    throw Error(ErrorKind::validation, kModule, "build_uniform_grid",
                "idw_neighbors must be at least 1");
  }
}

// ---------------------------------------------------------------------------
// SpatialIndex

SpatialIndex::SpatialIndex(std::vector<SamplePoint> samples) : samples_(std::move(samples)) {
  order_.resize(samples_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!samples_.empty()) {
    nodes_.reserve(2 * samples_.size() / kLeafSize + 2);
    build(0, samples_.size());
  }
}

std::size_t SpatialIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  double min_x = samples_[order_[begin]].x, max_x = min_x;
  double min_y = samples_[order_[begin]].y, max_y = min_y;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& s = samples_[order_[i]];
    min_x = std::min(min_x, s.x);
    max_x = std::max(max_x, s.x);
    min_y = std::min(min_y, s.y);
    max_y = std::max(max_y, s.y);
  }
  const int axis = (max_x - min_x) >= (max_y - min_y) ? 0 : 1;
  auto coord = [&](std::size_t idx) { return axis == 0 ? samples_[idx].x : samples_[idx].y; };

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     return coord(a) < coord(b) || (coord(a) == coord(b) && a < b);
                   });
  const double split = coord(order_[mid]);
  // Left holds coordinates <= split, right >= split.
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> SpatialIndex::knn(Vec2 query, std::size_t k) const {
  if (samples_.empty()) {
    throw Error(ErrorKind::validation, kModule, "knn", "no terrain data");
  }
  if (k < 1 || k > samples_.size()) {
    throw Error(ErrorKind::validation, kModule, "knn",
                "k must lie between 1 and the sample count");
  }

  std::vector<Candidate> heap;  // max-heap on (d2, index)
  heap.reserve(k + 1);
  auto offer = [&](std::size_t idx) {
    const Candidate c{squared_distance(samples_[idx], query), idx};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  };

  auto visit = [&](auto&& self, std::size_t id) -> void {
    const Node& node = nodes_[id];
    if (node.left == 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) offer(order_[i]);
      return;
    }
    const double q = node.axis == 0 ? query.x : query.y;
    const double delta = q - node.split;
    const std::size_t near = delta <= 0 ? node.left : node.right;
    const std::size_t far = delta <= 0 ? node.right : node.left;
    self(self, near);
    // Equal plane distance is still visited so index tie-breaks stay exact.
    if (heap.size() < k || delta * delta <= heap.front().d2) self(self, far);
  };
  visit(visit, 0);

  std::sort_heap(heap.begin(), heap.end());
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& c : heap) out.push_back({samples_[c.index], std::sqrt(c.d2), c.index});
  return out;
}

std::vector<Neighbor> knn(const SpatialIndex& index, Vec2 query, std::size_t k) {
  return index.knn(query, k);
}

double idw_elevation(std::span<const Neighbor> neighbors) {
  if (neighbors.empty()) {
    throw Error(ErrorKind::validation, kModule, "idw_elevation", "empty neighbor list");
  }
  for (const auto& n : neighbors) {
    if (n.distance == 0.0) return n.sample.z;
  }
  double weighted = 0.0;
  double weights = 0.0;
  for (const auto& n : neighbors) {
    const double eta = 1.0 / n.distance;
    weighted += eta * n.sample.z;
    weights += eta;
  }
  return weighted / weights;
}

// ---------------------------------------------------------------------------
// UniformGrid

UniformGrid::UniformGrid(double x0, double y0, double spacing, std::size_t nx,
                         std::size_t ny, std::vector<double> elevations)
    : x0_(x0), y0_(y0), spacing_(spacing), nx_(nx), ny_(ny), elevations_(std::move(elevations)) {
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_) || !std::isfinite(x0_) ||
      !std::isfinite(y0_)) {
    throw Error(ErrorKind::validation, kModule, "UniformGrid", "invalid grid geometry");
  }
  if (nx_ < 2 || ny_ < 2) {
    throw Error(ErrorKind::validation, kModule, "UniformGrid",
                "grid needs at least 2x2 nodes");
  }
  if (elevations_.size() != nx_ * ny_) {
    throw Error(ErrorKind::validation, kModule, "UniformGrid",
                "elevation count does not match nx*ny");
  }
  for (std::size_t i = 0; i < elevations_.size(); ++i) {
    if (!std::isfinite(elevations_[i])) {
      throw Error(ErrorKind::validation, kModule, "UniformGrid", "non-finite elevation", i);
    }
  }
  bounds_ = {x0_, y0_, node_x(nx_ - 1), node_y(ny_ - 1)};
}

bool UniformGrid::contains(Vec2 p) const {
  return bounds_.contains(p, 1e-9 * spacing_);
}

double UniformGrid::elevation(double x, double y) const {
  if (!contains({x, y})) {
    throw Error(ErrorKind::out_of_extent, kModule, "eval_bilinear",
                "query outside terrain extent");
  }
  x = std::clamp(x, bounds_.min_x, bounds_.max_x);
  y = std::clamp(y, bounds_.min_y, bounds_.max_y);

  const auto cell = [this](double offset, std::size_t n) {
    const double f = std::floor(offset / spacing_);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(n - 2)));
  };
  const std::size_t i = cell(x - x0_, nx_);
  const std::size_t j = cell(y - y0_, ny_);
  const double xl = node_x(i);
  const double xu = node_x(i + 1);
  const double yl = node_y(j);
  const double yu = node_y(j + 1);

  // Weights are formed before multiplying so that nodes come back bit-exact.
  const double wxl = (xu - x) / (xu - xl);
  const double wxu = (x - xl) / (xu - xl);
  const double wyl = (yu - y) / (yu - yl);
  const double wyu = (y - yl) / (yu - yl);
  const double f_yl = wxl * at(i, j) + wxu * at(i + 1, j);
  const double f_yu = wxl * at(i, j + 1) + wxu * at(i + 1, j + 1);
  return wyl * f_yl + wyu * f_yu;
}

double eval_bilinear(const UniformGrid& grid, double x, double y) {
  return grid.elevation(x, y);
}

// ---------------------------------------------------------------------------
// Grid construction

DedupResult deduplicate_samples(std::span<const SamplePoint> samples) {
  DedupResult out;
  out.samples.reserve(samples.size());
  std::map<std::pair<double, double>, double> seen;
  for (const auto& s : samples) {
    auto [it, inserted] = seen.emplace(std::make_pair(s.x, s.y), s.z);
    if (inserted) {
      out.samples.push_back(s);
    } else {
      ++out.dropped;
      if (it->second != s.z) ++out.conflicting;
    }
  }
  return out;
}

namespace {

void check_extent(const std::vector<SamplePoint>& samples, Bounds& box) {
  box = {samples[0].x, samples[0].y, samples[0].x, samples[0].y};
  for (const auto& s : samples) {
    box.min_x = std::min(box.min_x, s.x);
    box.max_x = std::max(box.max_x, s.x);
    box.min_y = std::min(box.min_y, s.y);
    box.max_y = std::max(box.max_y, s.y);
  }
  const char* msg = "degenerate sample extent (collinear or single point)";
  if (!(box.width() > 0.0) || !(box.height() > 0.0)) {
    throw Error(ErrorKind::validation, kModule, "build_uniform_grid", msg);
  }
  // Collinear along a diagonal: every sample on the line through the two
  // mutually farthest candidates.
  const Vec2 a{samples[0].x, samples[0].y};
  Vec2 b = a;
  double best = 0.0;
  for (const auto& s : samples) {
    const double d = distance(a, {s.x, s.y});
    if (d > best) {
      best = d;
      b = {s.x, s.y};
    }
  }
  const Vec2 dir = b - a;
  const double len = norm(dir);
  const double tol = 1e-9 * std::max(box.width(), box.height());
  for (const auto& s : samples) {
    if (std::abs(cross(dir, Vec2{s.x, s.y} - a)) / len > tol) return;
  }
  throw Error(ErrorKind::validation, kModule, "build_uniform_grid", msg);
}

}  // namespace

UniformGrid build_uniform_grid(std::span<const SamplePoint> samples,
                               const GridBuildParams& params, GridBuildReport* report) {
  params.validate();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z)) {
      throw Error(ErrorKind::validation, kModule, "build_uniform_grid",
                  "non-finite sample coordinate", i);
    }
  }
  DedupResult dedup = deduplicate_samples(samples);
  if (report) {
    report->input_samples = samples.size();
    report->duplicates_dropped = dedup.dropped;
    report->conflicting_duplicates = dedup.conflicting;
  }
  if (dedup.samples.empty()) {
    throw Error(ErrorKind::validation, kModule, "build_uniform_grid", "no terrain data");
  }
  if (dedup.samples.size() < params.idw_neighbors) {
    throw Error(ErrorKind::validation, kModule, "build_uniform_grid",
                "fewer samples than idw_neighbors");
  }
  Bounds box;
  check_extent(dedup.samples, box);

  const double g = params.grid_spacing;
  double x0 = std::floor(box.min_x / g) * g;
  double y0 = std::floor(box.min_y / g) * g;
  if (x0 > box.min_x) x0 -= g;
  if (y0 > box.min_y) y0 -= g;
  auto count = [g](double origin, double max) {
    auto n = static_cast<std::size_t>(std::llround(std::ceil((max - origin) / g))) + 1;
    while (origin + static_cast<double>(n - 1) * g < max) ++n;
    return std::max<std::size_t>(n, 2);
  };
  const std::size_t nx = count(x0, box.max_x);
  const std::size_t ny = count(y0, box.max_y);

  const SpatialIndex index(std::move(dedup.samples));
  std::vector<double> elevations(nx * ny);
  detail::parallel_for(ny, [&](std::size_t j) {
    const double y = y0 + static_cast<double>(j) * g;
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = x0 + static_cast<double>(i) * g;
      const auto neighbors = index.knn({x, y}, params.idw_neighbors);
      elevations[j * nx + i] = idw_elevation(neighbors);
    }
  }, 4);
  return UniformGrid(x0, y0, g, nx, ny, std::move(elevations));
}

}  // namespace terracover
