#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "terracover/geometry.hpp"

namespace terracover {

/// Scattered elevation sample in a local metric plane (meters).
struct SamplePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct GridBuildParams {
  double grid_spacing = 1.0;      // node spacing in x and y
  std::size_t idw_neighbors = 4;  // samples blended per node (Q_IDW + 1)

  void validate() const;
};

/// One k-nearest result. `index` is the sample's ingestion position.
struct Neighbor {
  SamplePoint sample;
  double distance = 0.0;
  std::size_t index = 0;
};

/// Static 2D kd-tree over sample x-y positions.
///
/// Query results are exact and deterministic: ordered by Euclidean distance,
/// ties broken by the lower ingestion index, so they match a brute-force scan
/// element for element.
class SpatialIndex {
 public:
  explicit SpatialIndex(std::vector<SamplePoint> samples);

  std::vector<Neighbor> knn(Vec2 query, std::size_t k) const;

  std::size_t size() const { return samples_.size(); }
  const std::vector<SamplePoint>& samples() const { return samples_; }

 private:
  struct Node {
    std::size_t begin = 0;  // range into order_
    std::size_t end = 0;
    std::size_t left = 0;  // child node ids, 0 = leaf
    std::size_t right = 0;
    int axis = 0;
    double split = 0.0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  std::vector<SamplePoint> samples_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Free-function form of SpatialIndex::knn.
std::vector<Neighbor> knn(const SpatialIndex& index, Vec2 query, std::size_t k);

/// Inverse-distance weighted elevation with weights 1/d. A neighbor at distance
/// zero short-circuits to its own elevation.
double idw_elevation(std::span<const Neighbor> neighbors);

/// Uniform elevation lattice with bilinear evaluation. Immutable once built;
/// node (i, j) sits at (x0 + i*spacing, y0 + j*spacing) and is stored row-major
/// (rows along y).
class UniformGrid {
 public:
  UniformGrid(double x0, double y0, double spacing, std::size_t nx, std::size_t ny,
              std::vector<double> elevations);

  double x0() const { return x0_; }
  double y0() const { return y0_; }
  double spacing() const { return spacing_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  const std::vector<double>& elevations() const { return elevations_; }
  const Bounds& bounds() const { return bounds_; }

  double node_x(std::size_t i) const { return x0_ + static_cast<double>(i) * spacing_; }
  double node_y(std::size_t j) const { return y0_ + static_cast<double>(j) * spacing_; }
  double at(std::size_t i, std::size_t j) const { return elevations_[j * nx_ + i]; }

  bool contains(Vec2 p) const;

  /// Bilinear elevation; throws Error(out_of_extent) outside the grid.
  double elevation(double x, double y) const;
  double elevation(Vec2 p) const { return elevation(p.x, p.y); }

 private:
  double x0_;
  double y0_;
  double spacing_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<double> elevations_;
  Bounds bounds_;
};

/// Removes samples whose (x, y) repeats an earlier sample. The first occurrence
/// wins.
struct DedupResult {
  std::vector<SamplePoint> samples;
  std::size_t dropped = 0;      // all repeated positions
  std::size_t conflicting = 0;  // repeated positions with a different z
};
DedupResult deduplicate_samples(std::span<const SamplePoint> samples);

struct GridBuildReport {
  std::size_t input_samples = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t conflicting_duplicates = 0;
};

/// Grids scattered samples with k-nearest IDW. The grid covers the sample
/// bounding box expanded outward to whole multiples of the spacing.
UniformGrid build_uniform_grid(std::span<const SamplePoint> samples,
                               const GridBuildParams& params,
                               GridBuildReport* report = nullptr);

/// Bilinear interpolation in the grid cell containing (x, y).
double eval_bilinear(const UniformGrid& grid, double x, double y);

}  // namespace terracover
