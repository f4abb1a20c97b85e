#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "terracover/coverage_metrics.hpp"
#include "terracover/field_geometry.hpp"
#include "terracover/lane_planner.hpp"
#include "terracover/terrain.hpp"

namespace terracover::io {

std::string read_text(const std::filesystem::path& path);

/// Terrain samples from CSV (`x,y,z`, header optional) or whitespace-separated
/// XYZ text. Blank lines and lines starting with '#' are skipped.
std::vector<SamplePoint> parse_terrain(std::string_view text);
std::vector<SamplePoint> read_terrain(const std::filesystem::path& path);

/// Grid cache: five `key,value` header rows (x0, y0, spacing, nx, ny) followed
/// by ny rows of nx node elevations, southmost row first.
std::string format_grid(const UniformGrid& grid);
UniformGrid parse_grid(std::string_view text);
bool looks_like_grid(std::string_view text);

/// Field boundary from a CSV `x,y` ring or a GeoJSON Polygon (a bare geometry,
/// a Feature, or the first polygon of a FeatureCollection).
FieldContour parse_contour(std::string_view text);
FieldContour read_contour(const std::filesystem::path& path);

/// Per-point planner diagnostics, one row per lane point.
std::string format_lanes_csv(const Plan& plan);

struct NamedPlan {
  std::string name;
  const Plan* plan = nullptr;
};
/// LineString features for every lane piece and headland ring.
std::string format_lanes_geojson(const std::vector<NamedPlan>& plans);

struct PlanReport {
  std::string name;
  const Plan* plan = nullptr;
  CoverageReport coverage;
};
/// JSON metrics document. `lateral_deviation` is included when present.
std::string format_report(const std::vector<PlanReport>& reports,
                          std::optional<double> lateral_deviation);

struct SvgLayer {
  const Plan* plan = nullptr;
  std::string color;
  bool dashed = false;
};
/// Bird's-view rendering of the contour, headland and lanes, with optional
/// gap (orange) and overlap (purple) shading from a coverage raster.
std::string render_svg(const FieldContour& contour, const std::vector<SvgLayer>& layers,
                       const GapOverlap* raster);

std::string sha256_hex(std::string_view data);

/// Flat `key = value` text; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Writes every file to a temporary sibling first and renames them into place
/// only after all writes succeeded.
void write_files_atomic(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

}  // namespace terracover::io
