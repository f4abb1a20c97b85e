#include "terracover/pipeline.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "json.hpp"

#include "terracover/io.hpp"

namespace terracover {

namespace {

constexpr const char* kModule = "cli_io";
constexpr const char* kVersion = "0.1.0";
using nlohmann::ordered_json;

// Degrees rounded to 1e-9 so that 30 deg survives the radian round trip.
double degrees(double rad) { return std::round(rad_to_deg(rad) * 1e9) / 1e9; }

struct LoadedTerrain {
  UniformGrid grid;
  ordered_json info;
};

LoadedTerrain load_terrain(const RunConfig& config, const std::string& text,
                           std::vector<std::string>& warnings) {
  if (io::looks_like_grid(text)) {
    UniformGrid grid = io::parse_grid(text);
    return {std::move(grid), {{"source", "grid_cache"}}};
  }
  const auto samples = io::parse_terrain(text);
  GridBuildReport report;
  UniformGrid grid = build_uniform_grid(samples, config.grid, &report);
  if (report.duplicates_dropped > 0) {
    warnings.push_back(fmt::format(
        "dropped {} duplicate terrain samples ({} with differing elevation), kept the first",
        report.duplicates_dropped, report.conflicting_duplicates));
  }
  ordered_json info = {{"source", "samples"},
                       {"samples", report.input_samples},
                       {"duplicates_dropped", report.duplicates_dropped},
                       {"conflicting_duplicates", report.conflicting_duplicates}};
  return {std::move(grid), std::move(info)};
}

ordered_json parameters(const RunConfig& c) {
  const double d_min =
      min_tangential_spacing(c.vehicle.working_width, c.solver.max_heading_change);
  ordered_json seed_edge = nullptr;
  if (c.plan.seed_edge) seed_edge = *c.plan.seed_edge;
  return {{"working_width", c.vehicle.working_width},
          {"boom_height", c.vehicle.boom_height},
          {"axle_half_width", c.vehicle.axle_half_width},
          {"beta_max_deg", degrees(c.vehicle.max_roll)},
          {"epsilon", c.solver.tolerance},
          {"delta_beta_deg", degrees(c.solver.roll_step)},
          {"max_iterations", c.solver.iteration_cap(c.vehicle)},
          {"side", c.solver.side == OffsetSide::left ? "left" : "right"},
          {"grid_spacing", c.grid.grid_spacing},
          {"q_idw", c.grid.idw_neighbors - 1},
          {"idw_neighbors", c.grid.idw_neighbors},
          {"delta_psi_max_deg", degrees(c.solver.max_heading_change)},
          {"d_min", d_min},
          {"headland_passes", c.plan.headland.passes},
          {"seed_edge", seed_edge},
          {"max_lanes", c.plan.max_lanes},
          {"compare", c.compare},
          {"svg", c.svg},
          {"sample_step", c.report.sample_step},
          {"raster_cell", c.report.raster_cell}};
}

ordered_json input_entry(const std::filesystem::path& path, const std::string& text) {
  return {{"file", path.filename().string()},
          {"bytes", text.size()},
          {"sha256", io::sha256_hex(text)}};
}

void require_progress(const Plan& plan, const char* operation) {
  if (plan.lanes.size() < 2) return;
  for (std::size_t k = 1; k < plan.lanes.size(); ++k) {
    if (plan.lanes[k].converged_count() > 0) return;
  }
  throw Error(ErrorKind::planning, kModule, operation, "no converged lane");
}

std::size_t flagged_points(const Plan& plan) {
  std::size_t n = 0;
  for (const auto& lane : plan.lanes) {
    for (const auto& p : lane.points) n += p.excessive_roll ? 1 : 0;
  }
  return n;
}

}  // namespace

const char* to_string(Command command) noexcept {
  switch (command) {
    case Command::gridify:
      return "gridify";
    case Command::plan:
      return "plan";
    case Command::baseline:
      return "baseline";
    case Command::compare:
      return "compare";
  }
  return "unknown";
}

void RunConfig::validate() const {
  vehicle.validate();
  solver.validate();
  grid.validate();
  auto fail = [](const char* msg) { throw Error(ErrorKind::validation, kModule, "RunConfig", msg); };
  if (terrain.empty()) fail("terrain path is required");
  if (command != Command::gridify && contour.empty()) fail("contour path is required");
  if (!(report.sample_step > 0.0)) fail("sample step must be positive");
  if (!(report.raster_cell > 0.0) || report.raster_cell > 0.1 * vehicle.working_width) {
    fail("raster cell must be in (0, w/10]");
  }
  if (plan.max_lanes == 0) fail("max lanes must be at least 1");
}

RunResult run_pipeline(const RunConfig& config) {
  config.validate();
  RunResult result;

  const std::string terrain_text = io::read_text(config.terrain);
  LoadedTerrain terrain = load_terrain(config, terrain_text, result.warnings);
  const UniformGrid& grid = terrain.grid;

  ordered_json inputs = {{"terrain", input_entry(config.terrain, terrain_text)}};
  std::vector<std::pair<std::string, std::string>> outputs;
  outputs.emplace_back("grid.csv", io::format_grid(grid));

  if (config.command != Command::gridify) {
    const std::string contour_text = io::read_text(config.contour);
    inputs["contour"] = input_entry(config.contour, contour_text);
    const FieldContour contour = io::parse_contour(contour_text);

    const bool want_3d = config.command != Command::baseline || config.compare;
    const bool want_base = config.command != Command::plan || config.compare;

    std::optional<Plan> planned;
    std::optional<Plan> baseline;
    if (want_3d) {
      planned = plan_field(contour, grid, config.vehicle, config.solver, config.plan);
      require_progress(*planned, "plan");
      if (const std::size_t n = flagged_points(*planned); n > 0) {
        result.warnings.push_back(fmt::format("{} lane points exceed the roll limit", n));
      }
    }
    if (want_base) {
      baseline = baseline_2d_plan(contour, grid, config.vehicle, config.solver, config.plan);
    }

    std::vector<io::PlanReport> reports;
    std::vector<io::NamedPlan> named;
    std::vector<io::SvgLayer> layers;
    std::optional<GapOverlap> raster;
    if (planned) {
      reports.push_back({"terrain_3d", &*planned,
                         coverage_report(*planned, grid, config.vehicle, config.report)});
      named.push_back({"terrain_3d", &*planned});
      layers.push_back({&*planned, "#1f77b4", false});
      outputs.emplace_back("lanes.csv", io::format_lanes_csv(*planned));
    }
    if (baseline) {
      reports.push_back({"baseline_2d", &*baseline,
                         coverage_report(*baseline, grid, config.vehicle, config.report)});
      named.push_back({"baseline_2d", &*baseline});
      layers.push_back({&*baseline, "#d62728", true});
      outputs.emplace_back("baseline_lanes.csv", io::format_lanes_csv(*baseline));
    }
    std::optional<double> deviation;
    if (planned && baseline) {
      if (planned->lanes.size() == baseline->lanes.size()) {
        deviation = lateral_deviation(*planned, *baseline);
      } else {
        result.warnings.push_back(fmt::format(
            "lateral deviation skipped: {} planned lanes vs {} baseline lanes",
            planned->lanes.size(), baseline->lanes.size()));
      }
    }
    outputs.emplace_back("lanes.geojson", io::format_lanes_geojson(named));
    outputs.emplace_back("report.json", io::format_report(reports, deviation));
    if (config.svg) {
      const Plan& shaded = planned ? *planned : *baseline;
      raster = gap_overlap_raster(shaded, shaded.mainfield, grid, config.vehicle,
                                  config.report.raster_cell);
      outputs.emplace_back("plan.svg", io::render_svg(contour, layers, &*raster));
    }
  }

  ordered_json manifest = {
      {"tool", "terracover"},
      {"version", kVersion},
      {"command", to_string(config.command)},
      {"parameters", parameters(config)},
      {"inputs", std::move(inputs)},
      {"grid",
       {{"x0", grid.x0()}, {"y0", grid.y0()}, {"spacing", grid.spacing()},
        {"nx", grid.nx()}, {"ny", grid.ny()}}},
  };
  manifest["grid"].update(terrain.info);
  ordered_json digests = ordered_json::object();
  for (const auto& [name, content] : outputs) digests[name] = io::sha256_hex(content);
  manifest["outputs"] = std::move(digests);
  manifest["warnings"] = result.warnings;
  outputs.emplace_back("manifest.json", manifest.dump(2) + "\n");

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec || !std::filesystem::is_directory(config.out_dir)) {
    throw Error(ErrorKind::io, kModule, "run_pipeline", "cannot create output directory");
  }
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (auto& [name, content] : outputs) {
    files.emplace_back(config.out_dir / name, std::move(content));
    result.written.push_back(config.out_dir / name);
  }
  io::write_files_atomic(files);
  return result;
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io:
      return 2;
    case ErrorKind::validation:
    case ErrorKind::out_of_extent:
      return 3;
    case ErrorKind::planning:
      return 4;
  }
  return 1;
}

std::string error_json(const Error& error) {
  ordered_json doc = {{"module", error.module()}, {"error", error.what()}};
  if (!error.operation().empty()) doc["operation"] = error.operation();
  doc["kind"] = to_string(error.kind());
  if (error.index()) doc["index"] = *error.index();
  return doc.dump();
}

}  // namespace terracover
