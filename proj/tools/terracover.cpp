#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "terracover/io.hpp"
#include "terracover/pipeline.hpp"
#include "terracover/synth.hpp"

namespace tc = terracover;

namespace {

constexpr int kUsageExit = 64;

// Raw option values as typed on the command line; angles in degrees.
struct RunOptions {
  std::string terrain;
  std::string contour;
  std::string out = ".";
  std::string config;
  double width = 36.0;
  double height = 2.0;
  double axle = 1.5;
  double beta_max = 30.0;
  double eps = 0.1;
  double dbeta = 1.0;
  std::size_t max_iterations = 0;
  double grid_spacing = 1.0;
  std::size_t idw_k = 3;
  double dpsi_max = 30.0;
  std::size_t headland_passes = 0;
  std::string side = "left";
  std::size_t max_lanes = 500;
  std::optional<std::size_t> seed_edge;
  double sample_step = 10.0;
  double raster_cell = 0.1;
  bool svg = false;
  bool compare = false;
};

struct Registered {
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::function<void(const std::string&)>> setters;
};

template <typename T>
void add_value(CLI::App* sub, Registered& reg, const std::string& name, T& target,
               const std::string& help) {
  reg.options[name] = sub->add_option("--" + name, target, help)->capture_default_str();
  reg.setters[name] = [&target, name](const std::string& text) {
    if (!CLI::detail::lexical_cast(text, target)) {
      throw tc::Error(tc::ErrorKind::validation, "cli_io", "read_config",
                      fmt::format("invalid value for '{}'", name));
    }
  };
}

void add_flag(CLI::App* sub, Registered& reg, const std::string& name, bool& target,
              const std::string& help) {
  reg.options[name] = sub->add_flag("--" + name, target, help);
  reg.setters[name] = [&target, name](const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") {
      target = true;
    } else if (text == "false" || text == "0" || text == "no") {
      target = false;
    } else {
      throw tc::Error(tc::ErrorKind::validation, "cli_io", "read_config",
                      fmt::format("invalid value for '{}'", name));
    }
  };
}

void add_run_options(CLI::App* sub, RunOptions& o, Registered& reg, bool planning) {
  add_value(sub, reg, "terrain", o.terrain, "Terrain samples (CSV x,y,z or XYZ) or a grid cache");
  add_value(sub, reg, "out", o.out, "Output directory");
  sub->add_option("--config", o.config, "Key = value file; command-line flags take precedence");
  add_value(sub, reg, "grid-spacing", o.grid_spacing, "Grid spacing in meters");
  add_value(sub, reg, "idw-k", o.idw_k, "IDW neighbor count minus one (k = idw-k + 1)");
  if (!planning) return;
  add_value(sub, reg, "contour", o.contour, "Field boundary (CSV x,y ring or GeoJSON Polygon)");
  add_value(sub, reg, "width", o.width, "Working width w in meters");
  add_value(sub, reg, "height", o.height, "Boom height h in meters");
  add_value(sub, reg, "axle", o.axle, "Axle half-width a in meters");
  add_value(sub, reg, "beta-max", o.beta_max, "Roll limit in degrees");
  add_value(sub, reg, "eps", o.eps, "Height tolerance in meters");
  add_value(sub, reg, "dbeta", o.dbeta, "Roll step in degrees");
  add_value(sub, reg, "max-iterations", o.max_iterations, "Roll walk cap (0: derived)");
  add_value(sub, reg, "dpsi-max", o.dpsi_max, "Largest heading change between reference points, degrees");
  add_value(sub, reg, "headland-passes", o.headland_passes, "Number of headland rings");
  reg.options["side"] = sub->add_option("--side", o.side, "Offset side")
                            ->check(CLI::IsMember({"left", "right"}))
                            ->capture_default_str();
  reg.setters["side"] = [&o](const std::string& text) {
    if (text != "left" && text != "right") {
      throw tc::Error(tc::ErrorKind::validation, "cli_io", "read_config",
                      "invalid value for 'side'");
    }
    o.side = text;
  };
  add_value(sub, reg, "max-lanes", o.max_lanes, "Maximum number of lanes");
  add_value(sub, reg, "seed-edge", o.seed_edge, "Contour edge index for the first lane (default: longest)");
  add_value(sub, reg, "sample-step", o.sample_step, "Spacing profile sample step in meters");
  add_value(sub, reg, "raster-cell", o.raster_cell, "Gap/overlap raster cell in meters");
  add_flag(sub, reg, "svg", o.svg, "Also write a bird's-view SVG");
  add_flag(sub, reg, "compare", o.compare, "Also run the other planner and compare");
}

void apply_config_file(const RunOptions& o, const Registered& reg) {
  if (o.config.empty()) return;
  const auto values = tc::io::parse_key_values(tc::io::read_text(o.config));
  for (const auto& [key, value] : values) {
    const auto it = reg.setters.find(key);
    if (it == reg.setters.end()) {
      throw tc::Error(tc::ErrorKind::validation, "cli_io", "read_config",
                      fmt::format("unknown key '{}'", key));
    }
    if (reg.options.at(key)->count() == 0) it->second(value);
  }
}

tc::RunConfig to_run_config(const RunOptions& o, tc::Command command) {
  tc::RunConfig c;
  c.command = command;
  c.terrain = o.terrain;
  c.contour = o.contour;
  c.out_dir = o.out;
  c.vehicle.working_width = o.width;
  c.vehicle.boom_height = o.height;
  c.vehicle.axle_half_width = o.axle;
  c.vehicle.max_roll = tc::deg_to_rad(o.beta_max);
  c.solver.tolerance = o.eps;
  c.solver.roll_step = tc::deg_to_rad(o.dbeta);
  c.solver.max_iterations = o.max_iterations;
  c.solver.side = o.side == "right" ? tc::OffsetSide::right : tc::OffsetSide::left;
  c.solver.max_heading_change = tc::deg_to_rad(o.dpsi_max);
  c.grid.grid_spacing = o.grid_spacing;
  c.grid.idw_neighbors = o.idw_k + 1;
  c.plan.headland = {o.headland_passes, o.width};
  c.plan.seed_edge = o.seed_edge;
  c.plan.max_lanes = o.max_lanes;
  c.report = {o.sample_step, o.raster_cell};
  c.compare = o.compare;
  c.svg = o.svg;
  return c;
}

struct SynthOptions {
  std::string kind = "flat";
  double level = 0.0;
  double slope = 0.2;
  double amplitude = 2.0;
  double wavelength = 50.0;
  double direction = 90.0;
  std::vector<double> extent{-60.0, -60.0, 160.0, 460.0};
  double spacing = 1.0;
  std::string layout = "regular";
  double jitter = 0.4;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<double> field;
  std::string field_out;
};

void add_synth_options(CLI::App* sub, SynthOptions& s) {
  sub->add_option("--kind", s.kind, "Surface kind")
      ->check(CLI::IsMember({"flat", "incline", "sinusoid"}))
      ->capture_default_str();
  sub->add_option("--level", s.level, "Flat surface elevation")->capture_default_str();
  sub->add_option("--slope", s.slope, "Incline rise over run")->capture_default_str();
  sub->add_option("--amplitude", s.amplitude, "Sinusoid amplitude in meters")->capture_default_str();
  sub->add_option("--wavelength", s.wavelength, "Sinusoid wavelength in meters")->capture_default_str();
  sub->add_option("--direction", s.direction, "Direction of variation, degrees from +x")
      ->capture_default_str();
  sub->add_option("--extent", s.extent, "Sample extent: min_x min_y max_x max_y")
      ->expected(4)
      ->capture_default_str();
  sub->add_option("--spacing", s.spacing, "Sample spacing in meters")->capture_default_str();
  sub->add_option("--layout", s.layout, "Sample layout")
      ->check(CLI::IsMember({"regular", "jittered"}))
      ->capture_default_str();
  sub->add_option("--jitter", s.jitter, "Jitter as a fraction of the spacing")->capture_default_str();
  sub->add_option("--seed", s.seed, "Random seed for the jittered layout")->capture_default_str();
  sub->add_option("--out", s.out, "Output CSV (default: stdout)");
  sub->add_option("--field", s.field, "Rectangular field width and height, corner at the origin")
      ->expected(2);
  sub->add_option("--field-out", s.field_out, "Write the rectangular field contour CSV here");
}

tc::Vec2 axis_snapped(double degrees) {
  const double r = tc::deg_to_rad(degrees);
  auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
  return {snap(std::cos(r)), snap(std::sin(r))};
}

int run_synth(const SynthOptions& s) {
  const tc::Vec2 dir = axis_snapped(s.direction);
  tc::TerrainKind kind = tc::FlatSurface{s.level};
  if (s.kind == "incline") kind = tc::InclineSurface{s.slope, dir};
  if (s.kind == "sinusoid") kind = tc::SinusoidSurface{s.amplitude, s.wavelength, dir};
  tc::SamplePattern pattern;
  pattern.layout = s.layout == "jittered" ? tc::SamplePattern::Layout::jittered
                                          : tc::SamplePattern::Layout::regular;
  pattern.spacing = s.spacing;
  pattern.jitter = s.jitter;
  pattern.seed = s.seed;
  const tc::Bounds extent{s.extent[0], s.extent[1], s.extent[2], s.extent[3]};
  const auto samples = tc::synth_terrain(tc::AnalyticSurface(kind), extent, pattern);

  std::string csv = "x,y,z\n";
  for (const auto& p : samples) csv += fmt::format("{},{},{}\n", p.x, p.y, p.z);
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  if (!s.field_out.empty()) {
    if (s.field.size() != 2) {
      throw tc::Error(tc::ErrorKind::validation, "cli_io", "synth", "--field-out needs --field W H");
    }
    files.emplace_back(s.field_out, fmt::format("x,y\n0,0\n{0},0\n{0},{1}\n0,{1}\n",
                                                s.field[0], s.field[1]));
  }
  if (s.out.empty()) {
    std::cout << csv;
  } else {
    files.emplace_back(s.out, std::move(csv));
  }
  tc::io::write_files_atomic(files);
  return 0;
}

void print_error_json(const std::string& message) {
  std::cerr << fmt::format("{{\"module\":\"cli_io\",\"error\":\"{}\"}}", message) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Terrain-following coverage lane planner", "terracover"};
  app.require_subcommand(1, 1);

  // Only one subcommand runs per invocation, so they share the option storage.
  RunOptions run;
  SynthOptions synth;
  std::map<CLI::App*, tc::Command> commands;
  std::map<CLI::App*, Registered> registries;

  struct Sub {
    const char* name;
    const char* help;
    tc::Command command;
  };
  for (const Sub& s : {Sub{"gridify", "Build and cache the elevation grid", tc::Command::gridify},
                       Sub{"plan", "Terrain-following 3D lane plan", tc::Command::plan},
                       Sub{"baseline", "Plan in the map plane, then drape", tc::Command::baseline},
                       Sub{"compare", "Both planners plus a comparison report", tc::Command::compare}}) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_run_options(sub, run, registries[sub], s.command != tc::Command::gridify);
    commands[sub] = s.command;
  }
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic terrain fixture");
  add_synth_options(synth_cmd, synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
    return kUsageExit;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    for (const auto& [sub, command] : commands) {
      if (!sub->parsed()) continue;
      apply_config_file(run, registries.at(sub));
      const tc::RunResult result = tc::run_pipeline(to_run_config(run, command));
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << fmt::format("wrote {} files to {}\n", result.written.size(), run.out);
      return 0;
    }
  } catch (const tc::Error& e) {
    std::cerr << tc::error_json(e) << "\n";
    return tc::exit_code(e.kind());
  } catch (const std::exception& e) {
    print_error_json(e.what());
    return 1;
  }
  return 0;
}
