#include "terracover/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

#include "terracover/error.hpp"

namespace terracover::io {

namespace {

constexpr const char* kModule = "cli_io";
using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Splits on commas when the line has any, otherwise on whitespace.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      out.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Line {
  std::size_t number = 0;  // 1-based
  std::string_view text;
};

// Non-blank, non-comment lines.
std::vector<Line> data_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    ++number;
    const std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.push_back({number, line});
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

// Column positions of `names` in a delimited table whose header is optional.
// Returns the index of the first data line.
std::size_t locate_columns(const std::vector<Line>& lines, const std::vector<std::string>& names,
                           std::vector<std::size_t>& columns, const char* operation) {
  columns.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) columns[i] = i;
  if (lines.empty()) return 0;
  const auto fields = split_fields(lines.front().text);
  double probe = 0.0;
  const bool numeric = std::all_of(fields.begin(), fields.end(),
                                   [&](std::string_view f) { return parse_double(f, probe); });
  if (numeric) return 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find_if(fields.begin(), fields.end(),
                                 [&](std::string_view f) { return lower(f) == names[i]; });
    if (it == fields.end()) {
      throw Error(ErrorKind::io, kModule, operation,
                  fmt::format("header is missing column '{}'", names[i]), lines.front().number);
    }
    columns[i] = static_cast<std::size_t>(it - fields.begin());
  }
  return 1;
}

std::vector<std::vector<double>> parse_table(std::string_view text,
                                             const std::vector<std::string>& names,
                                             const char* operation) {
  const auto lines = data_lines(text);
  std::vector<std::size_t> columns;
  const std::size_t first = locate_columns(lines, names, columns, operation);
  const std::size_t needed = *std::max_element(columns.begin(), columns.end()) + 1;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i].text);
    if (fields.size() < needed) {
      throw Error(ErrorKind::io, kModule, operation, "too few columns", lines[i].number);
    }
    std::vector<double> row(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (!parse_double(fields[columns[c]], row[c])) {
        throw Error(ErrorKind::io, kModule, operation, "malformed number", lines[i].number);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FieldContour contour_from_geojson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, kModule, "read_contour", fmt::format("invalid JSON: {}", e.what()));
  }
  auto fail = [](const std::string& msg) -> FieldContour {
    throw Error(ErrorKind::io, kModule, "read_contour", msg);
  };
  const json* geometry = &doc;
  if (doc.value("type", "") == "FeatureCollection") {
    geometry = nullptr;
    if (!doc.contains("features") || !doc["features"].is_array()) return fail("collection has no features");
    for (const auto& f : doc["features"]) {
      if (f.contains("geometry") && f["geometry"].is_object() &&
          f["geometry"].value("type", "") == "Polygon") {
        geometry = &f["geometry"];
        break;
      }
    }
    if (geometry == nullptr) return fail("no Polygon feature found");
  } else if (doc.value("type", "") == "Feature") {
    if (!doc.contains("geometry") || !doc["geometry"].is_object()) return fail("feature has no geometry");
    geometry = &doc["geometry"];
  }
  const std::string type = geometry->value("type", "");
  if (type != "Polygon") return fail(fmt::format("expected a Polygon geometry, got '{}'", type));
  const json& rings = (*geometry)["coordinates"];
  if (!rings.is_array() || rings.empty()) return fail("polygon has no rings");
  if (rings.size() > 1) return fail("polygon holes are not supported");
  std::vector<Vec2> ring;
  for (const auto& c : rings[0]) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw Error(ErrorKind::io, kModule, "read_contour", "malformed coordinate", ring.size());
    }
    ring.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  return FieldContour::from_ring(std::move(ring));
}

std::string num(double v) { return fmt::format("{}", v); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* point_flag(const LanePointResult& p) {
  if (p.excessive_roll) return "excessive_roll";
  if (!p.converged) return "not_converged";
  return "ok";
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::io, kModule, "read", "file not found");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kModule, "read", "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::vector<SamplePoint> parse_terrain(std::string_view text) {
  const auto rows = parse_table(text, {"x", "y", "z"}, "read_terrain");
  if (rows.empty()) throw Error(ErrorKind::io, kModule, "read_terrain", "no terrain samples");
  std::vector<SamplePoint> samples;
  samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2])) {
      throw Error(ErrorKind::validation, kModule, "read_terrain", "non-finite sample", i);
    }
    samples.push_back({r[0], r[1], r[2]});
  }
  return samples;
}

std::vector<SamplePoint> read_terrain(const std::filesystem::path& path) {
  return parse_terrain(read_text(path));
}

std::string format_grid(const UniformGrid& grid) {
  std::string out;
  out += fmt::format("x0,{:.17g}\ny0,{:.17g}\nspacing,{:.17g}\nnx,{}\nny,{}\n", grid.x0(),
                     grid.y0(), grid.spacing(), grid.nx(), grid.ny());
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      if (i > 0) out += ',';
      out += fmt::format("{:.17g}", grid.at(i, j));
    }
    out += '\n';
  }
  return out;
}

bool looks_like_grid(std::string_view text) { return trim(text).starts_with("x0,"); }

UniformGrid parse_grid(std::string_view text) {
  const auto lines = data_lines(text);
  const char* op = "read_grid";
  if (lines.size() < 5) throw Error(ErrorKind::io, kModule, op, "truncated grid header");
  const char* keys[] = {"x0", "y0", "spacing", "nx", "ny"};
  double header[5];
  for (std::size_t k = 0; k < 5; ++k) {
    const auto fields = split_fields(lines[k].text);
    if (fields.size() != 2 || fields[0] != keys[k] || !parse_double(fields[1], header[k])) {
      throw Error(ErrorKind::io, kModule, op,
                  fmt::format("expected header row '{},<value>'", keys[k]), lines[k].number);
    }
  }
  if (header[3] < 2 || header[4] < 2 || header[3] != std::floor(header[3]) ||
      header[4] != std::floor(header[4])) {
    throw Error(ErrorKind::io, kModule, op, "grid dimensions must be integers >= 2");
  }
  const auto nx = static_cast<std::size_t>(header[3]);
  const auto ny = static_cast<std::size_t>(header[4]);
  if (lines.size() != 5 + ny) throw Error(ErrorKind::io, kModule, op, "row count does not match ny");
  std::vector<double> z;
  z.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const Line& line = lines[5 + j];
    const auto fields = split_fields(line.text);
    if (fields.size() != nx) {
      throw Error(ErrorKind::io, kModule, op, "column count does not match nx", line.number);
    }
    for (const auto f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) throw Error(ErrorKind::io, kModule, op, "malformed number", line.number);
      z.push_back(v);
    }
  }
  return UniformGrid(header[0], header[1], header[2], nx, ny, std::move(z));
}

FieldContour parse_contour(std::string_view text) {
  if (trim(text).starts_with("{")) return contour_from_geojson(text);
  const auto rows = parse_table(text, {"x", "y"}, "read_contour");
  std::vector<Vec2> ring;
  ring.reserve(rows.size());
  for (const auto& r : rows) ring.push_back({r[0], r[1]});
  return FieldContour::from_ring(std::move(ring));
}

FieldContour read_contour(const std::filesystem::path& path) {
  return parse_contour(read_text(path));
}

std::string format_lanes_csv(const Plan& plan) {
  std::string out = "lane_id,point_id,x,y,z,beta_deg,w_hat,h_proj,iterations,converged,flag\n";
  for (std::size_t k = 0; k < plan.lanes.size(); ++k) {
    const auto& points = plan.lanes[k].points;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", k, i, num(p.position.x),
                         num(p.position.y), num(p.position.z), num(rad_to_deg(p.roll)),
                         num(p.effective_offset), num(p.achieved_height), p.iterations,
                         p.converged ? 1 : 0, point_flag(p));
    }
  }
  return out;
}

std::string format_lanes_geojson(const std::vector<NamedPlan>& plans) {
  json features = json::array();
  auto line_coords = [](const Polyline3& line) {
    json coords = json::array();
    for (const auto& p : line.points) coords.push_back({p.x, p.y, p.z});
    return coords;
  };
  for (std::size_t n = 0; n < plans.size(); ++n) {
    const Plan& plan = *plans[n].plan;
    if (n == 0) {
      for (std::size_t r = 0; r < plan.headland.size(); ++r) {
        features.push_back({{"type", "Feature"},
                            {"properties", {{"kind", "headland"}, {"ring", r}}},
                            {"geometry", {{"type", "LineString"},
                                          {"coordinates", line_coords(plan.headland[r])}}}});
      }
    }
    for (std::size_t k = 0; k < plan.lanes.size(); ++k) {
      const PlanLane& lane = plan.lanes[k];
      double max_beta = 0.0;
      for (const auto& p : lane.points) max_beta = std::max(max_beta, std::abs(p.roll));
      for (std::size_t piece = 0; piece < lane.pieces.size(); ++piece) {
        json props = {{"kind", "lane"},
                      {"plan", plans[n].name},
                      {"lane_id", k},
                      {"piece", piece},
                      {"points", lane.points.size()},
                      {"converged", lane.converged_count()},
                      {"excessive_roll", lane.has_excessive_roll()},
                      {"max_abs_beta_deg", rad_to_deg(max_beta)}};
        features.push_back({{"type", "Feature"},
                            {"properties", std::move(props)},
                            {"geometry", {{"type", "LineString"},
                                          {"coordinates", line_coords(lane.pieces[piece])}}}});
      }
    }
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump(1) + "\n";
}

std::string format_report(const std::vector<PlanReport>& reports,
                          std::optional<double> lateral_deviation) {
  json plans = json::array();
  for (const auto& r : reports) {
    const CoverageReport& c = r.coverage;
    json lanes = json::array();
    for (const auto& l : c.lanes) {
      lanes.push_back({{"lane", l.lane},
                       {"points", l.points},
                       {"converged", l.converged},
                       {"excessive_roll", l.excessive_roll},
                       {"max_abs_beta_rad", l.max_abs_roll},
                       {"h_proj_min", l.min_height},
                       {"h_proj_max", l.max_height}});
    }
    json pairs = json::array();
    for (const auto& p : c.pairs) {
      pairs.push_back({{"lane_a", p.lane},
                       {"lane_b", p.lane + 1},
                       {"samples", p.samples},
                       {"mean_spacing", p.mean_spacing},
                       {"min_spacing", p.min_spacing},
                       {"max_spacing", p.max_spacing},
                       {"max_spacing_error", p.max_spacing_error},
                       {"mean_half_boom_tilt_rad", p.mean_tilt},
                       {"max_half_boom_tilt_rad", p.max_tilt},
                       {"spacing_profile", p.profile}});
    }
    plans.push_back({{"name", r.name},
                     {"lane_count", r.plan ? r.plan->lanes.size() : c.lanes.size()},
                     {"gap_fraction", c.gap_fraction},
                     {"overlap_fraction", c.overlap_fraction},
                     {"max_spacing_error", c.max_spacing_error},
                     {"lanes", std::move(lanes)},
                     {"lane_pairs", std::move(pairs)}});
  }
  json doc = {{"plans", std::move(plans)}};
  if (lateral_deviation) doc["lateral_deviation"] = finite_or_null(*lateral_deviation);
  return doc.dump(2) + "\n";
}

std::string render_svg(const FieldContour& contour, const std::vector<SvgLayer>& layers,
                       const GapOverlap* raster) {
  const Bounds b = contour.bounds();
  const double margin = 0.05 * std::max(b.width(), b.height());
  const double width = b.width() + 2.0 * margin;
  const double height = b.height() + 2.0 * margin;
  auto px = [&](Vec2 p) {
    return fmt::format("{:.3f},{:.3f}", p.x - b.min_x + margin, b.max_y - p.y + margin);
  };
  const double stroke = std::max(width, height) / 400.0;

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.3f} {:.3f}\" width=\"800\" "
      "height=\"{:.0f}\">\n",
      width, height, 800.0 * height / width);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"white\"/>\n",
                     width, height);

  if (raster != nullptr && raster->columns > 0 && raster->rows > 0) {
    const Bounds& rb = raster->raster_bounds;
    const double cw = rb.width() / static_cast<double>(raster->columns);
    const double ch = rb.height() / static_cast<double>(raster->rows);
    // Runs of equal state along each row become one rectangle.
    for (std::size_t j = 0; j < raster->rows; ++j) {
      std::size_t i = 0;
      while (i < raster->columns) {
        auto state = [&](std::size_t col) {
          const std::size_t c = j * raster->columns + col;
          if (!raster->in_domain[c]) return 0;
          if (raster->coverage[c] == 0) return 1;
          return raster->coverage[c] >= 2 ? 2 : 0;
        };
        const int s = state(i);
        std::size_t end = i + 1;
        while (end < raster->columns && state(end) == s) ++end;
        if (s != 0) {
          const Vec2 top_left{rb.min_x + static_cast<double>(i) * cw,
                              rb.min_y + static_cast<double>(j + 1) * ch};
          out += fmt::format(
              "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"{}\"/>\n",
              top_left.x - b.min_x + margin, b.max_y - top_left.y + margin,
              static_cast<double>(end - i) * cw, ch, s == 1 ? "#f28e2b" : "#8e44ad");
        }
        i = end;
      }
    }
  }

  out += "<polygon points=\"";
  for (std::size_t i = 0; i < contour.size(); ++i) {
    if (i > 0) out += ' ';
    out += px(contour.vertex(i));
  }
  out += fmt::format("\" fill=\"none\" stroke=\"black\" stroke-width=\"{:.3f}\"/>\n", stroke);

  auto polyline = [&](const Polyline3& line, const std::string& color, bool dashed) {
    out += "<polyline points=\"";
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i > 0) out += ' ';
      out += px(line.points[i].xy());
    }
    out += fmt::format("\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3f}\"", color, stroke);
    if (dashed) out += fmt::format(" stroke-dasharray=\"{:.3f}\"", 4.0 * stroke);
    out += "/>\n";
  };
  for (std::size_t n = 0; n < layers.size(); ++n) {
    const Plan& plan = *layers[n].plan;
    if (n == 0) {
      for (const auto& ring : plan.headland) polyline(ring, "#999999", false);
    }
    for (const auto& lane : plan.lanes) {
      for (const auto& piece : lane.pieces) polyline(piece, layers[n].color, layers[n].dashed);
    }
  }
  out += "</svg>\n";
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, kModule, "sha256", "digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < size; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    ++number;
    std::string_view line = text.substr(start, end - start);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty()) {
        throw Error(ErrorKind::validation, kModule, "read_config", "expected 'key = value'",
                    number);
      }
      out[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

void write_files_atomic(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& [path, content] : files) {
    std::filesystem::path tmp = path;
    tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorKind::io, kModule, "write", fmt::format("cannot write {}", path.filename().string()));
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files[i].first, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorKind::io, kModule, "write",
                  fmt::format("cannot rename into {}", files[i].first.filename().string()));
    }
  }
}

}  // namespace terracover::io
