// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "terracover/io.hpp"
#include "terracover/pipeline.hpp"

using namespace terracover;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates a criterion's checks; the first failure's message wins.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  void note(const std::string& what) {
    if (outcome_.pass) outcome_.detail = what;
  }
  Outcome result() const { return outcome_; }

 private:
  Outcome outcome_;
};

std::string num(double v, int precision = 6) {
  std::ostringstream out;
  out << std::setprecision(precision) << v;
  return out.str();
}

int run(const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

const double kTheta = std::atan(0.2);

// Map height whose surface arc length along y equals `arc` on z = A sin(2 pi y / L),
// by composite Simpson quadrature and bisection.
double sinusoid_height_for_arc(double arc, double amplitude, double wavelength) {
  auto length = [&](double h) {
    const int n = 20000;
    const double dy = h / n;
    auto f = [&](double y) {
      const double slope = amplitude * 2.0 * kPi / wavelength * std::cos(2.0 * kPi * y / wavelength);
      return std::sqrt(1.0 + slope * slope);
    };
    double s = f(0.0) + f(h);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * dy);
    return s * dy / 3.0;
  };
  double lo = 0.0, hi = arc;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (length(mid) < arc ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<SamplePoint> brute_knn_samples(const std::vector<SamplePoint>& samples, Vec2 q,
                                           std::size_t k, std::vector<double>& dist) {
  std::vector<std::size_t> order(samples.size());
  std::vector<double> d(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    order[i] = i;
    const double dx = samples[i].x - q.x, dy = samples[i].y - q.y;
    d[i] = std::sqrt(dx * dx + dy * dy);
  }
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] < d[b]; });
  std::vector<SamplePoint> out;
  dist.clear();
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    out.push_back(samples[order[i]]);
    dist.push_back(d[order[i]]);
  }
  return out;
}

double brute_idw(const std::vector<SamplePoint>& samples, Vec2 q, std::size_t k) {
  std::vector<double> d;
  const auto nn = brute_knn_samples(samples, q, k, d);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    if (d[i] == 0.0) return nn[i].z;
    const double eta = 1.0 / d[i];
    num += eta * nn[i].z;
    den += eta;
  }
  return num / den;
}

std::string terrain_csv(const TerrainKind& surface, const Bounds& extent) {
  std::ostringstream out;
  out << std::setprecision(17) << "x,y,z\n";
  for (const auto& s : synth_terrain(AnalyticSurface(surface), extent, SamplePattern{})) {
    out << s.x << ',' << s.y << ',' << s.z << '\n';
  }
  return out.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// ---------------------------------------------------------------------------

Outcome spacing_heuristic() {
  Checker c;
  const VehicleConfig v;
  const double d = min_tangential_spacing(v.working_width, deg_to_rad(30.0));
  const double formula =
      36.0 * (1.0 - std::cos(deg_to_rad(30.0))) / std::sin(deg_to_rad(30.0));
  c.expect(std::abs(d - formula) <= 1e-9, "d_min " + num(d, 12) + " vs formula " + num(formula, 12));
  c.expect(std::abs(d - 9.6462) < 5e-5, "d_min " + num(d) + " not 9.6462");
  const Polyline3 line{{{0, 0, 0}, {100, 0, 0}}};
  const Polyline3 r = resample_reference(line, v, deg_to_rad(30.0));
  bool spaced = r.size() == 11;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) spaced &= distance(r.points[i], r.points[i + 1]) >= d;
  c.expect(spaced, "resample_reference produced " + std::to_string(r.size()) + " points");
  c.note("d_min = " + num(d, 12) + " m");
  return c.result();
}

Outcome defaults_in_manifest() {
  Checker c;
  const SolverConfig s;
  const GridBuildParams g;
  c.expect(s.tolerance == 0.1, "epsilon default");
  c.expect(std::abs(rad_to_deg(s.roll_step) - 1.0) < 1e-12, "delta beta default");
  c.expect(g.grid_spacing == 1.0, "grid spacing default");
  c.expect(g.idw_neighbors == 4, "Q_IDW default");

  const fs::path dir = fs::temp_directory_path() / ("terracover_accept_defaults_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  write(dir / "terrain.csv", terrain_csv(FlatSurface{0.0}, {0, 0, 20, 20}));
  RunConfig cfg;
  cfg.command = Command::gridify;
  cfg.terrain = dir / "terrain.csv";
  cfg.out_dir = dir / "out";
  run_pipeline(cfg);
  const auto manifest = nlohmann::json::parse(io::read_text(cfg.out_dir / "manifest.json"));
  fs::remove_all(dir);
  const auto& p = manifest.at("parameters");
  c.expect(p.at("epsilon") == 0.1, "manifest epsilon");
  c.expect(p.at("delta_beta_deg") == 1.0, "manifest delta_beta_deg");
  c.expect(p.at("grid_spacing") == 1.0, "manifest grid_spacing");
  c.expect(p.at("q_idw") == 3, "manifest q_idw");
  c.note("epsilon=0.1 delta_beta=1deg grid_spacing=1 q_idw=3 recorded");
  return c.result();
}

Outcome flat_reduction() {
  Checker c;
  const auto terrain = fixtures::analytic_grid(FlatSurface{0.0}, fixtures::padded(100, 400));
  const auto field = fixtures::rectangle(100, 400);
  const Plan plan3d = plan_field(field, terrain, {}, {}, fixtures::bottom_seed());
  const Plan base = baseline_2d_plan(field, terrain, {}, {}, fixtures::bottom_seed());
  c.expect(plan3d.lanes.size() == 11, "3D lanes " + std::to_string(plan3d.lanes.size()));
  c.expect(base.lanes.size() == 11, "baseline lanes " + std::to_string(base.lanes.size()));
  const double dev = lateral_deviation(plan3d, base);
  double dz = 0.0;
  for (const Plan* p : {&plan3d, &base}) {
    for (const auto& lane : p->lanes) {
      for (const auto& piece : lane.pieces) {
        for (const auto& q : piece.points) dz = std::max(dz, std::abs(q.z - 2.0));
      }
    }
  }
  c.expect(dev < 1e-6, "lateral deviation " + num(dev));
  c.expect(dz < 1e-6, "height deviation " + num(dz));
  c.note("11 lanes, deviation " + num(dev) + " m, height error " + num(dz) + " m");
  return c.result();
}

Outcome incline_suite() {
  Checker c;
  const double height = 396.0 * std::cos(kTheta);
  const auto terrain =
      fixtures::analytic_grid(InclineSurface{0.2, {0, 1}}, fixtures::padded(100, height));
  const auto field = fixtures::rectangle(100, height);
  const Plan plan3d = plan_field(field, terrain, {}, {}, fixtures::bottom_seed());
  const Plan base = baseline_2d_plan(field, terrain, {}, {}, fixtures::bottom_seed());
  double worst_h = 0.0, worst_exact = 0.0, worst_beta = 0.0;
  std::size_t converged = 0;
  for (std::size_t k = 1; k < plan3d.lanes.size(); ++k) {
    for (const auto& p : plan3d.lanes[k].points) {
      if (!p.converged) continue;
      ++converged;
      worst_h = std::max(worst_h, std::abs(p.achieved_height - 2.0));
      worst_exact = std::max(
          worst_exact, std::abs(exact_projection_distance(p.position, terrain, 6.0, 0.25) - 2.0));
      worst_beta = std::max(worst_beta, std::abs(rad_to_deg(p.roll + kTheta)));
    }
  }
  c.expect(converged > 0, "no converged points");
  c.expect(worst_h <= 0.1, "|h_proj - h| up to " + num(worst_h));
  c.expect(worst_exact <= 0.12, "exact projection off by " + num(worst_exact));
  c.expect(worst_beta <= 0.5, "beta off -theta by " + num(worst_beta) + " deg");

  auto spacing_error = [&](const Plan& plan, double target) {
    double e = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < plan.lanes.size(); ++k) {
      for (double s : ground_spacing_profile(plan.lanes[k].pieces, plan.lanes[k + 1].pieces,
                                             terrain, 10.0, 2.0)) {
        e = std::max(e, std::abs(s - target));
        ++n;
      }
    }
    return n ? e : 1e300;
  };
  const double e3 = spacing_error(plan3d, 36.0);
  const double eb = spacing_error(base, 36.0 / std::cos(kTheta));
  c.expect(e3 <= 0.2, "3D ground spacing error " + num(e3));
  c.expect(eb <= 0.05, "baseline spacing vs 36.713 error " + num(eb));
  c.note(std::to_string(converged) + " points; max |h_proj-h| " + num(worst_h, 4) +
         ", exact " + num(worst_exact, 4) + ", beta " + num(worst_beta, 3) +
         " deg; spacing err 3D " + num(e3, 4) + ", baseline " + num(eb, 4));
  return c.result();
}

Outcome sinusoid_suite() {
  Checker c;
  const double height = sinusoid_height_for_arc(396.0, 2.0, 50.0);
  const SinusoidSurface surface{2.0, 50.0, {0, 1}};
  const auto terrain = fixtures::analytic_grid(surface, fixtures::padded(100, height));
  const auto field = fixtures::rectangle(100, height);
  const Plan plan3d = plan_field(field, terrain, {}, {}, fixtures::bottom_seed());
  const Plan base = baseline_2d_plan(field, terrain, {}, {}, fixtures::bottom_seed());

  std::size_t total = 0, converged = 0;
  double worst_width = 0.0;
  for (std::size_t k = 1; k < plan3d.lanes.size(); ++k) {
    for (const auto& p : plan3d.lanes[k].points) {
      ++total;
      if (!p.converged) continue;
      ++converged;
      worst_width = std::max(worst_width, std::abs(distance(p.position, p.lifted_reference) - 36.0) / 36.0);
    }
  }
  const double rate = total ? double(converged) / double(total) : 0.0;
  c.expect(rate >= 0.99, "converged " + num(100.0 * rate, 4) + "%");
  c.expect(worst_width <= 1e-9, "width invariant off by " + num(worst_width) + " relative");

  const auto r3 = gap_overlap_raster(plan3d, plan3d.mainfield, terrain, {}, 0.1);
  const auto rb = gap_overlap_raster(base, base.mainfield, terrain, {}, 0.1);
  c.expect(r3.gap_fraction <= 0.01 && r3.overlap_fraction <= 0.01,
           "3D gap " + num(r3.gap_fraction) + " overlap " + num(r3.overlap_fraction));
  const double bad3 = r3.gap_fraction + r3.overlap_fraction;
  const double badb = rb.gap_fraction + rb.overlap_fraction;
  c.expect(badb > bad3, "baseline gap+overlap " + num(badb) + " not worse than " + num(bad3));
  c.note("field 100x" + num(height, 6) + ", converged " + num(100.0 * rate, 5) + "%, width err " +
         num(worst_width, 3) + ", gap+overlap 3D " + num(100.0 * bad3, 3) + "% vs baseline " +
         num(100.0 * badb, 3) + "%");
  return c.result();
}

Outcome idw_bilinear_oracles() {
  Checker c;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<SamplePoint> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back({u(rng), u(rng), 0.1 * u(rng)});
  const SpatialIndex index(samples);
  std::size_t mismatches = 0;
  for (int q = 0; q < 100; ++q) {
    const Vec2 p{u(rng), u(rng)};
    const auto nn = index.knn(p, 4);
    if (idw_elevation(nn) != brute_idw(samples, p, 4)) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " of 100 IDW queries differ");

  const UniformGrid grid = build_uniform_grid(samples, GridBuildParams{});
  std::uniform_int_distribution<std::size_t> ix(0, grid.nx() - 1), iy(0, grid.ny() - 1);
  std::size_t node_mismatches = 0;
  for (int q = 0; q < 100; ++q) {
    const std::size_t i = ix(rng), j = iy(rng);
    if (grid.at(i, j) != brute_idw(samples, {grid.node_x(i), grid.node_y(j)}, 4)) ++node_mismatches;
  }
  c.expect(node_mismatches == 0, std::to_string(node_mismatches) + " of 100 grid nodes differ");

  const auto affine = [](double x, double y) { return 3.5 - 0.25 * x + 0.75 * y; };
  std::vector<double> z;
  for (int j = 0; j <= 20; ++j) {
    for (int i = 0; i <= 20; ++i) z.push_back(affine(2.0 * i, 2.0 * j));
  }
  const UniformGrid plane(0.0, 0.0, 2.0, 21, 21, std::move(z));
  double worst = 0.0;
  for (int q = 0; q < 1000; ++q) {
    const double x = 0.04 * u(rng) * 10.0, y = 0.04 * u(rng) * 10.0;
    worst = std::max(worst, std::abs(plane.elevation(x, y) - affine(x, y)));
  }
  c.expect(worst <= 1e-9, "bilinear affine error " + num(worst));
  c.note("IDW exact on 100 queries and 100 nodes; bilinear affine error " + num(worst, 3));
  return c.result();
}

Outcome secant_blend() {
  Checker c;
  const double b = rad_to_deg(blend_roll({deg_to_rad(5.0), 2.3}, {deg_to_rad(4.0), 1.9}, 2.0));
  c.expect(std::abs(b - 4.25) <= 1e-12, "blended beta " + num(b, 17));
  c.note("blended beta = " + num(b, 15) + " deg");
  return c.result();
}

Outcome determinism() {
  Checker c;
  const fs::path dir = fs::temp_directory_path() / ("terracover_accept_det_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const double height = 396.0 * std::cos(kTheta);
  write(dir / "terrain.csv", terrain_csv(InclineSurface{0.2, {0, 1}}, fixtures::padded(100, height)));
  {
    std::ostringstream ring;
    ring << std::setprecision(17) << "x,y\n0,0\n100,0\n100," << height << "\n0," << height << "\n";
    write(dir / "field.csv", ring.str());
  }
  RunConfig cfg;
  cfg.command = Command::compare;
  cfg.terrain = dir / "terrain.csv";
  cfg.contour = dir / "field.csv";
  cfg.plan.seed_edge = 0;
  cfg.svg = true;
  std::vector<fs::path> runs{dir / "run1", dir / "run2"};
  for (const auto& out : runs) {
    cfg.out_dir = out;
    run_pipeline(cfg);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(runs[0])) {
    const auto name = entry.path().filename();
    ++files;
    const bool same = fs::exists(runs[1] / name) &&
                      io::read_text(entry.path()) == io::read_text(runs[1] / name);
    c.expect(same, name.string() + " differs between runs");
  }
  fs::remove_all(dir);
  c.expect(files >= 6, "only " + std::to_string(files) + " outputs");
  c.note(std::to_string(files) + " output files byte-identical");
  return c.result();
}

}  // namespace

int main() {
  int failures = 0;
  failures += run("spacing_heuristic", spacing_heuristic);
  failures += run("defaults_in_manifest", defaults_in_manifest);
  failures += run("flat_terrain_reduction", flat_reduction);
  failures += run("inclined_plane_suite", incline_suite);
  failures += run("sinusoid_suite", sinusoid_suite);
  failures += run("idw_bilinear_oracles", idw_bilinear_oracles);
  failures += run("secant_blend", secant_blend);
  failures += run("determinism", determinism);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
