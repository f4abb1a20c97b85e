#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>
#include <vector>

#include "terracover/coverage_metrics.hpp"
#include "terracover/error.hpp"
#include "terracover/field_geometry.hpp"
#include "terracover/lane_planner.hpp"
#include "terracover/synth.hpp"
#include "terracover/terrain.hpp"

namespace py = pybind11;
using namespace terracover;

namespace {

using XYZ = std::tuple<double, double, double>;

std::vector<XYZ> to_tuples(const Polyline3& line) {
  std::vector<XYZ> out;
  out.reserve(line.size());
  for (const auto& p : line.points) out.emplace_back(p.x, p.y, p.z);
  return out;
}

py::dict point_dict(const LanePointResult& p) {
  py::dict d;
  d["position"] = XYZ{p.position.x, p.position.y, p.position.z};
  d["lifted_reference"] =
      XYZ{p.lifted_reference.x, p.lifted_reference.y, p.lifted_reference.z};
  d["beta"] = p.roll;
  d["w_hat"] = p.effective_offset;
  d["h_proj"] = p.achieved_height;
  d["iterations"] = p.iterations;
  d["converged"] = p.converged;
  d["excessive_roll"] = p.excessive_roll;
  return d;
}

py::dict report_dict(const CoverageReport& r) {
  py::list lanes;
  for (const auto& l : r.lanes) {
    py::dict d;
    d["lane"] = l.lane;
    d["points"] = l.points;
    d["converged"] = l.converged;
    d["excessive_roll"] = l.excessive_roll;
    d["max_abs_beta"] = l.max_abs_roll;
    d["h_proj_min"] = l.min_height;
    d["h_proj_max"] = l.max_height;
    lanes.append(d);
  }
  py::list pairs;
  for (const auto& p : r.pairs) {
    py::dict d;
    d["lane_a"] = p.lane;
    d["lane_b"] = p.lane + 1;
    d["mean_spacing"] = p.mean_spacing;
    d["min_spacing"] = p.min_spacing;
    d["max_spacing"] = p.max_spacing;
    d["max_spacing_error"] = p.max_spacing_error;
    d["profile"] = p.profile;
    pairs.append(d);
  }
  py::dict d;
  d["lanes"] = lanes;
  d["pairs"] = pairs;
  d["gap_fraction"] = r.gap_fraction;
  d["overlap_fraction"] = r.overlap_fraction;
  d["max_spacing_error"] = r.max_spacing_error;
  return d;
}

VehicleConfig vehicle(double w, double h, double a, double beta_max_deg) {
  VehicleConfig v;
  v.working_width = w;
  v.boom_height = h;
  v.axle_half_width = a;
  v.max_roll = deg_to_rad(beta_max_deg);
  return v;
}

SolverConfig solver(double eps, double dbeta_deg, double dpsi_max_deg, const std::string& side) {
  SolverConfig s;
  s.tolerance = eps;
  s.roll_step = deg_to_rad(dbeta_deg);
  s.max_heading_change = deg_to_rad(dpsi_max_deg);
  if (side != "left" && side != "right") throw py::value_error("side must be 'left' or 'right'");
  s.side = side == "right" ? OffsetSide::right : OffsetSide::left;
  return s;
}

PlanOptions plan_options(std::optional<std::size_t> seed_edge, std::size_t headland_passes,
                         double w, std::size_t max_lanes) {
  PlanOptions o;
  o.seed_edge = seed_edge;
  o.headland = {headland_passes, w};
  o.max_lanes = max_lanes;
  return o;
}

FieldContour contour(const std::vector<std::pair<double, double>>& ring) {
  std::vector<Vec2> pts;
  for (const auto& [x, y] : ring) pts.push_back({x, y});
  return FieldContour::from_ring(std::move(pts));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Terrain-following coverage lane planner";

  py::register_exception<Error>(m, "TerracoverError", PyExc_RuntimeError);

  py::class_<UniformGrid>(m, "Grid")
      .def_property_readonly("x0", &UniformGrid::x0)
      .def_property_readonly("y0", &UniformGrid::y0)
      .def_property_readonly("spacing", &UniformGrid::spacing)
      .def_property_readonly("nx", &UniformGrid::nx)
      .def_property_readonly("ny", &UniformGrid::ny)
      .def("elevation", py::overload_cast<double, double>(&UniformGrid::elevation, py::const_),
           py::arg("x"), py::arg("y"));

  py::class_<FieldContour>(m, "Contour")
      .def(py::init(&contour), py::arg("ring"))
      .def_property_readonly("area", &FieldContour::area)
      .def_property_readonly("vertices", [](const FieldContour& c) {
        std::vector<std::pair<double, double>> out;
        for (const auto& v : c.vertices()) out.emplace_back(v.x, v.y);
        return out;
      });

  py::class_<Plan>(m, "Plan")
      .def_property_readonly("lane_count", [](const Plan& p) { return p.lanes.size(); })
      .def("lane_pieces", [](const Plan& p, std::size_t k) {
        std::vector<std::vector<XYZ>> out;
        for (const auto& piece : p.lanes.at(k).pieces) out.push_back(to_tuples(piece));
        return out;
      }, py::arg("lane"))
      .def("lane_points", [](const Plan& p, std::size_t k) {
        py::list out;
        for (const auto& pt : p.lanes.at(k).points) out.append(point_dict(pt));
        return out;
      }, py::arg("lane"));

  m.def("min_tangential_spacing", &min_tangential_spacing, py::arg("working_width"),
        py::arg("max_heading_change"),
        "Minimum reference spacing w*tan(dpsi/2); angle in radians.");

  m.def("blend_roll", [](double b0, double h0, double b1, double h1, double target) {
    return blend_roll({b0, h0}, {b1, h1}, target);
  }, py::arg("beta_prev"), py::arg("height_prev"), py::arg("beta"), py::arg("height"),
        py::arg("target_height"));

  m.def("synth_terrain", [](const std::string& kind, std::tuple<double, double, double, double> extent,
                            double slope, double amplitude, double wavelength, double spacing,
                            bool jittered, std::uint64_t seed) {
    TerrainKind surface = FlatSurface{};
    if (kind == "incline") {
      surface = InclineSurface{slope, {0.0, 1.0}};
    } else if (kind == "sinusoid") {
      surface = SinusoidSurface{amplitude, wavelength, {0.0, 1.0}};
    } else if (kind != "flat") {
      throw py::value_error("kind must be flat, incline or sinusoid");
    }
    SamplePattern pattern;
    pattern.spacing = spacing;
    pattern.seed = seed;
    pattern.layout = jittered ? SamplePattern::Layout::jittered : SamplePattern::Layout::regular;
    const auto [x0, y0, x1, y1] = extent;
    std::vector<XYZ> out;
    for (const auto& s : synth_terrain(AnalyticSurface(surface), {x0, y0, x1, y1}, pattern)) {
      out.emplace_back(s.x, s.y, s.z);
    }
    return out;
  }, py::arg("kind"), py::arg("extent"), py::arg("slope") = 0.2, py::arg("amplitude") = 2.0,
        py::arg("wavelength") = 50.0, py::arg("spacing") = 1.0, py::arg("jittered") = false,
        py::arg("seed") = 1);

  m.def("build_grid", [](const std::vector<XYZ>& samples, double spacing, std::size_t idw_k) {
    std::vector<SamplePoint> pts;
    pts.reserve(samples.size());
    for (const auto& [x, y, z] : samples) pts.push_back({x, y, z});
    GridBuildParams params;
    params.grid_spacing = spacing;
    params.idw_neighbors = idw_k + 1;
    py::gil_scoped_release release;
    return build_uniform_grid(pts, params);
  }, py::arg("samples"), py::arg("grid_spacing") = 1.0, py::arg("idw_k") = 3);

  auto planner = [](bool baseline) {
    return [baseline](const FieldContour& c, const UniformGrid& g, double w, double h, double a,
                      double beta_max, double eps, double dbeta, double dpsi_max,
                      const std::string& side, std::optional<std::size_t> seed_edge,
                      std::size_t headland_passes, std::size_t max_lanes) {
      const VehicleConfig v = vehicle(w, h, a, beta_max);
      const SolverConfig s = solver(eps, dbeta, dpsi_max, side);
      const PlanOptions o = plan_options(seed_edge, headland_passes, w, max_lanes);
      py::gil_scoped_release release;
      return baseline ? baseline_2d_plan(c, g, v, s, o) : plan_field(c, g, v, s, o);
    };
  };
  const auto plan_args = [](py::module_& mod, const char* name, auto fn, const char* doc) {
    mod.def(name, fn, py::arg("contour"), py::arg("grid"), py::arg("width") = 36.0,
            py::arg("height") = 2.0, py::arg("axle") = 1.5, py::arg("beta_max") = 30.0,
            py::arg("eps") = 0.1, py::arg("dbeta") = 1.0, py::arg("dpsi_max") = 30.0,
            py::arg("side") = "left", py::arg("seed_edge") = py::none(),
            py::arg("headland_passes") = 0, py::arg("max_lanes") = 500, doc);
  };
  plan_args(m, "plan_field", planner(false), "Terrain-following lane plan; angles in degrees.");
  plan_args(m, "baseline_2d_plan", planner(true), "Map-plane lanes draped over the terrain.");

  m.def("lateral_deviation", &lateral_deviation, py::arg("a"), py::arg("b"));

  m.def("coverage_report", [](const Plan& p, const UniformGrid& g, double w, double h,
                              double sample_step, double cell) {
    const VehicleConfig v = vehicle(w, h, 1.5, 30.0);
    CoverageReport r;
    {
      py::gil_scoped_release release;
      r = coverage_report(p, g, v, {sample_step, cell});
    }
    return report_dict(r);
  }, py::arg("plan"), py::arg("grid"), py::arg("width") = 36.0, py::arg("height") = 2.0,
        py::arg("sample_step") = 10.0, py::arg("raster_cell") = 0.1);
}
