#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "terracover/error.hpp"

using namespace terracover;
using fixtures::rectangle;

namespace {

const double kTheta = std::atan(0.2);

struct Suite {
  UniformGrid terrain;
  FieldContour field;
};

const Suite& flat_suite() {
  static const Suite s{fixtures::analytic_grid(FlatSurface{0.0}, fixtures::padded(100, 400)),
                       rectangle(100, 400)};
  return s;
}

const Suite& incline_suite() {
  static const double height = 396.0 * std::cos(kTheta);
  static const Suite s{
      fixtures::analytic_grid(InclineSurface{0.2, {0, 1}}, fixtures::padded(100, height)),
      rectangle(100, height)};
  return s;
}

std::vector<Polyline3> straight(double y, double z) {
  return {Polyline3{{{0, y, z}, {50, y, z}, {100, y, z}}}};
}

double point_to_pieces(Vec2 p, const std::vector<Polyline3>& pieces) {
  double best = 1e300;
  for (const auto& piece : pieces) {
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      const Vec2 a = piece.points[i].xy(), b = piece.points[i + 1].xy();
      const Vec2 ab = b - a;
      const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
      best = std::min(best, distance(p, a + t * ab));
    }
  }
  return best;
}

// Brute-force directed distances at every vertex plus densely along segments.
double hausdorff_oracle(const std::vector<Polyline3>& a, const std::vector<Polyline3>& b) {
  auto directed = [](const std::vector<Polyline3>& from, const std::vector<Polyline3>& to) {
    double worst = 0.0;
    for (const auto& piece : from) {
      for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
        for (int s = 0; s <= 200; ++s) {
          const Vec3 p = lerp(piece.points[i], piece.points[i + 1], s / 200.0);
          worst = std::max(worst, point_to_pieces(p.xy(), to));
        }
      }
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double max_error(const std::vector<double>& profile) {
  double e = 0.0;
  for (double s : profile) e = std::max(e, std::abs(s - 36.0));
  return e;
}

double pairwise_max_error(const Plan& plan, const UniformGrid& terrain) {
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < plan.lanes.size(); ++k) {
    e = std::max(e, max_error(ground_spacing_profile(plan.lanes[k].pieces,
                                                     plan.lanes[k + 1].pieces, terrain, 10.0,
                                                     2.0)));
  }
  return e;
}

PlanOptions capped(std::size_t lanes) {
  PlanOptions o = fixtures::bottom_seed();
  o.max_lanes = lanes;
  return o;
}

}  // namespace

TEST_CASE("ground spacing between straight lanes") {
  SUBCASE("flat") {
    const auto profile =
        ground_spacing_profile(straight(0, 2), straight(36, 2), flat_suite().terrain, 10.0, 2.0);
    REQUIRE(profile.size() == 11);
    for (double s : profile) CHECK(s == doctest::Approx(36.0).epsilon(1e-9));
  }
  SUBCASE("lanes that do not face each other") {
    const std::vector<Polyline3> far{Polyline3{{{300, 36, 2}, {400, 36, 2}}}};
    CHECK(ground_spacing_profile(straight(0, 2), far, flat_suite().terrain, 10.0, 2.0).empty());
  }
  SUBCASE("samples carry feet and chord tilt") {
    const auto samples =
        ground_spacing_samples(straight(0, 2), straight(36, 2), flat_suite().terrain, 25.0, 2.0);
    REQUIRE(samples.size() == 5);
    for (const auto& s : samples) {
      CHECK(s.foot_from.z == doctest::Approx(0.0));
      CHECK(s.to.y == doctest::Approx(36.0));
      CHECK(s.chord_tilt == doctest::Approx(0.0));
    }
  }
  SUBCASE("invalid step") {
    CHECK_THROWS_AS(
        (void)ground_spacing_profile(straight(0, 2), straight(36, 2), flat_suite().terrain, 0.0, 2.0),
        Error);
  }
}

TEST_CASE("ground spacing on the incline") {
  const Suite& s = incline_suite();
  const Plan plan3d = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
  const Plan base = baseline_2d_plan(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
  REQUIRE(plan3d.lanes.size() >= 2);
  REQUIRE(base.lanes.size() >= 2);
  for (std::size_t k = 0; k + 1 < plan3d.lanes.size(); ++k) {
    for (double v : ground_spacing_profile(plan3d.lanes[k].pieces, plan3d.lanes[k + 1].pieces,
                                           s.terrain, 10.0, 2.0)) {
      CHECK(std::abs(v - 36.0) <= 0.2);
    }
  }
  const double analytic = 36.0 / std::cos(kTheta);
  CHECK(analytic == doctest::Approx(36.713).epsilon(1e-4));
  for (std::size_t k = 0; k + 1 < base.lanes.size(); ++k) {
    for (double v : ground_spacing_profile(base.lanes[k].pieces, base.lanes[k + 1].pieces,
                                           s.terrain, 10.0, 2.0)) {
      CHECK(std::abs(v - analytic) <= 0.05);
    }
  }
}

TEST_CASE("baseline plan") {
  SUBCASE("flat field reduces to the 3D plan") {
    const Suite& s = flat_suite();
    const Plan plan3d = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    const Plan base = baseline_2d_plan(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    CHECK(base.lanes.size() == 11);
    CHECK(plan3d.lanes.size() == 11);
    CHECK(lateral_deviation(base, plan3d) < 1e-6);
  }
  SUBCASE("incline lanes sit exactly w apart in the map plane") {
    const Suite& s = incline_suite();
    const Plan base = baseline_2d_plan(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    for (std::size_t k = 0; k < base.lanes.size(); ++k) {
      for (const auto& p : base.lanes[k].pieces[0].points) {
        CHECK(p.y == doctest::Approx(18.0 + 36.0 * double(k)).epsilon(1e-12));
        CHECK(p.z - s.terrain.elevation(p.xy()) == doctest::Approx(2.0));
      }
    }
  }
  SUBCASE("seed outside the mainfield") {
    const Suite& s = flat_suite();
    PlanOptions o = fixtures::bottom_seed();
    o.headland = {2, 36.0};
    CHECK_THROWS_AS((void)baseline_2d_plan(rectangle(100, 100), s.terrain, {}, {}, o), Error);
  }
}

TEST_CASE("lateral deviation") {
  const Suite& s = flat_suite();
  const Plan plan = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
  CHECK(lateral_deviation(plan, plan) == 0.0);

  Plan shifted = plan;
  for (auto& lane : shifted.lanes) {
    for (auto& piece : lane.pieces) {
      for (auto& p : piece.points) p.y += 2.83;
    }
  }
  CHECK(lateral_deviation(plan, shifted) == doctest::Approx(2.83).epsilon(1e-12));
  CHECK(lateral_deviation(shifted, plan) == doctest::Approx(2.83).epsilon(1e-12));

  Plan fewer = plan;
  fewer.lanes.pop_back();
  CHECK_THROWS_AS((void)lateral_deviation(plan, fewer), Error);
}

TEST_CASE("lateral deviation grows with lane index on the incline") {
  const Suite& s = incline_suite();
  const Plan plan3d = plan_field(s.field, s.terrain, {}, {}, capped(6));
  const Plan base = baseline_2d_plan(s.field, s.terrain, {}, {}, capped(6));
  REQUIRE(plan3d.lanes.size() == base.lanes.size());
  double worst = 0.0, previous = -1.0;
  for (std::size_t k = 0; k < base.lanes.size(); ++k) {
    const double d = hausdorff_oracle(plan3d.lanes[k].pieces, base.lanes[k].pieces);
    CHECK(d > previous);
    previous = d;
    worst = std::max(worst, d);
    if (k > 0) {
      // The 3D seed sits h sin(theta) downhill, then each step is w cos(theta).
      const double expected = 2.0 * std::sin(kTheta) + double(k) * 36.0 * (1.0 - std::cos(kTheta));
      CHECK(d == doctest::Approx(expected).epsilon(0.02));
    }
  }
  CHECK(lateral_deviation(plan3d, base) == doctest::Approx(worst).epsilon(1e-9));
}

TEST_CASE("gap and overlap raster") {
  SUBCASE("flat field exact planner") {
    const Suite& s = flat_suite();
    const Plan plan = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    const auto r = gap_overlap_raster(plan, plan.mainfield, s.terrain, {}, 0.5);
    CHECK(r.gap_fraction <= 0.01);
    CHECK(r.overlap_fraction <= 0.01);
    CHECK(r.domain_cells == 200u * 800u);
    CHECK(r.coverage.size() == r.columns * r.rows);
  }
  SUBCASE("incline baseline leaves a 1 - cos(theta) gap") {
    const Suite& s = incline_suite();
    const Plan base = baseline_2d_plan(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    const auto r = gap_overlap_raster(base, base.mainfield, s.terrain, {}, 0.1);
    CHECK(r.gap_fraction == doctest::Approx(1.0 - std::cos(kTheta)).epsilon(0.15));
    CHECK(r.overlap_fraction <= 0.01);
  }
  SUBCASE("incline 3D plan") {
    const Suite& s = incline_suite();
    const Plan plan = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
    const auto r = gap_overlap_raster(plan, plan.mainfield, s.terrain, {}, 0.1);
    CHECK(r.gap_fraction <= 0.01);
    CHECK(r.overlap_fraction <= 0.01);
  }
  SUBCASE("raster convergence between c and c/2") {
    const Suite& s = incline_suite();
    for (const Plan& plan :
         {plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed()),
          baseline_2d_plan(s.field, s.terrain, {}, {}, fixtures::bottom_seed())}) {
      const auto a = gap_overlap_raster(plan, plan.mainfield, s.terrain, {}, 0.1);
      const auto b = gap_overlap_raster(plan, plan.mainfield, s.terrain, {}, 0.05);
      CHECK(std::abs((a.gap_fraction + a.overlap_fraction) -
                     (b.gap_fraction + b.overlap_fraction)) < 0.005);
    }
  }
  SUBCASE("cell must resolve the boom") {
    const Suite& s = flat_suite();
    const Plan plan = plan_field(s.field, s.terrain, {}, {}, capped(1));
    CHECK_THROWS_AS((void)gap_overlap_raster(plan, plan.mainfield, s.terrain, {}, 4.0), Error);
  }
}

TEST_CASE("3D plan beats the baseline on planar cross slopes") {
  // Curved terrain is left out: a constant boom chord there does not give a
  // constant ground arc, so neither plan holds w along the surface.
  for (double degrees : {5.0, 11.31, 21.8}) {
    CAPTURE(degrees);
    const auto terrain = fixtures::analytic_grid(
        InclineSurface{std::tan(deg_to_rad(degrees)), {0, 1}}, fixtures::padded(100, 200));
    const auto field = rectangle(100, 200);
    const Plan plan3d = plan_field(field, terrain, {}, {}, fixtures::bottom_seed());
    const Plan base = baseline_2d_plan(field, terrain, {}, {}, fixtures::bottom_seed());
    CHECK(pairwise_max_error(plan3d, terrain) < pairwise_max_error(base, terrain));
  }
}

TEST_CASE("coverage report") {
  const Suite& s = incline_suite();
  const Plan plan = plan_field(s.field, s.terrain, {}, {}, fixtures::bottom_seed());
  const auto r = coverage_report(plan, s.terrain, {}, {10.0, 0.5});
  REQUIRE(r.lanes.size() == plan.lanes.size());
  REQUIRE(r.pairs.size() == plan.lanes.size() - 1);
  CHECK(r.gap_fraction >= 0.0);
  CHECK(r.gap_fraction <= 1.0);
  CHECK(r.overlap_fraction >= 0.0);
  CHECK(r.overlap_fraction <= 1.0);
  for (const auto& p : r.pairs) {
    CHECK(p.samples == p.profile.size());
    CHECK(p.max_spacing >= p.mean_spacing);
    CHECK(p.mean_spacing >= p.min_spacing);
    CHECK(p.max_tilt >= p.mean_tilt);
    CHECK(p.max_spacing_error <= r.max_spacing_error);
    // The chord between facing lanes follows the slope.
    CHECK(p.mean_tilt == doctest::Approx(kTheta).epsilon(0.05));
  }
  for (const auto& l : r.lanes) {
    CHECK(l.converged <= l.points);
    CHECK(l.max_height >= l.min_height);
    CHECK(l.excessive_roll == 0);
  }
}
