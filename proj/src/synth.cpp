#include "terracover/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "terracover/error.hpp"

namespace terracover {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vec2 normalized(Vec2 d) {
  const double n = norm(d);
  if (!(n > 0.0)) {
    throw Error(ErrorKind::validation, "terrain_model", "synth_terrain",
                "surface direction must be non-zero");
  }
  // Keep axis-aligned directions exact.
  if (d.x == 0.0) return {0.0, d.y > 0 ? 1.0 : -1.0};
  if (d.y == 0.0) return {d.x > 0 ? 1.0 : -1.0, 0.0};
  return {d.x / n, d.y / n};
}

}  // namespace

AnalyticSurface::AnalyticSurface(TerrainKind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](FlatSurface&) {},
                 [](InclineSurface& s) { s.direction = normalized(s.direction); },
                 [](SinusoidSurface& s) {
                   if (!(s.wavelength > 0.0)) {
                     throw Error(ErrorKind::validation, "terrain_model", "synth_terrain",
                                 "wavelength must be positive");
                   }
                   s.direction = normalized(s.direction);
                 },
             },
             kind_);
}

double AnalyticSurface::elevation(double x, double y) const {
  return std::visit(
      overloaded{
          [](const FlatSurface& s) { return s.level; },
          [&](const InclineSurface& s) {
            return s.slope * (x * s.direction.x + y * s.direction.y);
          },
          [&](const SinusoidSurface& s) {
            const double u = x * s.direction.x + y * s.direction.y;
            return s.amplitude * std::sin(2.0 * kPi * u / s.wavelength);
          },
      },
      kind_);
}

Vec2 AnalyticSurface::gradient(double x, double y) const {
  return std::visit(
      overloaded{
          [](const FlatSurface&) { return Vec2{}; },
          [](const InclineSurface& s) { return s.slope * s.direction; },
          [&](const SinusoidSurface& s) {
            const double k = 2.0 * kPi / s.wavelength;
            const double u = x * s.direction.x + y * s.direction.y;
            return (s.amplitude * k * std::cos(k * u)) * s.direction;
          },
      },
      kind_);
}

std::vector<SamplePoint> synth_terrain(const AnalyticSurface& surface, const Bounds& extent,
                                       const SamplePattern& pattern) {
  if (!(extent.width() > 0.0) || !(extent.height() > 0.0)) {
    throw Error(ErrorKind::validation, "terrain_model", "synth_terrain",
                "extent must be non-degenerate");
  }
  if (!(pattern.spacing > 0.0)) {
    throw Error(ErrorKind::validation, "terrain_model", "synth_terrain",
                "sample spacing must be positive");
  }
  const auto nx = static_cast<std::size_t>(std::floor(extent.width() / pattern.spacing + 1e-9)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor(extent.height() / pattern.spacing + 1e-9)) + 1;

  std::mt19937_64 rng(pattern.seed);
  std::uniform_real_distribution<double> jitter(-pattern.jitter, pattern.jitter);
  const bool jittered = pattern.layout == SamplePattern::Layout::jittered;

  std::vector<SamplePoint> out;
  out.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      double x = extent.min_x + static_cast<double>(i) * pattern.spacing;
      double y = extent.min_y + static_cast<double>(j) * pattern.spacing;
      if (jittered) {
        x = std::clamp(x + jitter(rng) * pattern.spacing, extent.min_x, extent.max_x);
        y = std::clamp(y + jitter(rng) * pattern.spacing, extent.min_y, extent.max_y);
      }
      out.push_back({x, y, surface.elevation(x, y)});
    }
  }
  return out;
}

}  // namespace terracover
