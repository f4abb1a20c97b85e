#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "terracover/geometry.hpp"
#include "terracover/terrain.hpp"

namespace terracover {

// Analytic test surfaces. `direction` is the unit vector along which the
// surface varies (the uphill direction of an incline, the wave vector of a
// sinusoid).

struct FlatSurface {
  double level = 0.0;
};

struct InclineSurface {
  double slope = 0.0;  // rise over run
  Vec2 direction{0.0, 1.0};
};

struct SinusoidSurface {
  double amplitude = 0.0;
  double wavelength = 1.0;
  Vec2 direction{0.0, 1.0};
};

using TerrainKind = std::variant<FlatSurface, InclineSurface, SinusoidSurface>;

/// Closed-form elevation of a synthetic surface, kept for oracle checks.
class AnalyticSurface {
 public:
  explicit AnalyticSurface(TerrainKind kind);

  double elevation(double x, double y) const;
  double elevation(Vec2 p) const { return elevation(p.x, p.y); }
  /// Surface gradient (dz/dx, dz/dy).
  Vec2 gradient(double x, double y) const;
  const TerrainKind& kind() const { return kind_; }

 private:
  TerrainKind kind_;
};

struct SamplePattern {
  enum class Layout { regular, jittered };
  Layout layout = Layout::regular;
  double spacing = 1.0;
  double jitter = 0.4;  // fraction of spacing, jittered layout only
  std::uint64_t seed = 1;
};

/// Deterministic scattered samples of `surface` over `extent`. The regular
/// layout places samples at extent.min + k*spacing, which coincides with the
/// nodes of a grid built at the same spacing when the extent is aligned.
std::vector<SamplePoint> synth_terrain(const AnalyticSurface& surface, const Bounds& extent,
                                       const SamplePattern& pattern);

}  // namespace terracover
