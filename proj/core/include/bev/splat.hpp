#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bev/geometry.hpp"
#include "bev/lift.hpp"

namespace bev {

// Vehicle-frame BEV grid; half-open cell intervals [low, high).
struct BevGridSpec {
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -50.0;
  double y_max = 50.0;
  double resolution = 0.5;  // meters per cell
  int nx = 200;
  int ny = 200;

  static BevGridSpec standard() { return BevGridSpec{}; }
  void validate() const;
  Vec2 cell_center(int ix, int iy) const {
    return {x_min + (ix + 0.5) * resolution, y_min + (iy + 0.5) * resolution};
  }
  bool operator==(const BevGridSpec&) const = default;
};

struct CellIndex {
  int ix = 0;
  int iy = 0;
};

// Floor bucketing of the (x, y) components; z is ignored (full column
// collapse). Out-of-range points map to nullopt.
std::optional<CellIndex> cell_index(const Vec3& p_veh, const BevGridSpec& grid);

struct BevFeatureMap {
  BevGridSpec grid;
  int channels = 0;
  std::vector<double> values;  // [nx][ny][c]

  double at(int ix, int iy, int c) const {
    return values[(static_cast<std::size_t>(ix) * grid.ny + iy) * channels + c];
  }
  double& at(int ix, int iy, int c) {
    return values[(static_cast<std::size_t>(ix) * grid.ny + iy) * channels + c];
  }
};

// Scatter-sum of lifted features onto the grid. Plain nested loops; points
// accumulate in ascending (camera, i, j, k) order. The reference the sorted
// implementation is checked against.
BevFeatureMap splat_reference(std::span<const FrustumGrid> frustums,
                              std::span<const LiftedFeatures> lifted,
                              const BevGridSpec& grid);

// Sort-and-segment-reduce implementation. Stable sort by flat cell key keeps
// the per-cell accumulation order identical to splat_reference, so outputs
// are bitwise equal.
BevFeatureMap splat_sorted(std::span<const FrustumGrid> frustums,
                           std::span<const LiftedFeatures> lifted,
                           const BevGridSpec& grid);

// Sum of one channel over all cells.
double bev_mass(const BevFeatureMap& map, int channel);

}  // namespace bev
