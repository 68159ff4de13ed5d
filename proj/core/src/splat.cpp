#include "bev/splat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bev {

void BevGridSpec::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("BevGridSpec: resolution must be positive");
  if (nx <= 0 || ny <= 0) throw std::invalid_argument("BevGridSpec: grid dimensions must be positive");
  const double eps = 1e-9;
  if (std::abs((x_max - x_min) / resolution - nx) > eps ||
      std::abs((y_max - y_min) / resolution - ny) > eps) {
    throw std::invalid_argument("BevGridSpec: extent not an exact multiple of resolution");
  }
}

std::optional<CellIndex> cell_index(const Vec3& p_veh, const BevGridSpec& grid) {
  const int ix = static_cast<int>(std::floor((p_veh.x - grid.x_min) / grid.resolution));
  const int iy = static_cast<int>(std::floor((p_veh.y - grid.y_min) / grid.resolution));
  if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny) return std::nullopt;
  return CellIndex{ix, iy};
}

namespace {

void check_aligned(std::span<const FrustumGrid> frustums,
                   std::span<const LiftedFeatures> lifted) {
  if (frustums.size() != lifted.size()) {
    throw std::invalid_argument("splat: frustum/lifted list size mismatch");
  }
  for (std::size_t c = 0; c < frustums.size(); ++c) {
    const auto& f = frustums[c];
    const auto& l = lifted[c];
    if (f.h_cells != l.h_cells || f.w_cells != l.w_cells || f.depth_bins != l.depth_bins) {
      throw std::invalid_argument("splat: frustum/lifted shape mismatch");
    }
    if (l.channels != lifted[0].channels) {
      throw std::invalid_argument("splat: inconsistent channel counts");
    }
  }
}

}  // namespace

BevFeatureMap splat_reference(std::span<const FrustumGrid> frustums,
                              std::span<const LiftedFeatures> lifted,
                              const BevGridSpec& grid) {
  grid.validate();
  check_aligned(frustums, lifted);
  BevFeatureMap map;
  map.grid = grid;
  map.channels = lifted.empty() ? 0 : lifted[0].channels;
  map.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny * map.channels, 0.0);
  for (std::size_t cam = 0; cam < frustums.size(); ++cam) {
    const auto& f = frustums[cam];
    const auto& l = lifted[cam];
    const int ch = l.channels;
    std::size_t p = 0;  // flat (i, j, k) index
    for (int i = 0; i < f.h_cells; ++i) {
      for (int j = 0; j < f.w_cells; ++j) {
        for (int k = 0; k < f.depth_bins; ++k, ++p) {
          const Vec3 pt{f.points[3 * p], f.points[3 * p + 1], f.points[3 * p + 2]};
          const auto cell = cell_index(pt, grid);
          if (!cell) continue;
          double* dst = map.values.data() +
                        (static_cast<std::size_t>(cell->ix) * grid.ny + cell->iy) * ch;
          const double* src = l.values.data() + p * ch;
          for (int c = 0; c < ch; ++c) dst[c] += src[c];
        }
      }
    }
  }
  return map;
}

BevFeatureMap splat_sorted(std::span<const FrustumGrid> frustums,
                           std::span<const LiftedFeatures> lifted,
                           const BevGridSpec& grid) {
  grid.validate();
  check_aligned(frustums, lifted);
  BevFeatureMap map;
  map.grid = grid;
  map.channels = lifted.empty() ? 0 : lifted[0].channels;
  map.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny * map.channels, 0.0);
  if (lifted.empty()) return map;

  // Flat cell keys per point; key 0 is reserved for out-of-range points so a
  // counting sort can bucket everything in one histogram.
  std::size_t total = 0;
  for (const auto& f : frustums) {
    total += static_cast<std::size_t>(f.h_cells) * f.w_cells * f.depth_bins;
  }
  const std::size_t n_cells = static_cast<std::size_t>(grid.nx) * grid.ny;
  std::vector<std::uint32_t> keys(total);
  std::vector<std::uint32_t> point_cam(total);
  std::vector<std::uint32_t> point_flat(total);
  std::size_t idx = 0;
  for (std::size_t cam = 0; cam < frustums.size(); ++cam) {
    const auto& f = frustums[cam];
    const std::size_t n = static_cast<std::size_t>(f.h_cells) * f.w_cells * f.depth_bins;
    for (std::size_t p = 0; p < n; ++p, ++idx) {
      const Vec3 pt{f.points[3 * p], f.points[3 * p + 1], f.points[3 * p + 2]};
      const auto cell = cell_index(pt, grid);
      keys[idx] = cell ? 1 + static_cast<std::uint32_t>(cell->ix) * grid.ny + cell->iy : 0;
      point_cam[idx] = static_cast<std::uint32_t>(cam);
      point_flat[idx] = static_cast<std::uint32_t>(p);
    }
  }

  // Counting sort by key. Scanning points in their original (camera, i, j, k)
  // order keeps each key's segment in exactly the accumulation order of the
  // reference loop, so the per-cell float sums are bitwise identical.
  std::vector<std::uint32_t> seg_start(n_cells + 2, 0);
  for (const auto k : keys) ++seg_start[k + 1];
  for (std::size_t k = 1; k < seg_start.size(); ++k) seg_start[k] += seg_start[k - 1];
  std::vector<std::uint32_t> order(total);
  {
    std::vector<std::uint32_t> cursor(seg_start.begin(), seg_start.end() - 1);
    for (std::size_t p = 0; p < total; ++p) order[cursor[keys[p]]++] = static_cast<std::uint32_t>(p);
  }

  const int ch = map.channels;
  for (std::size_t key = 1; key <= n_cells; ++key) {
    const std::uint32_t s = seg_start[key];
    const std::uint32_t e = seg_start[key + 1];
    if (s == e) continue;
    double* dst = map.values.data() + (key - 1) * ch;
    for (std::uint32_t q = s; q < e; ++q) {
      const std::uint32_t p = order[q];
      const double* src =
          lifted[point_cam[p]].values.data() + static_cast<std::size_t>(point_flat[p]) * ch;
      for (int c = 0; c < ch; ++c) dst[c] += src[c];
    }
  }
  return map;
}

double bev_mass(const BevFeatureMap& map, int channel) {
  if (channel < 0 || channel >= map.channels) {
    throw std::invalid_argument("bev_mass: channel index out of range");
  }
  double sum = 0.0;
  const std::size_t cells = static_cast<std::size_t>(map.grid.nx) * map.grid.ny;
  for (std::size_t i = 0; i < cells; ++i) sum += map.values[i * map.channels + channel];
  return sum;
}

}  // namespace bev
