#include "bev/ipm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bev {

SemanticBevMap SemanticBevMap::empty(const BevGridSpec& g, int num_classes) {
  SemanticBevMap m;
  m.grid = g;
  m.num_classes = num_classes;
  m.labels.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  return m;
}

std::optional<Vec3> ground_intersection(double u, double v, const CameraModel& cam) {
  if (!(cam.extrinsics.translation.z > 0.0)) {
    throw std::invalid_argument("ground_intersection: camera center must be above ground");
  }
  // Direction parameterized by camera depth: p(d) = t + d * R K^-1 (u, v, 1).
  const Vec3 dir_cam = unproject_pixel(u, v, 1.0, cam.intrinsics);
  const Vec3 dir = quat_to_matrix(cam.extrinsics.rotation) * dir_cam;
  if (dir.z >= -1e-9) return std::nullopt;  // horizon or sky ray
  const double d = -cam.extrinsics.translation.z / dir.z;
  if (d <= 0.0) return std::nullopt;
  Vec3 p = cam.extrinsics.translation + dir * d;
  p.z = 0.0;
  return p;
}

namespace {

// Accumulates one camera's pixels into the label/distance buffers;
// nearest ground observation wins.
void ipm_accumulate(const SemanticImage& img, const CameraModel& cam,
                    const BevGridSpec& grid, std::vector<int>& labels,
                    std::vector<double>& best_dist) {
  if (img.height != cam.intrinsics.height || img.width != cam.intrinsics.width) {
    throw std::invalid_argument("ipm: image shape does not match intrinsics");
  }
  const Vec3 t = cam.extrinsics.translation;
  for (int py = 0; py < img.height; ++py) {
    for (int px = 0; px < img.width; ++px) {
      const auto hit = ground_intersection(px + 0.5, py + 0.5, cam);
      if (!hit) continue;
      const auto cell = cell_index(*hit, grid);
      if (!cell) continue;
      const double dx = hit->x - t.x;
      const double dy = hit->y - t.y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const std::size_t flat = static_cast<std::size_t>(cell->ix) * grid.ny + cell->iy;
      if (dist < best_dist[flat]) {
        best_dist[flat] = dist;
        labels[flat] = img.at(py, px);
      }
    }
  }
}

}  // namespace

SemanticBevMap ipm_rasterize(const SemanticImage& img, const CameraModel& cam,
                             const BevGridSpec& grid) {
  grid.validate();
  SemanticBevMap out = SemanticBevMap::empty(grid, img.num_classes);
  std::vector<double> best(out.labels.size(), std::numeric_limits<double>::infinity());
  ipm_accumulate(img, cam, grid, out.labels, best);
  return out;
}

SemanticBevMap ipm_rasterize_rig(std::span<const SemanticImage> images,
                                 const CameraRig& rig, const BevGridSpec& grid) {
  grid.validate();
  if (images.size() != rig.cameras.size()) {
    throw std::invalid_argument("ipm_rasterize_rig: image count != camera count");
  }
  const int num_classes = images.empty() ? 0 : images[0].num_classes;
  SemanticBevMap out = SemanticBevMap::empty(grid, num_classes);
  std::vector<double> best(out.labels.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < images.size(); ++c) {
    ipm_accumulate(images[c], rig.cameras[c], grid, out.labels, best);
  }
  return out;
}

}  // namespace bev
