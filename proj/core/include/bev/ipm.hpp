#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bev/geometry.hpp"
#include "bev/splat.hpp"

namespace bev {

struct SemanticImage {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::vector<int> labels;  // [v][u], entries < num_classes

  int at(int v, int u) const { return labels[static_cast<std::size_t>(v) * width + u]; }
  int& at(int v, int u) { return labels[static_cast<std::size_t>(v) * width + u]; }
};

// Class-id grid in the vehicle frame; 0 means unknown/empty.
struct SemanticBevMap {
  BevGridSpec grid;
  int num_classes = 0;
  std::vector<int> labels;  // [ix][iy]

  static SemanticBevMap empty(const BevGridSpec& g, int num_classes);
  int at(int ix, int iy) const { return labels[static_cast<std::size_t>(ix) * grid.ny + iy]; }
  int& at(int ix, int iy) { return labels[static_cast<std::size_t>(ix) * grid.ny + iy]; }
};

// Intersection of the ray through pixel (u, v) with the vehicle-frame plane
// z = 0. Requires the camera center above ground (translation z > 0); rays at
// or above the horizontal return nullopt.
std::optional<Vec3> ground_intersection(double u, double v, const CameraModel& cam);

// Projects every pixel's label onto the ground plane. Cell conflicts keep the
// label observed from the smaller ground distance to the camera.
SemanticBevMap ipm_rasterize(const SemanticImage& img, const CameraModel& cam,
                             const BevGridSpec& grid);

// Multi-camera fusion with the same nearest-observation rule applied across
// cameras. Images are aligned with rig.cameras by index.
SemanticBevMap ipm_rasterize_rig(std::span<const SemanticImage> images,
                                 const CameraRig& rig, const BevGridSpec& grid);

}  // namespace bev
