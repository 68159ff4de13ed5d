#include "bev/geometry.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace bev {

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Quaternion::normalized: zero or non-finite norm");
  }
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw std::invalid_argument("from_axis_angle: zero axis");
  const double half = 0.5 * angle;
  const double s = std::sin(half) / n;
  return {std::cos(half), axis.x * s, axis.y * s, axis.z * s};
}

Mat3 quat_to_matrix(const Quaternion& q) {
  if (!q.is_unit(1e-9)) {
    throw std::invalid_argument("quat_to_matrix: quaternion norm deviates from 1 by more than 1e-9");
  }
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - w * z);
  r(0, 2) = 2 * (x * z + w * y);
  r(1, 0) = 2 * (x * y + w * z);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - w * x);
  r(2, 0) = 2 * (x * z - w * y);
  r(2, 1) = 2 * (y * z + w * x);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return r;
}

Quaternion quat_from_matrix(const Mat3& r) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  Quaternion q;
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q.w = 0.25 * s;
    q.x = (r(2, 1) - r(1, 2)) / s;
    q.y = (r(0, 2) - r(2, 0)) / s;
    q.z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  if (q.w < 0.0) {
    q.w = -q.w;
    q.x = -q.x;
    q.y = -q.y;
    q.z = -q.z;
  }
  return q.normalized();
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image dimensions must be positive");
  if (!(cx > 0.0 && cx < width)) throw std::invalid_argument("intrinsics: cx outside image");
  if (!(cy > 0.0 && cy < height)) throw std::invalid_argument("intrinsics: cy outside image");
}

void CameraRig::validate() const {
  if (cameras.empty()) throw std::invalid_argument("rig: no cameras");
  std::set<std::string> names;
  for (const auto& cam : cameras) {
    cam.intrinsics.validate();
    if (!cam.extrinsics.rotation.is_unit(1e-9)) {
      throw std::invalid_argument("rig: camera '" + cam.name + "' has a non-unit rotation");
    }
    if (!names.insert(cam.name).second) {
      throw std::invalid_argument("rig: duplicate camera name '" + cam.name + "'");
    }
  }
}

const CameraModel* CameraRig::find(const std::string& name) const {
  for (const auto& cam : cameras)
    if (cam.name == name) return &cam;
  return nullptr;
}

DepthBinning DepthBinning::uniform(double d_min, double d_max, int count) {
  if (count < 1 || !(d_min > 0.0) || !(d_max >= d_min)) {
    throw std::invalid_argument("DepthBinning::uniform: invalid range");
  }
  DepthBinning b;
  b.d_min = d_min;
  b.d_max = d_max;
  b.count = count;
  b.centers.resize(count);
  if (count == 1) {
    b.centers[0] = d_min;
  } else {
    const double step = (d_max - d_min) / (count - 1);
    for (int i = 0; i < count; ++i) b.centers[i] = d_min + i * step;
    b.centers[count - 1] = d_max;
  }
  return b;
}

void DepthBinning::validate() const {
  if (static_cast<int>(centers.size()) != count || count < 1) {
    throw std::invalid_argument("DepthBinning: centers size mismatch");
  }
  if (centers.front() != d_min || centers.back() != d_max) {
    throw std::invalid_argument("DepthBinning: centers must span [d_min, d_max]");
  }
  for (int i = 1; i < count; ++i) {
    if (!(centers[i] > centers[i - 1])) {
      throw std::invalid_argument("DepthBinning: centers must be strictly increasing");
    }
  }
}

FeatureGridSpec FeatureGridSpec::for_image(const CameraIntrinsics& intr, int stride) {
  if (stride <= 0) throw std::invalid_argument("FeatureGridSpec: stride must be positive");
  if (intr.width % stride != 0 || intr.height % stride != 0) {
    throw std::invalid_argument("FeatureGridSpec: stride does not divide image dimensions");
  }
  FeatureGridSpec g;
  g.stride = stride;
  g.h_cells = intr.height / stride;
  g.w_cells = intr.width / stride;
  return g;
}

Vec3 unproject_pixel(double u, double v, double d, const CameraIntrinsics& intr) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw std::invalid_argument("unproject_pixel: depth must be positive and finite");
  }
  return {d * (u - intr.cx) / intr.fx, d * (v - intr.cy) / intr.fy, d};
}

Vec3 camera_to_vehicle(const Vec3& p_cam, const CameraExtrinsics& ext) {
  return quat_to_matrix(ext.rotation) * p_cam + ext.translation;
}

Vec3 vehicle_to_camera(const Vec3& p_veh, const CameraExtrinsics& ext) {
  return quat_to_matrix(ext.rotation).transposed() * (p_veh - ext.translation);
}

std::optional<PixelProjection> vehicle_to_pixel(const Vec3& p_veh, const CameraModel& cam) {
  const Vec3 p_cam = vehicle_to_camera(p_veh, cam.extrinsics);
  if (p_cam.z <= 1e-9) return std::nullopt;
  const auto& k = cam.intrinsics;
  return PixelProjection{k.cx + k.fx * p_cam.x / p_cam.z,
                         k.cy + k.fy * p_cam.y / p_cam.z, p_cam.z};
}

FrustumGrid build_frustum(const CameraModel& cam, const DepthBinning& bins,
                          const FeatureGridSpec& grid) {
  if (grid.h_cells * grid.stride != cam.intrinsics.height ||
      grid.w_cells * grid.stride != cam.intrinsics.width) {
    throw std::invalid_argument("build_frustum: grid inconsistent with intrinsics");
  }
  bins.validate();
  FrustumGrid f;
  f.h_cells = grid.h_cells;
  f.w_cells = grid.w_cells;
  f.depth_bins = bins.count;
  f.camera_name = cam.name;
  f.points.resize(static_cast<std::size_t>(grid.h_cells) * grid.w_cells * bins.count * 3);
  std::size_t idx = 0;
  for (int i = 0; i < grid.h_cells; ++i) {
    const double v = (i + 0.5) * grid.stride;
    for (int j = 0; j < grid.w_cells; ++j) {
      const double u = (j + 0.5) * grid.stride;
      for (int k = 0; k < bins.count; ++k) {
        const Vec3 p = camera_to_vehicle(
            unproject_pixel(u, v, bins.centers[k], cam.intrinsics), cam.extrinsics);
        f.points[idx++] = p.x;
        f.points[idx++] = p.y;
        f.points[idx++] = p.z;
      }
    }
  }
  return f;
}

}  // namespace bev
