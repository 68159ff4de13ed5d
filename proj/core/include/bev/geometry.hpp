#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace bev {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Rotation quaternion (w, x, y, z). Kept as a plain aggregate: callers that
// build one from raw components are expected to normalize explicitly;
// operations that require a rotation validate unit norm and throw.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  bool is_unit(double tol = 1e-9) const { return std::abs(norm() - 1.0) <= tol; }

  Quaternion normalized() const;

  // Hamilton product.
  Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  static Quaternion identity() { return {1, 0, 0, 0}; }
  static Quaternion from_axis_angle(const Vec3& axis, double angle);
};

// q must be unit within 1e-9, otherwise throws std::invalid_argument.
Mat3 quat_to_matrix(const Quaternion& q);

// Inverse conversion (Shepperd's method); used when assembling rigs from
// matrix-valued poses. Result has w >= 0.
Quaternion quat_from_matrix(const Mat3& r);

struct CameraIntrinsics {
  double fx = 0.0;  // pixels
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;  // pixels
  int height = 0;

  // fx,fy > 0 and the principal point strictly inside the image.
  void validate() const;
};

// Rigid transform taking camera-frame points into the vehicle frame.
struct CameraExtrinsics {
  Quaternion rotation;
  Vec3 translation;  // meters
};

struct CameraModel {
  std::string name;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

struct CameraRig {
  std::vector<CameraModel> cameras;

  // Non-empty, names unique.
  void validate() const;
  const CameraModel* find(const std::string& name) const;
};

// Discretization of the metric depth range into `count` bin centers.
struct DepthBinning {
  double d_min = 1.0;   // meters
  double d_max = 60.0;  // meters
  int count = 60;
  std::vector<double> centers;

  // Uniformly spaced centers with centers[0] = d_min, centers[count-1] = d_max.
  static DepthBinning uniform(double d_min = 1.0, double d_max = 60.0, int count = 60);
  void validate() const;
};

// Feature lattice at a fixed pixel stride; the anchor of cell (i, j) is the
// patch center ((j + 0.5) * stride, (i + 0.5) * stride).
struct FeatureGridSpec {
  int stride = 8;  // pixels per feature cell
  int h_cells = 0;
  int w_cells = 0;

  // Throws unless stride divides both image dimensions exactly.
  static FeatureGridSpec for_image(const CameraIntrinsics& intr, int stride = 8);
};

// Dense lattice of vehicle-frame points, one per (feature cell, depth bin).
struct FrustumGrid {
  int h_cells = 0;
  int w_cells = 0;
  int depth_bins = 0;
  std::string camera_name;
  std::vector<double> points;  // [h][w][d][3]

  Vec3 at(int i, int j, int k) const {
    const std::size_t base =
        3 * (static_cast<std::size_t>((i * w_cells + j)) * depth_bins + k);
    return {points[base], points[base + 1], points[base + 2]};
  }
};

// p_cam = d * K^-1 (u, v, 1)^T. Camera frame: z forward, x right, y down.
// Throws std::invalid_argument for d <= 0 or non-finite inputs.
Vec3 unproject_pixel(double u, double v, double d, const CameraIntrinsics& intr);

// p_veh = R p_cam + t.
Vec3 camera_to_vehicle(const Vec3& p_cam, const CameraExtrinsics& ext);

// Inverse of camera_to_vehicle: p_cam = R^T (p_veh - t).
Vec3 vehicle_to_camera(const Vec3& p_veh, const CameraExtrinsics& ext);

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame z, meters
};

// Projects a vehicle-frame point into the image. Returns nullopt when the
// point lies at or behind the camera plane (camera-frame z <= 1e-9); the
// returned pixel may fall outside the image bounds.
std::optional<PixelProjection> vehicle_to_pixel(const Vec3& p_veh, const CameraModel& cam);

// Dense frustum lattice for one camera. Every point goes through
// unproject_pixel and camera_to_vehicle so downstream consumers see exactly
// the same arithmetic as single-point queries.
FrustumGrid build_frustum(const CameraModel& cam, const DepthBinning& bins,
                          const FeatureGridSpec& grid);

}  // namespace bev
