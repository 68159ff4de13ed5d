#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bev/geometry.hpp"
#include "bev/ipm.hpp"
#include "bev/object_bev.hpp"

namespace bev {

// A box resting on the ground plane: center z is always height / 2.
struct SceneObject {
  int class_id = cls::kVehicle;
  Vec3 center;
  double length = 0.0;  // meters, along the yaw axis
  double width = 0.0;
  double height = 0.0;
  double yaw = 0.0;  // radians
};

// Axis-aligned ground rectangle carrying the road label.
struct RoadRect {
  double x_min = -50.0;
  double x_max = 50.0;
  double y_min = -5.0;
  double y_max = 5.0;

  bool contains(double x, double y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
};

struct Scene {
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;
  RoadRect road;
  CameraRig rig;
};

struct SceneGenParams {
  int min_objects = 5;
  int max_objects = 10;
  double placement_radius = 40.0;   // meters from the ego origin
  double min_center_distance = 6.0; // keeps footprints clear of the rig
  int max_rejections = 10000;
};

// Standard rig: front, front-left, front-right, rear, rear-left, rear-right,
// plus side-left when n_cameras == 7. Cameras are level (no pitch) at 1.6 m.
CameraRig make_default_rig(int n_cameras = 6, int width = 640, int height = 360,
                           double focal = 400.0, double camera_height = 1.6);

// Deterministic world sampling: classes uniform over the four object
// categories, centers area-uniform in the placement annulus, yaw uniform,
// rejection-sampled so footprint circles never overlap each other or the ego
// exclusion zone. Throws std::runtime_error after max_rejections failures.
Scene generate_scene(std::uint64_t seed, const SceneGenParams& params,
                     CameraRig rig = make_default_rig());

// Everything one analytic render pass produces for a camera.
struct RenderOutput {
  std::vector<double> depth;  // [v][u], camera-frame z in meters, +inf for sky
  SemanticImage semantic;
  std::vector<Detection2D> detections;        // confidence 1.0, tight boxes
  std::vector<int> detection_object;          // scene object index per detection
  std::vector<int> winner;                    // per pixel: object index, kGroundHit, or kSkyHit
  std::vector<int> visible_pixels;            // per scene object
  std::vector<int> silhouette_pixels;         // per scene object, ignoring occlusion

  static constexpr int kGroundHit = -1;
  static constexpr int kSkyHit = -2;
};

// Per-pixel nearest intersection against all object boxes (slab test in the
// yaw frame) and the ground plane. Rays go through pixel centers.
RenderOutput render_camera(const Scene& scene, const CameraModel& cam,
                           int min_visible_pixels = 50);

std::vector<double> render_depth(const Scene& scene, const CameraModel& cam);
SemanticImage render_semantic(const Scene& scene, const CameraModel& cam);
std::vector<Detection2D> perfect_detections(const Scene& scene, const CameraModel& cam,
                                            int min_visible_pixels = 50);

// Rasterized ground truth: road rectangle first, object footprints painted on
// top (cell-center containment), plus the exact object list with true yaw and
// dimensions.
std::pair<SemanticBevMap, std::vector<BevObject>> ground_truth_bev(const Scene& scene,
                                                                   const BevGridSpec& grid);

// Camera-frame z depth of a scene object's center as seen from `cam`.
double object_center_depth(const SceneObject& obj, const CameraModel& cam);

}  // namespace bev
