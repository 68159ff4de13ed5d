#include "bev/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bev/rng.hpp"

namespace bev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClassShape {
  int class_id;
  double length, width, height;
};

// Footprints follow the per-class defaults used for detection placement.
constexpr ClassShape kShapes[] = {
    {cls::kVehicle, 4.5, 2.0, 1.5},
    {cls::kPedestrian, 0.6, 0.6, 1.8},
    {cls::kCyclist, 1.8, 0.6, 1.6},
    {cls::kTrafficSign, 0.4, 0.4, 0.8},
};

double footprint_radius(const SceneObject& obj) {
  return 0.5 * std::hypot(obj.length, obj.width);
}

}  // namespace

CameraRig make_default_rig(int n_cameras, int width, int height, double focal,
                           double camera_height) {
  if (n_cameras != 6 && n_cameras != 7) {
    throw std::invalid_argument("make_default_rig: supports 6 or 7 cameras");
  }
  struct Mount {
    const char* name;
    double yaw_deg;
    double tx, ty;
  };
  const Mount mounts[] = {
      {"front", 0.0, 1.5, 0.0},        {"front-left", 55.0, 1.0, 0.9},
      {"front-right", -55.0, 1.0, -0.9}, {"rear", 180.0, -1.5, 0.0},
      {"rear-left", 110.0, -1.0, 0.9}, {"rear-right", -110.0, -1.0, -0.9},
      {"side-left", 90.0, 0.0, 1.0},
  };
  // Base rotation: camera z-forward/x-right/y-down onto vehicle
  // x-forward/y-left/z-up.
  Mat3 base;
  base(0, 0) = 0; base(0, 1) = 0; base(0, 2) = 1;
  base(1, 0) = -1; base(1, 1) = 0; base(1, 2) = 0;
  base(2, 0) = 0; base(2, 1) = -1; base(2, 2) = 0;

  CameraRig rig;
  for (int c = 0; c < n_cameras; ++c) {
    const Mount& m = mounts[c];
    const double yaw = m.yaw_deg * std::numbers::pi / 180.0;
    Mat3 rz = Mat3::identity();
    rz(0, 0) = std::cos(yaw); rz(0, 1) = -std::sin(yaw);
    rz(1, 0) = std::sin(yaw); rz(1, 1) = std::cos(yaw);

    CameraModel cam;
    cam.name = m.name;
    cam.intrinsics = {focal, focal, width / 2.0, height / 2.0, width, height};
    cam.extrinsics.rotation = quat_from_matrix(rz * base);
    cam.extrinsics.translation = {m.tx, m.ty, camera_height};
    rig.cameras.push_back(std::move(cam));
  }
  rig.validate();
  return rig;
}

Scene generate_scene(std::uint64_t seed, const SceneGenParams& params, CameraRig rig) {
  if (params.min_objects < 0 || params.max_objects < params.min_objects) {
    throw std::invalid_argument("generate_scene: bad object count range");
  }
  rig.validate();
  Scene scene;
  scene.seed = seed;
  scene.rig = std::move(rig);

  Rng rng(seed);
  const int count = rng.uniform_int(params.min_objects, params.max_objects);
  const double r0 = params.min_center_distance;
  const double r1 = std::max(params.placement_radius, r0);
  int rejections = 0;
  while (static_cast<int>(scene.objects.size()) < count) {
    const ClassShape& shape = kShapes[rng.uniform_int(0, 3)];
    SceneObject obj;
    obj.class_id = shape.class_id;
    obj.length = shape.length;
    obj.width = shape.width;
    obj.height = shape.height;
    obj.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double r = std::sqrt(rng.uniform(r0 * r0, r1 * r1));  // area uniform
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    obj.center = {r * std::cos(theta), r * std::sin(theta), shape.height / 2.0};

    bool ok = std::hypot(obj.center.x, obj.center.y) >= footprint_radius(obj) + 2.5;
    for (const auto& other : scene.objects) {
      if (!ok) break;
      const double d = std::hypot(obj.center.x - other.center.x,
                                  obj.center.y - other.center.y);
      ok = d >= footprint_radius(obj) + footprint_radius(other) + 0.2;
    }
    if (ok) {
      scene.objects.push_back(obj);
    } else if (++rejections > params.max_rejections) {
      throw std::runtime_error("generate_scene: placement failed after too many rejections");
    }
  }
  return scene;
}

namespace {

// Precomputed per-object data for the ray caster.
struct BoxFrame {
  double cx, cy, cz;
  double cos_yaw, sin_yaw;
  double hx, hy, hz;  // half extents
};

BoxFrame make_box_frame(const SceneObject& o) {
  return {o.center.x, o.center.y, o.center.z,
          std::cos(o.yaw), std::sin(o.yaw),
          0.5 * o.length, 0.5 * o.width, 0.5 * o.height};
}

// Slab intersection in the box frame. Ray: origin + d * dir, d is the camera
// depth parameter. Returns entry depth or +inf.
double ray_box_entry(const Vec3& origin, const Vec3& dir, const BoxFrame& b) {
  // Rotate into the yaw frame.
  const double ox = origin.x - b.cx, oy = origin.y - b.cy, oz = origin.z - b.cz;
  const double lox = b.cos_yaw * ox + b.sin_yaw * oy;
  const double loy = -b.sin_yaw * ox + b.cos_yaw * oy;
  const double ldx = b.cos_yaw * dir.x + b.sin_yaw * dir.y;
  const double ldy = -b.sin_yaw * dir.x + b.cos_yaw * dir.y;

  double t0 = 0.0, t1 = kInf;
  const double lo[3] = {lox, loy, oz};
  const double ld[3] = {ldx, ldy, dir.z};
  const double half[3] = {b.hx, b.hy, b.hz};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(ld[a]) < 1e-12) {
      if (std::abs(lo[a]) > half[a]) return kInf;
      continue;
    }
    double ta = (-half[a] - lo[a]) / ld[a];
    double tb = (half[a] - lo[a]) / ld[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kInf;
  }
  return t0 > 1e-9 ? t0 : kInf;
}

}  // namespace

RenderOutput render_camera(const Scene& scene, const CameraModel& cam,
                           int min_visible_pixels) {
  if (!(cam.extrinsics.translation.z > 0.0)) {
    throw std::invalid_argument("render_camera: camera must be above ground");
  }
  const int w = cam.intrinsics.width;
  const int h = cam.intrinsics.height;
  const Mat3 rot = quat_to_matrix(cam.extrinsics.rotation);
  const Vec3 origin = cam.extrinsics.translation;
  const int n_obj = static_cast<int>(scene.objects.size());

  std::vector<BoxFrame> boxes;
  boxes.reserve(n_obj);
  for (const auto& o : scene.objects) boxes.push_back(make_box_frame(o));

  RenderOutput out;
  out.depth.assign(static_cast<std::size_t>(h) * w, kInf);
  out.semantic.height = h;
  out.semantic.width = w;
  out.semantic.num_classes = cls::kCount;
  out.semantic.labels.assign(out.depth.size(), cls::kBackground);
  out.winner.assign(out.depth.size(), RenderOutput::kSkyHit);
  out.visible_pixels.assign(n_obj, 0);
  out.silhouette_pixels.assign(n_obj, 0);

  struct Bounds {
    int u0 = std::numeric_limits<int>::max(), v0 = std::numeric_limits<int>::max();
    int u1 = -1, v1 = -1;
  };
  std::vector<Bounds> bbox(n_obj);

  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const Vec3 dir_cam = unproject_pixel(px + 0.5, py + 0.5, 1.0, cam.intrinsics);
      const Vec3 dir = rot * dir_cam;

      double best = kInf;
      int winner = RenderOutput::kSkyHit;
      if (dir.z < -1e-9) {
        const double d_ground = -origin.z / dir.z;
        if (d_ground > 1e-9) {
          best = d_ground;
          winner = RenderOutput::kGroundHit;
        }
      }
      for (int oi = 0; oi < n_obj; ++oi) {
        const double d = ray_box_entry(origin, dir, boxes[oi]);
        if (d < kInf) {
          out.silhouette_pixels[oi]++;
          if (d < best) {
            best = d;
            winner = oi;
          }
        }
      }

      const std::size_t flat = static_cast<std::size_t>(py) * w + px;
      out.winner[flat] = winner;
      if (winner == RenderOutput::kSkyHit) continue;
      out.depth[flat] = best;
      if (winner == RenderOutput::kGroundHit) {
        const Vec3 hit = origin + dir * best;
        out.semantic.labels[flat] =
            scene.road.contains(hit.x, hit.y) ? cls::kRoad : cls::kBackground;
      } else {
        out.semantic.labels[flat] = scene.objects[winner].class_id;
        out.visible_pixels[winner]++;
        Bounds& bb = bbox[winner];
        bb.u0 = std::min(bb.u0, px);
        bb.v0 = std::min(bb.v0, py);
        bb.u1 = std::max(bb.u1, px);
        bb.v1 = std::max(bb.v1, py);
      }
    }
  }

  for (int oi = 0; oi < n_obj; ++oi) {
    if (out.visible_pixels[oi] < min_visible_pixels) continue;
    Detection2D det;
    det.camera_name = cam.name;
    det.u_min = bbox[oi].u0;
    det.v_min = bbox[oi].v0;
    det.u_max = bbox[oi].u1 + 1.0;
    det.v_max = bbox[oi].v1 + 1.0;
    det.class_id = scene.objects[oi].class_id;
    det.confidence = 1.0;
    out.detections.push_back(std::move(det));
    out.detection_object.push_back(oi);
  }
  return out;
}

std::vector<double> render_depth(const Scene& scene, const CameraModel& cam) {
  return render_camera(scene, cam).depth;
}

SemanticImage render_semantic(const Scene& scene, const CameraModel& cam) {
  return render_camera(scene, cam).semantic;
}

std::vector<Detection2D> perfect_detections(const Scene& scene, const CameraModel& cam,
                                            int min_visible_pixels) {
  return render_camera(scene, cam, min_visible_pixels).detections;
}

std::pair<SemanticBevMap, std::vector<BevObject>> ground_truth_bev(const Scene& scene,
                                                                   const BevGridSpec& grid) {
  grid.validate();
  SemanticBevMap map = SemanticBevMap::empty(grid, cls::kCount);
  for (int ix = 0; ix < grid.nx; ++ix) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      const Vec2 c = grid.cell_center(ix, iy);
      if (scene.road.contains(c.x, c.y)) map.at(ix, iy) = cls::kRoad;
    }
  }

  std::vector<BevObject> objects;
  objects.reserve(scene.objects.size());
  for (const auto& o : scene.objects) {
    BevObject b;
    b.x = o.center.x;
    b.y = o.center.y;
    b.yaw = o.yaw;
    b.length = o.length;
    b.width = o.width;
    b.class_id = o.class_id;
    b.confidence = 1.0;
    objects.push_back(b);

    // Paint the footprint over whatever is underneath (cell-center test).
    const double rad = 0.5 * std::hypot(o.length, o.width);
    const int ix0 = std::max(0, static_cast<int>(std::floor((o.center.x - rad - grid.x_min) / grid.resolution)));
    const int ix1 = std::min(grid.nx - 1, static_cast<int>(std::floor((o.center.x + rad - grid.x_min) / grid.resolution)));
    const int iy0 = std::max(0, static_cast<int>(std::floor((o.center.y - rad - grid.y_min) / grid.resolution)));
    const int iy1 = std::min(grid.ny - 1, static_cast<int>(std::floor((o.center.y + rad - grid.y_min) / grid.resolution)));
    const double cy = std::cos(o.yaw), sy = std::sin(o.yaw);
    for (int ix = ix0; ix <= ix1; ++ix) {
      for (int iy = iy0; iy <= iy1; ++iy) {
        const Vec2 c = grid.cell_center(ix, iy);
        const double dx = c.x - o.center.x;
        const double dy = c.y - o.center.y;
        const double lx = cy * dx + sy * dy;
        const double ly = -sy * dx + cy * dy;
        if (std::abs(lx) <= 0.5 * o.length && std::abs(ly) <= 0.5 * o.width) {
          map.at(ix, iy) = o.class_id;
        }
      }
    }
  }
  return {std::move(map), std::move(objects)};
}

double object_center_depth(const SceneObject& obj, const CameraModel& cam) {
  return vehicle_to_camera(obj.center, cam.extrinsics).z;
}

}  // namespace bev
