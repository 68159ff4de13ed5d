#include "bev/object_bev.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace bev {

const char* class_name(int class_id) {
  switch (class_id) {
    case cls::kBackground: return "background";
    case cls::kRoad: return "road";
    case cls::kVehicle: return "vehicle";
    case cls::kPedestrian: return "pedestrian";
    case cls::kCyclist: return "cyclist";
    case cls::kTrafficSign: return "traffic_sign";
    default: return "unknown";
  }
}

std::pair<double, double> default_footprint(int class_id) {
  switch (class_id) {
    case cls::kVehicle: return {4.5, 2.0};
    case cls::kPedestrian: return {0.6, 0.6};
    case cls::kCyclist: return {1.8, 0.6};
    case cls::kTrafficSign: return {0.4, 0.4};
    default: return {1.0, 1.0};
  }
}

BevObject detection_to_bev(const Detection2D& det, const DepthLookup& depth_at,
                           const CameraModel& cam,
                           std::optional<std::pair<double, double>> footprint) {
  const double u = 0.5 * (det.u_min + det.u_max);
  const double v = det.v_max;
  const double depth = depth_at(u, v);
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw UnplaceableDetection("detection_to_bev: no positive finite depth at bbox bottom-center");
  }
  const Vec3 p_veh = camera_to_vehicle(unproject_pixel(u, v, depth, cam.intrinsics),
                                       cam.extrinsics);
  BevObject obj;
  obj.x = p_veh.x;
  obj.y = p_veh.y;
  obj.yaw = 0.0;
  const auto fp = footprint.value_or(default_footprint(det.class_id));
  obj.length = fp.first;
  obj.width = fp.second;
  obj.class_id = det.class_id;
  obj.confidence = det.confidence;
  return obj;
}

namespace {

// Total order used to break confidence ties so embed_objects is
// permutation invariant.
bool wins_tie(const BevObject& a, const BevObject& b) {
  return std::tie(a.class_id, a.x, a.y, a.yaw, a.length, a.width) <
         std::tie(b.class_id, b.x, b.y, b.yaw, b.length, b.width);
}

}  // namespace

ObjectChannels embed_objects(std::span<const BevObject> objects,
                             const BevGridSpec& grid, int num_classes) {
  grid.validate();
  ObjectChannels out;
  out.grid = grid;
  out.num_classes = num_classes;
  out.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny * (num_classes + 2), 0.0);

  // Owner of the log-dimension channel per cell.
  std::vector<const BevObject*> owner(static_cast<std::size_t>(grid.nx) * grid.ny, nullptr);
  const int ch = out.channels();
  for (const auto& obj : objects) {
    const auto cell = cell_index({obj.x, obj.y, 0.0}, grid);
    if (!cell) continue;
    if (obj.class_id < 0 || obj.class_id >= num_classes) {
      throw std::invalid_argument("embed_objects: class id out of range");
    }
    const std::size_t flat = static_cast<std::size_t>(cell->ix) * grid.ny + cell->iy;
    double* row = out.values.data() + flat * ch;
    row[obj.class_id] = std::max(row[obj.class_id], obj.confidence);
    row[num_classes] = std::max(row[num_classes], obj.confidence);
    const BevObject*& own = owner[flat];
    if (own == nullptr || obj.confidence > own->confidence ||
        (obj.confidence == own->confidence && wins_tie(obj, *own))) {
      own = &obj;
      row[num_classes + 1] = std::log(obj.length * obj.width);
    }
  }
  return out;
}

std::array<Vec2, 4> footprint_corners(const BevObject& obj) {
  const double c = std::cos(obj.yaw);
  const double s = std::sin(obj.yaw);
  const double hl = 0.5 * obj.length;
  const double hw = 0.5 * obj.width;
  // Counter-clockwise in the object frame, then rotated and translated.
  const std::array<Vec2, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = {obj.x + c * local[i].x - s * local[i].y,
              obj.y + s * local[i].x + c * local[i].y};
  }
  return out;
}

double bilinear_sample(const std::vector<double>& map, int height, int width,
                       double u, double v) {
  // Convert to pixel-center coordinates and clamp to the valid range.
  const double fx = std::clamp(u - 0.5, 0.0, static_cast<double>(width - 1));
  const double fy = std::clamp(v - 0.5, 0.0, static_cast<double>(height - 1));
  const int x0 = std::min(static_cast<int>(fx), width - 2 >= 0 ? width - 2 : 0);
  const int y0 = std::min(static_cast<int>(fy), height - 2 >= 0 ? height - 2 : 0);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const double a = map[static_cast<std::size_t>(y0) * width + x0];
  const double b = map[static_cast<std::size_t>(y0) * width + x1];
  const double c = map[static_cast<std::size_t>(y1) * width + x0];
  const double d = map[static_cast<std::size_t>(y1) * width + x1];
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

}  // namespace bev
