#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bev/geometry.hpp"
#include "bev/splat.hpp"

namespace bev {

// Class-id convention shared across the library.
namespace cls {
inline constexpr int kBackground = 0;
inline constexpr int kRoad = 1;
inline constexpr int kVehicle = 2;
inline constexpr int kPedestrian = 3;
inline constexpr int kCyclist = 4;
inline constexpr int kTrafficSign = 5;
inline constexpr int kCount = 6;
}  // namespace cls

const char* class_name(int class_id);

struct Detection2D {
  std::string camera_name;
  double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;  // pixels
  int class_id = 0;
  double confidence = 0.0;
};

// Object hypothesis on the BEV plane.
struct BevObject {
  double x = 0.0;       // meters, vehicle frame
  double y = 0.0;
  double yaw = 0.0;     // radians
  double length = 0.0;  // meters
  double width = 0.0;
  int class_id = 0;
  double confidence = 0.0;
};

// Extra BEV channels carrying object hypotheses: num_classes one-hot-style
// score channels, then confidence, then log(length*width).
struct ObjectChannels {
  BevGridSpec grid;
  int num_classes = 0;
  std::vector<double> values;  // [nx][ny][num_classes + 2]

  int channels() const { return num_classes + 2; }
  double at(int ix, int iy, int c) const {
    return values[(static_cast<std::size_t>(ix) * grid.ny + iy) * channels() + c];
  }
};

struct UnplaceableDetection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using DepthLookup = std::function<double(double u, double v)>;

// Default footprint (length, width) in meters for each detectable class.
std::pair<double, double> default_footprint(int class_id);

// Lifts a 2D detection to the BEV plane: unprojects the bbox bottom-center
// pixel at the looked-up depth, transforms to the vehicle frame and drops z.
// Yaw is 0 for camera-derived objects; footprint comes from class defaults
// unless overridden. Throws UnplaceableDetection when the lookup yields a
// non-positive or non-finite depth.
BevObject detection_to_bev(const Detection2D& det, const DepthLookup& depth_at,
                           const CameraModel& cam,
                           std::optional<std::pair<double, double>> footprint = std::nullopt);

// Scatter object attributes into per-cell channels. Collisions combine by
// max on score/confidence channels; the log-dimension value follows the
// higher-confidence object (deterministic tie-break so the result is
// permutation invariant).
ObjectChannels embed_objects(std::span<const BevObject> objects,
                             const BevGridSpec& grid, int num_classes);

// Counter-clockwise corners of the yaw-rotated length x width footprint.
std::array<Vec2, 4> footprint_corners(const BevObject& obj);

// Clamp-to-edge bilinear sample of a dense per-pixel map at continuous pixel
// coordinates (pixel centers at integer + 0.5).
double bilinear_sample(const std::vector<double>& map, int height, int width,
                       double u, double v);

}  // namespace bev
