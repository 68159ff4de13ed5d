#pragma once

#include <span>
#include <vector>

#include "bev/lift.hpp"
#include "bev/metrics.hpp"
#include "bev/scene.hpp"
#include "bev/splat.hpp"

namespace bev {

// How the per-detection depth lookup is built.
//   kOracleCenter:    true camera-frame depth of the detected object's
//                     center, taken from the scene (only available when the
//                     pipeline runs from a Scene).
//   kSurfaceBilinear: bilinear sample of the dense depth map at the bbox
//                     bottom-center pixel.
enum class DetectionDepthSource { kOracleCenter, kSurfaceBilinear };

struct PipelineOptions {
  DepthBinning bins = DepthBinning::uniform();
  BevGridSpec grid = BevGridSpec::standard();
  int feature_stride = 8;
  int num_classes = cls::kCount;
  DetectionDepthSource detection_depth = DetectionDepthSource::kOracleCenter;
  int min_visible_pixels = 50;
};

struct PipelineResult {
  BevFeatureMap features;       // per-class splatted mass, num_classes channels
  SemanticBevMap labels;        // argmax over class channels, 0 where empty
  std::vector<BevObject> objects;
  ObjectChannels object_channels;
};

// Inputs for the file-driven mode: one dense depth map, semantic image and
// detection list per camera, aligned with the rig.
struct CameraFrame {
  std::vector<double> depth;  // h*w, +inf allowed for sky
  SemanticImage semantic;
  std::vector<Detection2D> detections;
};

// Renders the scene through its rig, lifts one-hot class features with the
// sampled oracle depth, splats, and places detections.
PipelineResult run_pipeline(const Scene& scene, const PipelineOptions& opts);

// Same pipeline fed from externally produced frames. Detections always use
// the surface-bilinear depth lookup here.
PipelineResult run_pipeline_from_frames(std::span<const CameraFrame> frames,
                                        const CameraRig& rig,
                                        const PipelineOptions& opts);

// BEV cells in which the discretized lift geometry observes unoccluded
// ground: for every feature cell whose sampled pixel hits the ground within
// the depth range, the cells of its two active frustum bin points are marked.
// The companion mask does the same at full pixel resolution for the IPM
// path (exact ray-ground intersection cells, no depth cap).
struct GroundVisibility {
  std::vector<std::uint8_t> lift_mask;  // nx*ny, aligned with SemanticBevMap
  std::vector<std::uint8_t> ipm_mask;
};

GroundVisibility visible_ground_masks(const Scene& scene,
                                      std::span<const RenderOutput> renders,
                                      const PipelineOptions& opts);
GroundVisibility visible_ground_masks(const Scene& scene, const PipelineOptions& opts);

}  // namespace bev
