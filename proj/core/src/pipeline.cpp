#include "bev/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace bev {

namespace {

// One-hot class features and a per-cell depth distribution sampled at the
// pixel containing each patch center. Sky cells get a zero feature vector
// (no semantic evidence) under a uniform distribution so row sums stay 1.
void lift_one_camera(const CameraModel& cam, const std::vector<double>& depth,
                     const SemanticImage& semantic, const PipelineOptions& opts,
                     FrustumGrid& frustum, LiftedFeatures& lifted) {
  const FeatureGridSpec grid_spec = FeatureGridSpec::for_image(cam.intrinsics, opts.feature_stride);
  const int h = grid_spec.h_cells;
  const int w = grid_spec.w_cells;
  const int stride = grid_spec.stride;
  const int img_w = cam.intrinsics.width;

  FeatureMap feat = FeatureMap::zeros(h, w, opts.num_classes);
  DepthDistribution dist;
  dist.h_cells = h;
  dist.w_cells = w;
  dist.depth_bins = opts.bins.count;
  dist.values.assign(static_cast<std::size_t>(h) * w * opts.bins.count, 0.0);
  const double uniform_mass = 1.0 / opts.bins.count;

  for (int i = 0; i < h; ++i) {
    const int py = i * stride + stride / 2;
    for (int j = 0; j < w; ++j) {
      const int px = j * stride + stride / 2;
      const std::size_t pix = static_cast<std::size_t>(py) * img_w + px;
      const double d = depth[pix];
      double* row = dist.values.data() + (static_cast<std::size_t>(i) * w + j) * opts.bins.count;
      if (std::isfinite(d) && d > 0.0) {
        const BinWeights bw = depth_to_bin_weights(d, opts.bins);
        row[bw.lo] += bw.w_lo;
        if (bw.hi != bw.lo) row[bw.hi] += bw.w_hi;
        const int label = semantic.labels[pix];
        if (label < 0 || label >= opts.num_classes) {
          throw std::invalid_argument("pipeline: semantic label out of range");
        }
        feat.at(i, j, label) = 1.0;
      } else {
        for (int k = 0; k < opts.bins.count; ++k) row[k] = uniform_mass;
      }
    }
  }
  frustum = build_frustum(cam, opts.bins, grid_spec);
  lifted = lift_outer(dist, feat);
}

SemanticBevMap argmax_labels(const BevFeatureMap& features, int num_classes) {
  SemanticBevMap labels = SemanticBevMap::empty(features.grid, num_classes);
  const std::size_t cells = static_cast<std::size_t>(features.grid.nx) * features.grid.ny;
  for (std::size_t c = 0; c < cells; ++c) {
    const double* row = features.values.data() + c * features.channels;
    int best = 0;
    double best_mass = 0.0;
    for (int k = 0; k < features.channels; ++k) {
      if (row[k] > best_mass) {
        best_mass = row[k];
        best = k;
      }
    }
    labels.labels[c] = best_mass > 0.0 ? best : 0;
  }
  return labels;
}

PipelineResult assemble(std::span<const FrustumGrid> frustums,
                        std::span<const LiftedFeatures> lifted,
                        std::vector<BevObject> objects, const PipelineOptions& opts) {
  PipelineResult result;
  result.features = splat_sorted(frustums, lifted, opts.grid);
  result.labels = argmax_labels(result.features, opts.num_classes);
  result.object_channels = embed_objects(objects, opts.grid, opts.num_classes);
  result.objects = std::move(objects);
  return result;
}

}  // namespace

PipelineResult run_pipeline(const Scene& scene, const PipelineOptions& opts) {
  const std::size_t n_cams = scene.rig.cameras.size();
  std::vector<FrustumGrid> frustums(n_cams);
  std::vector<LiftedFeatures> lifted(n_cams);
  std::vector<BevObject> objects;

  for (std::size_t c = 0; c < n_cams; ++c) {
    const CameraModel& cam = scene.rig.cameras[c];
    const RenderOutput render = render_camera(scene, cam, opts.min_visible_pixels);
    lift_one_camera(cam, render.depth, render.semantic, opts, frustums[c], lifted[c]);

    for (std::size_t k = 0; k < render.detections.size(); ++k) {
      const Detection2D& det = render.detections[k];
      DepthLookup lookup;
      if (opts.detection_depth == DetectionDepthSource::kOracleCenter) {
        const double center_depth =
            object_center_depth(scene.objects[render.detection_object[k]], cam);
        lookup = [center_depth](double, double) { return center_depth; };
      } else {
        const auto& depth = render.depth;
        const int h = cam.intrinsics.height;
        const int w = cam.intrinsics.width;
        lookup = [&depth, h, w](double u, double v) {
          return bilinear_sample(depth, h, w, u, v);
        };
      }
      try {
        objects.push_back(detection_to_bev(det, lookup, cam));
      } catch (const UnplaceableDetection&) {
        // Detections without a usable depth are dropped.
      }
    }
  }
  return assemble(frustums, lifted, std::move(objects), opts);
}

PipelineResult run_pipeline_from_frames(std::span<const CameraFrame> frames,
                                        const CameraRig& rig,
                                        const PipelineOptions& opts) {
  if (frames.size() != rig.cameras.size()) {
    throw std::invalid_argument("pipeline: frame count != camera count");
  }
  std::vector<FrustumGrid> frustums(frames.size());
  std::vector<LiftedFeatures> lifted(frames.size());
  std::vector<BevObject> objects;
  for (std::size_t c = 0; c < frames.size(); ++c) {
    const CameraModel& cam = rig.cameras[c];
    const CameraFrame& frame = frames[c];
    const std::size_t expected = static_cast<std::size_t>(cam.intrinsics.width) * cam.intrinsics.height;
    if (frame.depth.size() != expected || frame.semantic.labels.size() != expected) {
      throw std::invalid_argument("pipeline: frame shape does not match intrinsics");
    }
    lift_one_camera(cam, frame.depth, frame.semantic, opts, frustums[c], lifted[c]);
    const int h = cam.intrinsics.height;
    const int w = cam.intrinsics.width;
    for (const Detection2D& det : frame.detections) {
      const auto& depth = frame.depth;
      DepthLookup lookup = [&depth, h, w](double u, double v) {
        return bilinear_sample(depth, h, w, u, v);
      };
      try {
        objects.push_back(detection_to_bev(det, lookup, cam));
      } catch (const UnplaceableDetection&) {
      }
    }
  }
  return assemble(frustums, lifted, std::move(objects), opts);
}

GroundVisibility visible_ground_masks(const Scene& scene,
                                      std::span<const RenderOutput> renders,
                                      const PipelineOptions& opts) {
  if (renders.size() != scene.rig.cameras.size()) {
    throw std::invalid_argument("visible_ground_masks: render count != camera count");
  }
  GroundVisibility vis;
  const std::size_t cells = static_cast<std::size_t>(opts.grid.nx) * opts.grid.ny;
  vis.lift_mask.assign(cells, 0);
  vis.ipm_mask.assign(cells, 0);

  for (std::size_t c = 0; c < renders.size(); ++c) {
    const CameraModel& cam = scene.rig.cameras[c];
    const RenderOutput& render = renders[c];
    const int img_w = cam.intrinsics.width;
    const int img_h = cam.intrinsics.height;
    const Mat3 rot = quat_to_matrix(cam.extrinsics.rotation);
    const Vec3 origin = cam.extrinsics.translation;

    // Full-resolution mask: exact ground intersections of unoccluded pixels.
    for (int py = 0; py < img_h; ++py) {
      for (int px = 0; px < img_w; ++px) {
        const std::size_t pix = static_cast<std::size_t>(py) * img_w + px;
        if (render.winner[pix] != RenderOutput::kGroundHit) continue;
        const Vec3 dir = rot * unproject_pixel(px + 0.5, py + 0.5, 1.0, cam.intrinsics);
        const Vec3 hit = origin + dir * render.depth[pix];
        if (const auto cell = cell_index(hit, opts.grid)) {
          vis.ipm_mask[static_cast<std::size_t>(cell->ix) * opts.grid.ny + cell->iy] = 1;
        }
      }
    }

    // Feature-lattice mask: cells of the active frustum bin points for ground
    // samples inside the depth range.
    const FeatureGridSpec gs = FeatureGridSpec::for_image(cam.intrinsics, opts.feature_stride);
    for (int i = 0; i < gs.h_cells; ++i) {
      const int py = i * gs.stride + gs.stride / 2;
      for (int j = 0; j < gs.w_cells; ++j) {
        const int px = j * gs.stride + gs.stride / 2;
        const std::size_t pix = static_cast<std::size_t>(py) * img_w + px;
        if (render.winner[pix] != RenderOutput::kGroundHit) continue;
        const double d = render.depth[pix];
        if (d < opts.bins.d_min || d > opts.bins.d_max) continue;
        const BinWeights bw = depth_to_bin_weights(d, opts.bins);
        const double u = (j + 0.5) * gs.stride;
        const double v = (i + 0.5) * gs.stride;
        for (const auto& [bin, weight] : {std::pair{bw.lo, bw.w_lo}, std::pair{bw.hi, bw.w_hi}}) {
          if (weight <= 0.0) continue;
          const Vec3 p = camera_to_vehicle(
              unproject_pixel(u, v, opts.bins.centers[bin], cam.intrinsics), cam.extrinsics);
          if (const auto cell = cell_index(p, opts.grid)) {
            vis.lift_mask[static_cast<std::size_t>(cell->ix) * opts.grid.ny + cell->iy] = 1;
          }
        }
      }
    }
  }
  return vis;
}

GroundVisibility visible_ground_masks(const Scene& scene, const PipelineOptions& opts) {
  std::vector<RenderOutput> renders;
  renders.reserve(scene.rig.cameras.size());
  for (const auto& cam : scene.rig.cameras) {
    renders.push_back(render_camera(scene, cam, opts.min_visible_pixels));
  }
  return visible_ground_masks(scene, renders, opts);
}

}  // namespace bev
