#pragma once

#include <vector>

#include "bev/geometry.hpp"

namespace bev {

// Per-cell semantic feature vectors on the stride-reduced lattice.
struct FeatureMap {
  int h_cells = 0;
  int w_cells = 0;
  int channels = 64;
  std::vector<double> values;  // [h][w][c]

  static FeatureMap zeros(int h, int w, int c);
  double at(int i, int j, int c) const {
    return values[(static_cast<std::size_t>(i) * w_cells + j) * channels + c];
  }
  double& at(int i, int j, int c) {
    return values[(static_cast<std::size_t>(i) * w_cells + j) * channels + c];
  }
};

struct DepthLogits {
  int h_cells = 0;
  int w_cells = 0;
  int depth_bins = 0;
  std::vector<double> values;  // [h][w][d]
};

// Categorical distribution over depth bins; each (i, j) slice sums to 1.
struct DepthDistribution {
  int h_cells = 0;
  int w_cells = 0;
  int depth_bins = 0;
  std::vector<double> values;  // [h][w][d]

  double at(int i, int j, int k) const {
    return values[(static_cast<std::size_t>(i) * w_cells + j) * depth_bins + k];
  }
  double& at(int i, int j, int k) {
    return values[(static_cast<std::size_t>(i) * w_cells + j) * depth_bins + k];
  }
};

// Depth-weighted features: values[i][j][k][:] = dist[i][j][k] * feat[i][j][:].
struct LiftedFeatures {
  int h_cells = 0;
  int w_cells = 0;
  int depth_bins = 0;
  int channels = 0;
  std::vector<double> values;  // [h][w][d][c]
};

// Softmax over the depth axis with max-subtraction. Throws on NaN/Inf input.
DepthDistribution depth_softmax(const DepthLogits& logits);

// Outer product per cell. Throws on h/w mismatch.
LiftedFeatures lift_outer(const DepthDistribution& dist, const FeatureMap& feat);

// Two-bin linear split of a single metric depth value; out-of-range depths
// clamp to the nearest end bin. Shared by depth_map_to_distribution and the
// pipeline's per-cell streaming path.
struct BinWeights {
  int lo = 0;
  int hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};
BinWeights depth_to_bin_weights(double depth, const DepthBinning& bins);

// Dense depth map (h x w, meters) -> soft two-bin distribution per cell.
// Throws on non-positive or non-finite entries.
DepthDistribution depth_map_to_distribution(const std::vector<double>& depth,
                                            int h_cells, int w_cells,
                                            const DepthBinning& bins);

// Per-cell expectation sum_k dist[i][j][k] * centers[k]; returns h*w values.
std::vector<double> expected_depth(const DepthDistribution& dist, const DepthBinning& bins);

}  // namespace bev
