#include "bev/lift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bev {

FeatureMap FeatureMap::zeros(int h, int w, int c) {
  FeatureMap f;
  f.h_cells = h;
  f.w_cells = w;
  f.channels = c;
  f.values.assign(static_cast<std::size_t>(h) * w * c, 0.0);
  return f;
}

DepthDistribution depth_softmax(const DepthLogits& logits) {
  if (logits.depth_bins <= 0) throw std::invalid_argument("depth_softmax: empty depth axis");
  for (double v : logits.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("depth_softmax: non-finite logit");
  }
  DepthDistribution out;
  out.h_cells = logits.h_cells;
  out.w_cells = logits.w_cells;
  out.depth_bins = logits.depth_bins;
  out.values.resize(logits.values.size());
  const int d = logits.depth_bins;
  const std::size_t cells = static_cast<std::size_t>(logits.h_cells) * logits.w_cells;
  for (std::size_t c = 0; c < cells; ++c) {
    const double* in = logits.values.data() + c * d;
    double* row = out.values.data() + c * d;
    double mx = in[0];
    for (int k = 1; k < d; ++k) mx = std::max(mx, in[k]);
    double sum = 0.0;
    for (int k = 0; k < d; ++k) {
      row[k] = std::exp(in[k] - mx);
      sum += row[k];
    }
    for (int k = 0; k < d; ++k) row[k] /= sum;
  }
  return out;
}

LiftedFeatures lift_outer(const DepthDistribution& dist, const FeatureMap& feat) {
  if (dist.h_cells != feat.h_cells || dist.w_cells != feat.w_cells) {
    throw std::invalid_argument("lift_outer: grid shape mismatch");
  }
  LiftedFeatures out;
  out.h_cells = dist.h_cells;
  out.w_cells = dist.w_cells;
  out.depth_bins = dist.depth_bins;
  out.channels = feat.channels;
  out.values.resize(static_cast<std::size_t>(dist.h_cells) * dist.w_cells *
                    dist.depth_bins * feat.channels);
  const std::size_t cells = static_cast<std::size_t>(dist.h_cells) * dist.w_cells;
  std::size_t idx = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double* p = dist.values.data() + c * dist.depth_bins;
    const double* f = feat.values.data() + c * feat.channels;
    for (int k = 0; k < dist.depth_bins; ++k) {
      for (int ch = 0; ch < feat.channels; ++ch) out.values[idx++] = p[k] * f[ch];
    }
  }
  return out;
}

BinWeights depth_to_bin_weights(double depth, const DepthBinning& bins) {
  BinWeights w;
  if (depth <= bins.centers.front()) {
    w.lo = w.hi = 0;
    return w;
  }
  if (depth >= bins.centers.back()) {
    w.lo = w.hi = bins.count - 1;
    return w;
  }
  // centers strictly increasing; find the bracketing pair.
  const auto it = std::upper_bound(bins.centers.begin(), bins.centers.end(), depth);
  const int hi = static_cast<int>(it - bins.centers.begin());
  const int lo = hi - 1;
  const double t = (depth - bins.centers[lo]) / (bins.centers[hi] - bins.centers[lo]);
  w.lo = lo;
  w.hi = hi;
  w.w_lo = 1.0 - t;
  w.w_hi = t;
  return w;
}

DepthDistribution depth_map_to_distribution(const std::vector<double>& depth,
                                            int h_cells, int w_cells,
                                            const DepthBinning& bins) {
  if (static_cast<std::size_t>(h_cells) * w_cells != depth.size()) {
    throw std::invalid_argument("depth_map_to_distribution: shape mismatch");
  }
  bins.validate();
  DepthDistribution out;
  out.h_cells = h_cells;
  out.w_cells = w_cells;
  out.depth_bins = bins.count;
  out.values.assign(depth.size() * bins.count, 0.0);
  for (std::size_t c = 0; c < depth.size(); ++c) {
    const double d = depth[c];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("depth_map_to_distribution: depth must be positive and finite");
    }
    const BinWeights w = depth_to_bin_weights(d, bins);
    double* row = out.values.data() + c * bins.count;
    row[w.lo] += w.w_lo;
    if (w.hi != w.lo) row[w.hi] += w.w_hi;
  }
  return out;
}

std::vector<double> expected_depth(const DepthDistribution& dist, const DepthBinning& bins) {
  if (dist.depth_bins != bins.count) {
    throw std::invalid_argument("expected_depth: bin count mismatch");
  }
  const std::size_t cells = static_cast<std::size_t>(dist.h_cells) * dist.w_cells;
  std::vector<double> out(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double* row = dist.values.data() + c * bins.count;
    double e = 0.0;
    for (int k = 0; k < bins.count; ++k) e += row[k] * bins.centers[k];
    out[c] = e;
  }
  return out;
}

}  // namespace bev
