#pragma once

#include <span>
#include <vector>

#include "bev/lift.hpp"
#include "bev/object_bev.hpp"

namespace bev {

struct LossWeights {
  double lambda_seg = 1.0;
  double lambda_obj = 2.0;
  double lambda_depth = 0.5;
  double lambda_reg = 0.01;
};

// A scalar loss value together with its gradient with respect to the
// prediction input it was computed from.
struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// Mean over cells of -alpha * (1 - p_t)^gamma * log(p_t), where p_t is the
// probability assigned to the target class (clamped to [1e-7, 1 - 1e-7]).
// Gradient is with respect to every entry of `probs` (zero off the target
// class). Throws on shape mismatch.
ValueGrad focal_loss(const std::vector<double>& probs, int nx, int ny, int num_classes,
                     const std::vector<int>& target, double gamma = 2.0,
                     double alpha = 0.25);

// Hungarian-gated detection loss: per matched pair a smooth-L1 position term
// (per coordinate, delta = 1 m), a 0/1 class-mismatch penalty, and a
// BCE(confidence, 1) term, averaged over matches; plus BCE(confidence, 0)
// summed over unmatched predictions and a constant miss penalty of 1 per
// unmatched target. Gradients treat the assignment as fixed.
struct DetectionLossResult {
  double value = 0.0;
  std::vector<double> position_grad;    // (d/dx, d/dy) per prediction
  std::vector<double> confidence_grad;  // per prediction

  // Flattened (dx, dy, dconf) triplets, for assembling the weighted total.
  ValueGrad to_value_grad() const;
};
DetectionLossResult detection_loss(std::span<const BevObject> preds,
                                   std::span<const BevObject> targets, double gate);

// Mean absolute error over valid cells; subgradient 0 at exact ties.
// Throws when the valid mask is empty or shapes disagree.
ValueGrad depth_l1_loss(const std::vector<double>& pred_depth,
                        const std::vector<double>& target_depth,
                        const std::vector<std::uint8_t>& valid);

// Mean |expected_depth(dist) - mono_depth| with the chain rule applied
// through the expectation; gradient is with respect to the distribution.
ValueGrad depth_consistency_loss(const DepthDistribution& dist,
                                 const std::vector<double>& mono_depth,
                                 const DepthBinning& bins);

// 0.5 * ||params||^2; gradient equals params.
ValueGrad l2_regularization(std::span<const double> params);

struct LossComponents {
  ValueGrad seg;
  ValueGrad obj;
  ValueGrad depth;
  ValueGrad consistency;
  ValueGrad reg;
};

struct LossBreakdown {
  double seg = 0.0;
  double obj = 0.0;
  double depth = 0.0;
  double consistency = 0.0;
  double reg = 0.0;
  double total = 0.0;
  std::vector<double> seg_grad;
  std::vector<double> obj_grad;
  std::vector<double> depth_grad;
  std::vector<double> consistency_grad;
  std::vector<double> reg_grad;
};

// total = l_seg*seg + l_obj*obj + l_depth*(depth + consistency) + l_reg*reg;
// each gradient is scaled by its component's weight (consistency shares
// lambda_depth).
LossBreakdown bev_loss(const LossComponents& components, const LossWeights& weights);

}  // namespace bev
