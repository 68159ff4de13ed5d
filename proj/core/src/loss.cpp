#include "bev/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bev/metrics.hpp"

namespace bev {

namespace {

constexpr double kProbEps = 1e-7;

double smooth_l1(double r) {
  const double a = std::abs(r);
  return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

double smooth_l1_grad(double r) {
  return std::abs(r) < 1.0 ? r : (r > 0.0 ? 1.0 : -1.0);
}

// -t*log(c) - (1-t)*log(1-c), clamped away from the singular side only, so a
// perfect confidence scores exactly zero.
double bce(double c, double t) {
  if (t >= 0.5) return -std::log(std::max(c, kProbEps));
  return -std::log(std::max(1.0 - c, kProbEps));
}

double bce_grad(double c, double t) {
  if (t >= 0.5) return c > kProbEps ? -1.0 / c : 0.0;
  return (1.0 - c) > kProbEps ? 1.0 / (1.0 - c) : 0.0;
}

double sign_or_zero(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

}  // namespace

ValueGrad focal_loss(const std::vector<double>& probs, int nx, int ny, int num_classes,
                     const std::vector<int>& target, double gamma, double alpha) {
  const std::size_t cells = static_cast<std::size_t>(nx) * ny;
  if (probs.size() != cells * num_classes || target.size() != cells) {
    throw std::invalid_argument("focal_loss: shape mismatch");
  }
  ValueGrad out;
  out.grad.assign(probs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const int t = target[c];
    if (t < 0 || t >= num_classes) throw std::invalid_argument("focal_loss: target class out of range");
    const double raw = probs[c * num_classes + t];
    const double p = std::clamp(raw, kProbEps, 1.0 - kProbEps);
    const double om = 1.0 - p;
    sum += -alpha * std::pow(om, gamma) * std::log(p);
    if (raw > kProbEps && raw < 1.0 - kProbEps) {
      const double g = alpha * gamma * std::pow(om, gamma - 1.0) * std::log(p) -
                       alpha * std::pow(om, gamma) / p;
      out.grad[c * num_classes + t] = g / static_cast<double>(cells);
    }
  }
  out.value = sum / static_cast<double>(cells);
  return out;
}

ValueGrad DetectionLossResult::to_value_grad() const {
  ValueGrad vg;
  vg.value = value;
  const std::size_t n = confidence_grad.size();
  vg.grad.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    vg.grad[3 * i] = position_grad[2 * i];
    vg.grad[3 * i + 1] = position_grad[2 * i + 1];
    vg.grad[3 * i + 2] = confidence_grad[i];
  }
  return vg;
}

DetectionLossResult detection_loss(std::span<const BevObject> preds,
                                   std::span<const BevObject> targets, double gate) {
  DetectionLossResult out;
  out.position_grad.assign(2 * preds.size(), 0.0);
  out.confidence_grad.assign(preds.size(), 0.0);
  if (preds.empty() && targets.empty()) return out;

  const MatchResult match = match_objects(preds, targets, gate);
  const double n_matches = static_cast<double>(match.pairs.size());
  double matched_sum = 0.0;
  for (const auto& pair : match.pairs) {
    const BevObject& p = preds[pair.pred];
    const BevObject& t = targets[pair.target];
    const double rx = p.x - t.x;
    const double ry = p.y - t.y;
    matched_sum += smooth_l1(rx) + smooth_l1(ry);
    matched_sum += p.class_id == t.class_id ? 0.0 : 1.0;
    matched_sum += bce(p.confidence, 1.0);
    out.position_grad[2 * pair.pred] = smooth_l1_grad(rx) / n_matches;
    out.position_grad[2 * pair.pred + 1] = smooth_l1_grad(ry) / n_matches;
    out.confidence_grad[pair.pred] = bce_grad(p.confidence, 1.0) / n_matches;
  }
  double value = match.pairs.empty() ? 0.0 : matched_sum / n_matches;
  for (const int i : match.unmatched_preds) {
    value += bce(preds[i].confidence, 0.0);
    out.confidence_grad[i] = bce_grad(preds[i].confidence, 0.0);
  }
  value += static_cast<double>(match.unmatched_targets.size());
  out.value = value;
  return out;
}

ValueGrad depth_l1_loss(const std::vector<double>& pred_depth,
                        const std::vector<double>& target_depth,
                        const std::vector<std::uint8_t>& valid) {
  if (pred_depth.size() != target_depth.size() || pred_depth.size() != valid.size()) {
    throw std::invalid_argument("depth_l1_loss: shape mismatch");
  }
  std::size_t n_valid = 0;
  for (const auto v : valid) n_valid += v != 0;
  if (n_valid == 0) throw std::invalid_argument("depth_l1_loss: empty valid mask");

  ValueGrad out;
  out.grad.assign(pred_depth.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred_depth.size(); ++i) {
    if (!valid[i]) continue;
    const double r = pred_depth[i] - target_depth[i];
    sum += std::abs(r);
    out.grad[i] = sign_or_zero(r) / static_cast<double>(n_valid);
  }
  out.value = sum / static_cast<double>(n_valid);
  return out;
}

ValueGrad depth_consistency_loss(const DepthDistribution& dist,
                                 const std::vector<double>& mono_depth,
                                 const DepthBinning& bins) {
  const std::size_t cells = static_cast<std::size_t>(dist.h_cells) * dist.w_cells;
  if (mono_depth.size() != cells) {
    throw std::invalid_argument("depth_consistency_loss: shape mismatch");
  }
  for (double d : mono_depth) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("depth_consistency_loss: mono depth must be positive and finite");
    }
  }
  const std::vector<double> expect = expected_depth(dist, bins);
  ValueGrad out;
  out.grad.assign(dist.values.size(), 0.0);
  double sum = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double r = expect[c] - mono_depth[c];
    sum += std::abs(r);
    const double s = sign_or_zero(r) / static_cast<double>(cells);
    for (int k = 0; k < bins.count; ++k) {
      out.grad[c * bins.count + k] = s * bins.centers[k];
    }
  }
  out.value = sum / static_cast<double>(cells);
  return out;
}

ValueGrad l2_regularization(std::span<const double> params) {
  ValueGrad out;
  out.grad.assign(params.begin(), params.end());
  double sum = 0.0;
  for (const double p : params) sum += p * p;
  out.value = 0.5 * sum;
  return out;
}

LossBreakdown bev_loss(const LossComponents& components, const LossWeights& weights) {
  LossBreakdown b;
  b.seg = components.seg.value;
  b.obj = components.obj.value;
  b.depth = components.depth.value;
  b.consistency = components.consistency.value;
  b.reg = components.reg.value;
  b.total = weights.lambda_seg * b.seg + weights.lambda_obj * b.obj +
            weights.lambda_depth * (b.depth + b.consistency) +
            weights.lambda_reg * b.reg;

  auto scaled = [](const std::vector<double>& g, double w) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = w * g[i];
    return out;
  };
  b.seg_grad = scaled(components.seg.grad, weights.lambda_seg);
  b.obj_grad = scaled(components.obj.grad, weights.lambda_obj);
  b.depth_grad = scaled(components.depth.grad, weights.lambda_depth);
  b.consistency_grad = scaled(components.consistency.grad, weights.lambda_depth);
  b.reg_grad = scaled(components.reg.grad, weights.lambda_reg);
  return b;
}

}  // namespace bev
