#include "bev/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bev/loss.hpp"
#include "bev/metrics.hpp"
#include "bev/rng.hpp"

namespace bev {

namespace {

constexpr double kStep = 1e-5;

double rel_err(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / scale;
}

double central_diff(const std::function<double(const std::vector<double>&)>& f,
                    std::vector<double> x, std::size_t i) {
  x[i] += kStep;
  const double hi = f(x);
  x[i] -= 2 * kStep;
  const double lo = f(x);
  return (hi - lo) / (2 * kStep);
}

std::vector<double> random_probs(Rng& rng, int cells, int num_classes) {
  std::vector<double> probs(static_cast<std::size_t>(cells) * num_classes);
  for (int c = 0; c < cells; ++c) {
    double sum = 0.0;
    for (int k = 0; k < num_classes; ++k) {
      const double v = rng.uniform(0.05, 1.0);
      probs[static_cast<std::size_t>(c) * num_classes + k] = v;
      sum += v;
    }
    for (int k = 0; k < num_classes; ++k) {
      probs[static_cast<std::size_t>(c) * num_classes + k] /= sum;
    }
  }
  return probs;
}

GradCheckResult check_focal(std::uint64_t seed, int instances) {
  GradCheckResult res{"focal", instances, 0, 0, 0.0};
  Rng rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    const int nx = rng.uniform_int(2, 4);
    const int ny = rng.uniform_int(2, 4);
    const int K = rng.uniform_int(2, 5);
    std::vector<int> target(static_cast<std::size_t>(nx) * ny);
    for (auto& t : target) t = rng.uniform_int(0, K - 1);
    const std::vector<double> probs = random_probs(rng, nx * ny, K);
    const ValueGrad vg = focal_loss(probs, nx, ny, K, target);
    const auto f = [&](const std::vector<double>& x) {
      return focal_loss(x, nx, ny, K, target).value;
    };
    for (std::size_t i = 0; i < probs.size(); i += 2) {
      res.max_rel_err = std::max(res.max_rel_err, rel_err(vg.grad[i], central_diff(f, probs, i)));
      ++res.checked;
    }
  }
  return res;
}

GradCheckResult check_detection(std::uint64_t seed, int instances) {
  GradCheckResult res{"detection", instances, 0, 0, 0.0};
  Rng rng(seed);
  const double gate = 4.0;
  auto make = [&](double conf) {
    BevObject o;
    o.x = rng.uniform(-6, 6);
    o.y = rng.uniform(-6, 6);
    o.length = 2.0;
    o.width = 1.0;
    o.class_id = rng.uniform_int(2, 3);
    o.confidence = conf;
    return o;
  };
  for (int inst = 0; inst < instances; ++inst) {
    const int n_pred = rng.uniform_int(1, 4);
    const int n_tgt = rng.uniform_int(1, 4);
    std::vector<BevObject> preds, targets;
    for (int i = 0; i < n_pred; ++i) preds.push_back(make(rng.uniform(0.1, 0.95)));
    for (int i = 0; i < n_tgt; ++i) targets.push_back(make(1.0));

    const DetectionLossResult base = detection_loss(preds, targets, gate);
    const MatchResult base_match = match_objects(preds, targets, gate);
    auto same_assignment = [&](const std::vector<BevObject>& p) {
      const MatchResult m = match_objects(p, targets, gate);
      if (m.pairs.size() != base_match.pairs.size()) return false;
      for (std::size_t k = 0; k < m.pairs.size(); ++k) {
        if (m.pairs[k].pred != base_match.pairs[k].pred ||
            m.pairs[k].target != base_match.pairs[k].target)
          return false;
      }
      return true;
    };

    for (int i = 0; i < n_pred; ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        auto perturbed = [&](double delta) {
          std::vector<BevObject> p = preds;
          if (axis == 0) p[i].x += delta;
          else if (axis == 1) p[i].y += delta;
          else p[i].confidence += delta;
          return p;
        };
        bool skip = !same_assignment(perturbed(2 * kStep)) ||
                    !same_assignment(perturbed(-2 * kStep));
        for (const auto& pair : base_match.pairs) {
          if (pair.pred != i) continue;
          const double rx = preds[i].x - targets[pair.target].x;
          const double ry = preds[i].y - targets[pair.target].y;
          for (const double r : {rx, ry}) {
            if (std::abs(std::abs(r) - 1.0) < 10 * kStep || std::abs(r) < 10 * kStep) skip = true;
          }
        }
        if (skip) {
          ++res.skipped;
          continue;
        }
        const double hi = detection_loss(perturbed(kStep), targets, gate).value;
        const double lo = detection_loss(perturbed(-kStep), targets, gate).value;
        const double numeric = (hi - lo) / (2 * kStep);
        const double analytic = axis == 0   ? base.position_grad[2 * i]
                                : axis == 1 ? base.position_grad[2 * i + 1]
                                            : base.confidence_grad[i];
        res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic, numeric));
        ++res.checked;
      }
    }
  }
  return res;
}

GradCheckResult check_depth_l1(std::uint64_t seed, int instances) {
  GradCheckResult res{"depth_l1", instances, 0, 0, 0.0};
  Rng rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    const int n = rng.uniform_int(2, 24);
    std::vector<double> pred(n), target(n);
    std::vector<std::uint8_t> valid(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = rng.uniform(1.0, 50.0);
      target[i] = rng.uniform(1.0, 50.0);
      valid[i] = rng.uniform() < 0.8 ? 1 : 0;
    }
    valid[0] = 1;
    const ValueGrad vg = depth_l1_loss(pred, target, valid);
    const auto f = [&](const std::vector<double>& x) {
      return depth_l1_loss(x, target, valid).value;
    };
    for (int i = 0; i < n; ++i) {
      if (std::abs(pred[i] - target[i]) < 10 * kStep) {
        ++res.skipped;
        continue;
      }
      res.max_rel_err = std::max(res.max_rel_err, rel_err(vg.grad[i], central_diff(f, pred, i)));
      ++res.checked;
    }
  }
  return res;
}

GradCheckResult check_consistency(std::uint64_t seed, int instances) {
  GradCheckResult res{"depth_consistency", instances, 0, 0, 0.0};
  Rng rng(seed);
  const DepthBinning bins = DepthBinning::uniform(1.0, 12.0, 12);
  for (int inst = 0; inst < instances; ++inst) {
    const int h = rng.uniform_int(1, 3);
    const int w = rng.uniform_int(1, 3);
    DepthLogits logits;
    logits.h_cells = h;
    logits.w_cells = w;
    logits.depth_bins = bins.count;
    logits.values.resize(static_cast<std::size_t>(h) * w * bins.count);
    for (auto& v : logits.values) v = rng.uniform(-2.0, 2.0);
    const DepthDistribution dist = depth_softmax(logits);
    std::vector<double> mono(static_cast<std::size_t>(h) * w);
    for (auto& m : mono) m = rng.uniform(1.5, 11.5);

    const ValueGrad vg = depth_consistency_loss(dist, mono, bins);
    const std::vector<double> expect = expected_depth(dist, bins);
    const auto f = [&](const std::vector<double>& x) {
      DepthDistribution d = dist;
      d.values = x;
      return depth_consistency_loss(d, mono, bins).value;
    };
    for (std::size_t c = 0; c < mono.size(); ++c) {
      if (std::abs(expect[c] - mono[c]) < bins.d_max * 10 * kStep) {
        res.skipped += bins.count;
        continue;
      }
      for (int k = 0; k < bins.count; k += 3) {
        const std::size_t idx = c * bins.count + k;
        res.max_rel_err =
            std::max(res.max_rel_err, rel_err(vg.grad[idx], central_diff(f, dist.values, idx)));
        ++res.checked;
      }
    }
  }
  return res;
}

GradCheckResult check_l2(std::uint64_t seed, int instances) {
  GradCheckResult res{"l2_reg", instances, 0, 0, 0.0};
  Rng rng(seed);
  for (int inst = 0; inst < instances; ++inst) {
    const int n = rng.uniform_int(1, 32);
    std::vector<double> params(n);
    for (auto& p : params) p = rng.uniform(-5.0, 5.0);
    const ValueGrad vg = l2_regularization(params);
    const auto f = [](const std::vector<double>& x) { return l2_regularization(x).value; };
    for (int i = 0; i < n; ++i) {
      res.max_rel_err = std::max(res.max_rel_err, rel_err(vg.grad[i], central_diff(f, params, i)));
      ++res.checked;
    }
  }
  return res;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed, int instances) {
  return {
      check_focal(seed ^ 0x1, instances),
      check_detection(seed ^ 0x2, instances),
      check_depth_l1(seed ^ 0x3, instances),
      check_consistency(seed ^ 0x4, instances),
      check_l2(seed ^ 0x5, instances),
  };
}

}  // namespace bev
