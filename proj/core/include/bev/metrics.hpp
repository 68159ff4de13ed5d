#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bev/ipm.hpp"
#include "bev/object_bev.hpp"

namespace bev {

struct CostMatrix {
  int rows = 0;  // predictions
  int cols = 0;  // targets
  std::vector<double> values;

  static CostMatrix zeros(int r, int c) { return {r, c, std::vector<double>(static_cast<std::size_t>(r) * c, 0.0)}; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct Assignment {
  std::vector<int> row_to_col;  // -1 where a row is unassigned
  double total_cost = 0.0;      // sum of assigned entries, accumulated in row order
};

// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^3)).
// Rectangular inputs are padded internally with a large sentinel; padded
// pairs are reported as unassigned. Throws on NaN costs.
Assignment hungarian(const CostMatrix& cost);

struct MatchPair {
  int pred = -1;
  int target = -1;
  double cost = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_preds;
  std::vector<int> unmatched_targets;
};

// Hungarian on Euclidean center distance; assigned pairs farther apart than
// `gate` are dissolved into unmatched on both sides.
MatchResult match_objects(std::span<const BevObject> preds,
                          std::span<const BevObject> targets, double gate);

// Mean pair cost; nullopt when there are no pairs.
std::optional<double> position_error(const MatchResult& match);

// |pred n gt| / |pred u gt| for one class mask; nullopt when both are empty.
// Throws on grid mismatch.
std::optional<double> segmentation_iou(const SemanticBevMap& pred,
                                       const SemanticBevMap& gt, int class_id);

// Footprint intersection-over-union via Sutherland-Hodgman clipping.
// Throws on degenerate (zero-area) rectangles.
double rotated_rect_iou(const BevObject& a, const BevObject& b);

// Confidence-ranked greedy matching at the given rotated-IoU threshold,
// 101-point interpolated area under the precision-recall curve.
// nullopt when there are no targets.
std::optional<double> average_precision(std::span<const BevObject> preds,
                                        std::span<const BevObject> targets,
                                        double iou_threshold);

// Matched pairs / n_targets; nullopt for zero targets.
std::optional<double> recall(const MatchResult& match, int n_targets);

struct MetricsReport {
  std::map<int, double> seg_iou_pct;                // class id -> percent
  std::map<int, std::map<int, double>> ap_pct;      // class id -> threshold*100 -> percent
  std::optional<double> mean_position_error_m;
  std::map<int, double> recall_pct;                 // class id -> percent
};

// Full report: per-class segmentation IoU (optionally restricted to a cell
// mask), per-class AP at IoU thresholds {0.5, 0.75, 0.9}, per-class recall at
// the gate, and the pooled mean position error over all per-class matches.
MetricsReport evaluate_metrics(const SemanticBevMap& pred_labels,
                               std::span<const BevObject> pred_objects,
                               const SemanticBevMap& gt_labels,
                               std::span<const BevObject> gt_objects,
                               double gate,
                               const std::vector<std::uint8_t>* cell_mask = nullptr);

}  // namespace bev
