#include "bev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bev {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPadCost = 1e9;
}  // namespace

Assignment hungarian(const CostMatrix& cost) {
  for (double c : cost.values) {
    if (std::isnan(c)) throw std::invalid_argument("hungarian: NaN cost entry");
  }
  const int n = cost.rows;
  const int m = cost.cols;
  Assignment result;
  result.row_to_col.assign(n, -1);
  if (n == 0 || m == 0) return result;

  // Pad to square; entries outside the real block carry a sentinel so padded
  // pairs never displace a feasible real pair.
  const int N = std::max(n, m);
  auto a = [&](int i, int j) -> double {
    return (i < n && j < m) ? cost.at(i, j) : kPadCost;
  };

  // Shortest-augmenting-path Kuhn-Munkres with potentials. Column N is the
  // virtual root column.
  std::vector<double> pot_row(N, 0.0), pot_col(N + 1, 0.0);
  std::vector<int> col_to_row(N + 1, -1);
  for (int i = 0; i < N; ++i) {
    int j0 = N;
    col_to_row[N] = i;
    std::vector<double> min_slack(N + 1, kInf);
    std::vector<int> prev_col(N + 1, -1);
    std::vector<char> visited(N + 1, 0);
    do {
      visited[j0] = 1;
      const int i0 = col_to_row[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 0; j < N; ++j) {
        if (visited[j]) continue;
        const double reduced = a(i0, j) - pot_row[i0] - pot_col[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          prev_col[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= N; ++j) {
        if (visited[j]) {
          pot_row[col_to_row[j]] += delta;
          pot_col[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != -1);
    do {
      const int j1 = prev_col[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0 != N);
  }

  std::vector<int> row_to_col(N, -1);
  for (int j = 0; j < N; ++j) {
    if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = j;
  }
  for (int i = 0; i < n; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && j < m) {
      result.row_to_col[i] = j;
      result.total_cost += cost.at(i, j);
    }
  }
  return result;
}

MatchResult match_objects(std::span<const BevObject> preds,
                          std::span<const BevObject> targets, double gate) {
  if (!(gate > 0.0)) throw std::invalid_argument("match_objects: gate must be positive");
  CostMatrix cost = CostMatrix::zeros(static_cast<int>(preds.size()),
                                      static_cast<int>(targets.size()));
  for (int i = 0; i < cost.rows; ++i) {
    for (int j = 0; j < cost.cols; ++j) {
      const double dx = preds[i].x - targets[j].x;
      const double dy = preds[i].y - targets[j].y;
      cost.at(i, j) = std::sqrt(dx * dx + dy * dy);
    }
  }
  const Assignment assign = hungarian(cost);
  MatchResult match;
  std::vector<char> target_taken(targets.size(), 0);
  for (int i = 0; i < cost.rows; ++i) {
    const int j = assign.row_to_col[i];
    if (j >= 0 && cost.at(i, j) <= gate) {
      match.pairs.push_back({i, j, cost.at(i, j)});
      target_taken[j] = 1;
    } else {
      match.unmatched_preds.push_back(i);
    }
  }
  for (int j = 0; j < cost.cols; ++j) {
    if (!target_taken[j]) match.unmatched_targets.push_back(j);
  }
  return match;
}

std::optional<double> position_error(const MatchResult& match) {
  if (match.pairs.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& p : match.pairs) sum += p.cost;
  return sum / static_cast<double>(match.pairs.size());
}

std::optional<double> segmentation_iou(const SemanticBevMap& pred,
                                       const SemanticBevMap& gt, int class_id) {
  if (!(pred.grid == gt.grid)) {
    throw std::invalid_argument("segmentation_iou: grid mismatch");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const bool p = pred.labels[i] == class_id;
    const bool g = gt.labels[i] == class_id;
    inter += p && g;
    uni += p || g;
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

// One Sutherland-Hodgman pass: keep the part of `subject` on the left of the
// directed edge a -> b.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& subject, Vec2 a, Vec2 b) {
  std::vector<Vec2> out;
  const std::size_t n = subject.size();
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& cur = subject[i];
    const Vec2& nxt = subject[(i + 1) % n];
    const double side_cur = (b.x - a.x) * (cur.y - a.y) - (b.y - a.y) * (cur.x - a.x);
    const double side_nxt = (b.x - a.x) * (nxt.y - a.y) - (b.y - a.y) * (nxt.x - a.x);
    if (side_cur >= 0.0) out.push_back(cur);
    if ((side_cur >= 0.0) != (side_nxt >= 0.0)) {
      const double t = side_cur / (side_cur - side_nxt);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

}  // namespace

double rotated_rect_iou(const BevObject& a, const BevObject& b) {
  if (!(a.length > 0.0) || !(a.width > 0.0) || !(b.length > 0.0) || !(b.width > 0.0)) {
    throw std::invalid_argument("rotated_rect_iou: degenerate rectangle");
  }
  const auto ca = footprint_corners(a);
  const auto cb = footprint_corners(b);
  std::vector<Vec2> poly(ca.begin(), ca.end());
  for (int e = 0; e < 4 && !poly.empty(); ++e) {
    poly = clip_half_plane(poly, cb[e], cb[(e + 1) % 4]);
  }
  const double inter = poly.size() >= 3 ? std::abs(polygon_area(poly)) : 0.0;
  const double area_a = a.length * a.width;
  const double area_b = b.length * b.width;
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::optional<double> average_precision(std::span<const BevObject> preds,
                                        std::span<const BevObject> targets,
                                        double iou_threshold) {
  if (targets.empty()) return std::nullopt;
  if (preds.empty()) return 0.0;

  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    return preds[l].confidence > preds[r].confidence;
  });

  std::vector<char> taken(targets.size(), 0);
  std::vector<double> precision, recall_at;
  precision.reserve(preds.size());
  recall_at.reserve(preds.size());
  int tp = 0, fp = 0;
  for (const int pi : order) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (taken[t]) continue;
      const double iou = rotated_rect_iou(preds[pi], targets[t]);
      if (iou >= iou_threshold && iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(t);
      }
    }
    if (best >= 0) {
      taken[best] = 1;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall_at.push_back(static_cast<double>(tp) / static_cast<double>(targets.size()));
  }

  // Running max of precision from the right, then 101-point interpolation.
  std::vector<double> max_prec(precision.size());
  double running = 0.0;
  for (std::size_t k = precision.size(); k-- > 0;) {
    running = std::max(running, precision[k]);
    max_prec[k] = running;
  }
  double ap = 0.0;
  for (int s = 0; s <= 100; ++s) {
    const double r = s / 100.0;
    const auto it = std::lower_bound(recall_at.begin(), recall_at.end(), r);
    if (it != recall_at.end()) ap += max_prec[static_cast<std::size_t>(it - recall_at.begin())];
  }
  return ap / 101.0;
}

std::optional<double> recall(const MatchResult& match, int n_targets) {
  if (n_targets < 0) throw std::invalid_argument("recall: negative target count");
  if (n_targets == 0) return std::nullopt;
  return static_cast<double>(match.pairs.size()) / static_cast<double>(n_targets);
}

MetricsReport evaluate_metrics(const SemanticBevMap& pred_labels,
                               std::span<const BevObject> pred_objects,
                               const SemanticBevMap& gt_labels,
                               std::span<const BevObject> gt_objects,
                               double gate,
                               const std::vector<std::uint8_t>* cell_mask) {
  MetricsReport report;
  int num_classes = std::max(pred_labels.num_classes, gt_labels.num_classes);
  for (const auto& o : pred_objects) num_classes = std::max(num_classes, o.class_id + 1);
  for (const auto& o : gt_objects) num_classes = std::max(num_classes, o.class_id + 1);

  SemanticBevMap pred = pred_labels;
  SemanticBevMap gt = gt_labels;
  if (cell_mask != nullptr) {
    if (cell_mask->size() != pred.labels.size()) {
      throw std::invalid_argument("evaluate_metrics: mask size mismatch");
    }
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
      if (!(*cell_mask)[i]) {
        pred.labels[i] = 0;
        gt.labels[i] = 0;
      }
    }
  }
  for (int c = 1; c < num_classes; ++c) {
    if (const auto iou = segmentation_iou(pred, gt, c)) {
      report.seg_iou_pct[c] = 100.0 * *iou;
    }
  }

  const std::array<int, 3> thresholds{50, 75, 90};
  double pooled_cost = 0.0;
  std::size_t pooled_pairs = 0;
  for (int c = 1; c < num_classes; ++c) {
    std::vector<BevObject> p, t;
    for (const auto& o : pred_objects)
      if (o.class_id == c) p.push_back(o);
    for (const auto& o : gt_objects)
      if (o.class_id == c) t.push_back(o);
    if (p.empty() && t.empty()) continue;

    const MatchResult match = match_objects(p, t, gate);
    for (const auto& pair : match.pairs) pooled_cost += pair.cost;
    pooled_pairs += match.pairs.size();
    if (const auto r = recall(match, static_cast<int>(t.size()))) {
      report.recall_pct[c] = 100.0 * *r;
    }
    for (const int thr : thresholds) {
      if (const auto ap = average_precision(p, t, thr / 100.0)) {
        report.ap_pct[c][thr] = 100.0 * *ap;
      }
    }
  }
  if (pooled_pairs > 0) {
    report.mean_position_error_m = pooled_cost / static_cast<double>(pooled_pairs);
  }
  return report;
}

}  // namespace bev
