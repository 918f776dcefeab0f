#pragma once

#include <map>
#include <string>
#include <vector>

#include "lkcell/postprocess.hpp"
#include "lkcell/tensor.hpp"

namespace lkcell {

// |a AND b| / |a OR b| over boolean masks. Both-empty is a domain error.
double mask_iou(const GridB& a, const GridB& b);

struct MatchResult {
  struct Match {
    int gt_id;
    int pred_id;
    double iou;
  };
  std::vector<Match> matches;
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  double threshold = 0.5;

  int tp() const { return static_cast<int>(matches.size()); }
  int fp() const { return static_cast<int>(unmatched_pred.size()); }
  int fn() const { return static_cast<int>(unmatched_gt.size()); }
  double iou_sum() const {
    double s = 0.0;
    for (const auto& m : matches) s += m.iou;
    return s;
  }
};

// All (gt, pred) instance pairs with IoU strictly above the threshold. At
// threshold >= 0.5 each id can appear in at most one match (enforced).
MatchResult match_instances(const GridI& gt, const GridI& pred, double threshold = 0.5);

// TP / (TP + 0.5 FP + 0.5 FN); 1 when the scene is empty on both sides.
double dq(const MatchResult& match);

// Mean IoU over matches; 1 by convention when there are none (PQ = DQ*SQ
// still collapses to 0 through DQ).
double sq(const MatchResult& match);

double pq(const MatchResult& match);

// PQ on class-erased label maps.
double bpq(const InstanceSegmentation& gt, const InstanceSegmentation& pred);

// Mean over classes of per-class PQ; classes absent from both gt and pred
// are excluded. All classes absent everywhere is a domain error.
double mpq(const InstanceSegmentation& gt, const InstanceSegmentation& pred,
           int num_classes);

// Pixel-level Dice over foreground masks: 2TP / (2TP + FP + FN); 1 when both
// masks are empty.
double dice(const GridB& gt_fg, const GridB& pred_fg);

// Instance-level F1: 2TPm / (2TPm + FPm + FNm); 1 when all counts are zero.
double detection_f1(const MatchResult& match);

struct MetricsReport {
  double dq = 0, sq = 0, pq = 0, bpq = 0, mpq = 0, dice = 0, f1 = 0;
  std::map<int, double> per_class_pq;  // classes present in gt or pred only
  // Instance-level counts (binary matching) and pixel-level counts.
  int tp_instances = 0, fp_instances = 0, fn_instances = 0;
  long long tp_pixels = 0, fp_pixels = 0, fn_pixels = 0;
};

MetricsReport evaluate_image(const InstanceSegmentation& gt,
                             const InstanceSegmentation& pred, int num_classes);

struct MetricsSummary {
  double dq = 0, sq = 0, pq = 0, bpq = 0, mpq = 0, dice = 0, f1 = 0;
  std::map<int, double> per_class_pq;
  int images = 0;
};

struct AggregateReport {
  std::map<std::string, MetricsSummary> per_tissue;
  MetricsSummary overall;  // unweighted mean of the per-tissue means
};

// Arithmetic mean per tissue, then unweighted mean across tissues.
AggregateReport aggregate(
    const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace lkcell
