#include "lkcell/metrics.hpp"

#include <algorithm>
#include <set>

namespace lkcell {

namespace {

// Pairwise intersections and per-id sizes in one pass over the grids.
struct Contingency {
  std::map<std::pair<int, int>, long long> inter;
  std::map<int, long long> gt_size;
  std::map<int, long long> pred_size;
};

Contingency build_contingency(const GridI& gt, const GridI& pred) {
  if (!gt.same_shape(pred)) {
    throw ShapeError("match_instances: gt and pred grids disagree on shape");
  }
  Contingency c;
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const int g = gt.v[i], p = pred.v[i];
    if (g > 0) ++c.gt_size[g];
    if (p > 0) ++c.pred_size[p];
    if (g > 0 && p > 0) ++c.inter[{g, p}];
  }
  return c;
}

// Keeps only instances of one class; labels keep their original ids.
GridI filter_class(const InstanceSegmentation& seg, int cls) {
  GridI out(seg.label_map.rows, seg.label_map.cols, 0);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const int lb = seg.label_map.v[i];
    if (lb == 0) continue;
    auto it = seg.instance_classes.find(lb);
    if (it != seg.instance_classes.end() && it->second == cls) out.v[i] = lb;
  }
  return out;
}

GridB foreground_mask(const GridI& labels) {
  GridB m(labels.rows, labels.cols, 0);
  for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = labels.v[i] > 0;
  return m;
}

}  // namespace

double mask_iou(const GridB& a, const GridB& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("mask_iou: masks disagree on shape");
  }
  long long inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const bool va = a.v[i] != 0, vb = b.v[i] != 0;
    inter += va && vb;
    uni += va || vb;
  }
  if (uni == 0) throw DomainError("mask_iou: both masks are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_instances(const GridI& gt, const GridI& pred, double threshold) {
  Contingency c = build_contingency(gt, pred);

  MatchResult result;
  result.threshold = threshold;
  std::set<int> matched_gt, matched_pred;
  for (const auto& [pair, inter] : c.inter) {
    const auto [g, p] = pair;
    const double uni = static_cast<double>(c.gt_size[g] + c.pred_size[p] - inter);
    const double iou = static_cast<double>(inter) / uni;
    if (iou > threshold) {
      if (threshold >= 0.5 && (matched_gt.count(g) || matched_pred.count(p))) {
        throw ValidationError("match_instances: uniqueness violated at threshold " +
                              std::to_string(threshold));
      }
      result.matches.push_back({g, p, iou});
      matched_gt.insert(g);
      matched_pred.insert(p);
    }
  }
  for (const auto& [g, size] : c.gt_size) {
    if (!matched_gt.count(g)) result.unmatched_gt.push_back(g);
  }
  for (const auto& [p, size] : c.pred_size) {
    if (!matched_pred.count(p)) result.unmatched_pred.push_back(p);
  }
  return result;
}

double dq(const MatchResult& match) {
  const int tp = match.tp(), fp = match.fp(), fn = match.fn();
  if (tp + fp + fn == 0) return 1.0;  // empty on both sides
  return tp / (tp + 0.5 * fp + 0.5 * fn);
}

double sq(const MatchResult& match) {
  if (match.tp() == 0) return 1.0;
  return match.iou_sum() / match.tp();
}

double pq(const MatchResult& match) { return dq(match) * sq(match); }

double bpq(const InstanceSegmentation& gt, const InstanceSegmentation& pred) {
  return pq(match_instances(gt.label_map, pred.label_map, 0.5));
}

double mpq(const InstanceSegmentation& gt, const InstanceSegmentation& pred,
           int num_classes) {
  if (num_classes < 1) throw DomainError("mpq: num_classes must be >= 1");
  double sum = 0.0;
  int present = 0;
  for (int cls = 1; cls <= num_classes; ++cls) {
    const GridI g = filter_class(gt, cls);
    const GridI p = filter_class(pred, cls);
    const bool gt_has = std::any_of(g.v.begin(), g.v.end(), [](int v) { return v > 0; });
    const bool pr_has = std::any_of(p.v.begin(), p.v.end(), [](int v) { return v > 0; });
    if (!gt_has && !pr_has) continue;
    sum += pq(match_instances(g, p, 0.5));
    ++present;
  }
  if (present == 0) {
    throw DomainError("mpq: no class present in either segmentation");
  }
  return sum / present;
}

double dice(const GridB& gt_fg, const GridB& pred_fg) {
  if (!gt_fg.same_shape(pred_fg)) {
    throw ShapeError("dice: masks disagree on shape");
  }
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gt_fg.v.size(); ++i) {
    const bool g = gt_fg.v[i] != 0, p = pred_fg.v[i] != 0;
    tp += g && p;
    fp += !g && p;
    fn += g && !p;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

double detection_f1(const MatchResult& match) {
  const int tp = match.tp(), fp = match.fp(), fn = match.fn();
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

MetricsReport evaluate_image(const InstanceSegmentation& gt,
                             const InstanceSegmentation& pred, int num_classes) {
  MetricsReport rep;
  const MatchResult binary = match_instances(gt.label_map, pred.label_map, 0.5);
  rep.dq = dq(binary);
  rep.sq = sq(binary);
  rep.pq = pq(binary);
  rep.bpq = rep.pq;
  rep.f1 = detection_f1(binary);
  rep.tp_instances = binary.tp();
  rep.fp_instances = binary.fp();
  rep.fn_instances = binary.fn();

  const GridB gt_fg = foreground_mask(gt.label_map);
  const GridB pred_fg = foreground_mask(pred.label_map);
  rep.dice = dice(gt_fg, pred_fg);
  for (std::size_t i = 0; i < gt_fg.v.size(); ++i) {
    const bool g = gt_fg.v[i] != 0, p = pred_fg.v[i] != 0;
    rep.tp_pixels += g && p;
    rep.fp_pixels += !g && p;
    rep.fn_pixels += g && !p;
  }

  double mpq_sum = 0.0;
  int present = 0;
  for (int cls = 1; cls <= num_classes; ++cls) {
    const GridI g = filter_class(gt, cls);
    const GridI p = filter_class(pred, cls);
    const bool gt_has = std::any_of(g.v.begin(), g.v.end(), [](int v) { return v > 0; });
    const bool pr_has = std::any_of(p.v.begin(), p.v.end(), [](int v) { return v > 0; });
    if (!gt_has && !pr_has) continue;
    const double class_pq = pq(match_instances(g, p, 0.5));
    rep.per_class_pq[cls] = class_pq;
    mpq_sum += class_pq;
    ++present;
  }
  rep.mpq = present > 0 ? mpq_sum / present : rep.bpq;
  return rep;
}

AggregateReport aggregate(
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
  if (reports.empty()) throw DomainError("aggregate: no reports");

  struct Acc {
    double dq = 0, sq = 0, pq = 0, bpq = 0, mpq = 0, dice = 0, f1 = 0;
    std::map<int, std::pair<double, int>> per_class;  // sum, count
    int n = 0;
  };
  std::map<std::string, Acc> by_tissue;
  for (const auto& [tissue, rep] : reports) {
    Acc& a = by_tissue[tissue];
    a.dq += rep.dq;
    a.sq += rep.sq;
    a.pq += rep.pq;
    a.bpq += rep.bpq;
    a.mpq += rep.mpq;
    a.dice += rep.dice;
    a.f1 += rep.f1;
    for (const auto& [cls, v] : rep.per_class_pq) {
      a.per_class[cls].first += v;
      a.per_class[cls].second += 1;
    }
    ++a.n;
  }

  AggregateReport out;
  for (const auto& [tissue, a] : by_tissue) {
    MetricsSummary s;
    s.images = a.n;
    s.dq = a.dq / a.n;
    s.sq = a.sq / a.n;
    s.pq = a.pq / a.n;
    s.bpq = a.bpq / a.n;
    s.mpq = a.mpq / a.n;
    s.dice = a.dice / a.n;
    s.f1 = a.f1 / a.n;
    for (const auto& [cls, sc] : a.per_class) {
      s.per_class_pq[cls] = sc.first / sc.second;
    }
    out.per_tissue[tissue] = s;
  }

  MetricsSummary& o = out.overall;
  std::map<int, std::pair<double, int>> per_class;
  for (const auto& [tissue, s] : out.per_tissue) {
    o.dq += s.dq;
    o.sq += s.sq;
    o.pq += s.pq;
    o.bpq += s.bpq;
    o.mpq += s.mpq;
    o.dice += s.dice;
    o.f1 += s.f1;
    o.images += s.images;
    for (const auto& [cls, v] : s.per_class_pq) {
      per_class[cls].first += v;
      per_class[cls].second += 1;
    }
  }
  const int t = static_cast<int>(out.per_tissue.size());
  o.dq /= t;
  o.sq /= t;
  o.pq /= t;
  o.bpq /= t;
  o.mpq /= t;
  o.dice /= t;
  o.f1 /= t;
  for (const auto& [cls, sc] : per_class) {
    o.per_class_pq[cls] = sc.first / sc.second;
  }
  return out;
}

}  // namespace lkcell
