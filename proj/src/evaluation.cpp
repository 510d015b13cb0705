#include "matns/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matns/error.hpp"

namespace matns {

ConfusionPoint confusion(const EdgeSet& est, const EdgeSet& truth) {
  if (est.dimension() != truth.dimension()) {
    throw DimensionMismatch("estimate has dimension " + std::to_string(est.dimension()) +
                            ", truth has " + std::to_string(truth.dimension()));
  }
  ConfusionPoint c;
  c.condition_positives = truth.size();
  c.condition_negatives = truth.max_edges() - truth.size();
  for (const auto& [a, b] : est) {
    if (truth.contains(a, b)) ++c.true_positives;
    else ++c.false_positives;
  }
  c.tpr = c.condition_positives == 0 ? 0.0
                                     : static_cast<double>(c.true_positives) / static_cast<double>(c.condition_positives);
  c.fpr = c.condition_negatives == 0 ? 0.0
                                     : static_cast<double>(c.false_positives) / static_cast<double>(c.condition_negatives);
  return c;
}

namespace {

struct XY {
  double x;
  double y;
};

// Sorted by fpr with one point per distinct fpr, keeping the largest tpr.
std::vector<XY> envelope(std::span<const ConfusionPoint> points) {
  std::vector<XY> xy;
  xy.reserve(points.size());
  for (const auto& p : points) xy.push_back({p.fpr, p.tpr});
  std::sort(xy.begin(), xy.end(), [](const XY& a, const XY& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<XY> out;
  for (const auto& p : xy) {
    if (!out.empty() && out.back().x == p.x) out.back().y = std::max(out.back().y, p.y);
    else out.push_back(p);
  }
  return out;
}

double area_up_to(const std::vector<XY>& curve, double cutoff) {
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const XY a = curve[k];
    const XY b = curve[k + 1];
    if (a.x >= cutoff) break;
    if (b.x <= cutoff) {
      area += 0.5 * (a.y + b.y) * (b.x - a.x);
    } else {
      const double yc = a.y + (b.y - a.y) * (cutoff - a.x) / (b.x - a.x);
      area += 0.5 * (a.y + yc) * (cutoff - a.x);
    }
  }
  return area;
}

}  // namespace

double partial_auc(std::span<const ConfusionPoint> points, double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw InvalidArgument("cutoff must lie in (0, 1]");
  const auto curve = envelope(points);
  return std::clamp(area_up_to(curve, cutoff) / cutoff, 0.0, 1.0);
}

double full_auc(std::span<const ConfusionPoint> points) { return partial_auc(points, 1.0); }

RocCurve roc_from_path(std::span<const PathPoint> path, const EdgeSet& truth, double cutoff) {
  if (path.empty()) throw InvalidArgument("roc_from_path needs a non-empty path");
  RocCurve roc;
  roc.cutoff = cutoff;
  roc.points.reserve(path.size() + 2);
  ConfusionPoint origin;
  origin.lambda = std::numeric_limits<double>::infinity();
  origin.condition_positives = truth.size();
  origin.condition_negatives = truth.max_edges() - truth.size();
  ConfusionPoint corner = origin;
  corner.lambda = 0.0;
  corner.fpr = 1.0;
  corner.tpr = 1.0;
  corner.true_positives = corner.condition_positives;
  corner.false_positives = corner.condition_negatives;
  roc.points.push_back(origin);
  for (const auto& pt : path) {
    ConfusionPoint c = confusion(pt.edges, truth);
    c.lambda = pt.lambda;
    roc.points.push_back(c);
  }
  roc.points.push_back(corner);
  std::sort(roc.points.begin(), roc.points.end(), [](const ConfusionPoint& a, const ConfusionPoint& b) {
    if (a.fpr != b.fpr) return a.fpr < b.fpr;
    if (a.tpr != b.tpr) return a.tpr < b.tpr;
    return a.lambda > b.lambda;
  });
  roc.partial_auc = partial_auc(roc.points, cutoff);
  return roc;
}

double Summary::standard_error() const {
  return count == 0 ? 0.0 : sd / std::sqrt(static_cast<double>(count));
}

Summary aggregate(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("aggregate needs at least one value");
  Summary s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

}  // namespace matns
