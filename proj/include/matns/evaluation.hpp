#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matns/estimators.hpp"
#include "matns/graph.hpp"

namespace matns {

/// Counts over unordered off-diagonal pairs.
struct ConfusionPoint {
  double lambda = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t condition_positives = 0;
  std::size_t condition_negatives = 0;
};

inline constexpr double kDefaultPaucCutoff = 0.15;

struct RocCurve {
  std::vector<ConfusionPoint> points;  // sorted by fpr, then tpr; includes (0,0) and (1,1)
  double partial_auc = 0.0;
  double cutoff = kDefaultPaucCutoff;
};

/// Throws DimensionMismatch when the graphs differ in dimension. A rate
/// whose denominator is zero is reported as 0.
ConfusionPoint confusion(const EdgeSet& est, const EdgeSet& truth);

/// One point per lambda plus the (0,0) and (1,1) anchors.
RocCurve roc_from_path(std::span<const PathPoint> path, const EdgeSet& truth,
                       double cutoff = kDefaultPaucCutoff);

/// Trapezoid area of the curve over fpr in [0, cutoff], divided by cutoff.
/// At repeated fpr the largest tpr is kept. Points need not be sorted.
double partial_auc(std::span<const ConfusionPoint> points, double cutoff = kDefaultPaucCutoff);

/// Full-range area, same conventions.
double full_auc(std::span<const ConfusionPoint> points);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // 1/(R-1) convention, 0 when R = 1
  std::size_t count = 0;

  /// sd / sqrt(R)
  double standard_error() const;
};

Summary aggregate(std::span<const double> values);

}  // namespace matns
