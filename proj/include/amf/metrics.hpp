#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace amf {

/// counts[t][p]: samples of true class t predicted as p.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t trace() const;
};

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;  // true instances
  // No true and no predicted instances: F1 is reported as 0.
  bool degenerate = false;
};

/// Throws LengthMismatch, EmptyInput, or LabelOutOfRange for a class >= C.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds,
                                 std::span<const std::size_t> labels, std::size_t classes);

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels);

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

/// Unweighted mean of per-class F1 = 2TP / (2TP + FP + FN) over all C classes.
double uf1(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
           std::size_t classes);
double uf1(const ConfusionMatrix& cm);

}  // namespace amf
