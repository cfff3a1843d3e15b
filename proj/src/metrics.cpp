#include "amf/metrics.hpp"

#include <string>

#include "amf/errors.hpp"

namespace amf {

namespace {

void check_lengths(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
  if (preds.size() != labels.size()) {
    throw LengthMismatch("got " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw EmptyInput("no predictions to score");
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (std::size_t c : row) n += c;
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < classes; ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds,
                                 std::span<const std::size_t> labels, std::size_t classes) {
  check_lengths(preds, labels);
  ConfusionMatrix cm{classes, std::vector<std::vector<std::size_t>>(
                                  classes, std::vector<std::size_t>(classes, 0))};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] >= classes || preds[i] >= classes) {
      throw LabelOutOfRange("class index " + std::to_string(std::max(labels[i], preds[i])) +
                            " at position " + std::to_string(i) + " with C=" +
                            std::to_string(classes));
    }
    ++cm.counts[labels[i]][preds[i]];
  }
  return cm;
}

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
  check_lengths(preds, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(cm.classes);
  for (std::size_t c = 0; c < cm.classes; ++c) {
    std::size_t tp = cm.counts[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < cm.classes; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    auto& m = out[c];
    m.support = tp + fn;
    m.degenerate = tp + fp + fn == 0;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.degenerate ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
  }
  return out;
}

double uf1(const ConfusionMatrix& cm) {
  if (cm.classes == 0) throw EmptyInput("uf1 needs at least one class");
  double total = 0;
  for (const auto& m : per_class_metrics(cm)) total += m.f1;
  return total / static_cast<double>(cm.classes);
}

double uf1(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
           std::size_t classes) {
  return uf1(confusion_matrix(preds, labels, classes));
}

}  // namespace amf
