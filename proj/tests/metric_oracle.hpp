#pragma once

#include <cstddef>
#include <vector>

// Brute-force scoring straight from the definitions: every class is scored by
// scanning all (prediction, label) pairs, no shared confusion-matrix code.
namespace amf::oracle {

inline double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

inline double f1(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels,
                 std::size_t cls) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == cls, t = labels[i] == cls;
    if (p && t) ++tp;
    if (p && !t) ++fp;
    if (!p && t) ++fn;
  }
  if (tp + fp + fn == 0) return 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

inline double uf1(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels,
                  std::size_t classes) {
  double total = 0;
  for (std::size_t c = 0; c < classes; ++c) total += f1(preds, labels, c);
  return total / static_cast<double>(classes);
}

}  // namespace amf::oracle
