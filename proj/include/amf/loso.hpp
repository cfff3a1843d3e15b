#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amf/sample.hpp"

namespace amf {

/// Indices refer to the sample list the plan was built from.
struct Fold {
  std::string held_out_subject;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<Fold> folds;  // sorted by held-out subject id
  /// FNV-1a over subject ids and the clip ids of each test set.
  std::uint64_t hash = 0;
};

/// One fold per distinct subject. Throws TooFewSubjects below two subjects.
FoldPlan loso_splits(std::span<const AVSample> samples);

/// Throws SubjectLeakage if a fold's training set contains the held-out
/// subject, or if the test sets fail to partition the samples.
void check_fold(const Fold& fold, std::span<const AVSample> samples);
void check_plan(const FoldPlan& plan, std::span<const AVSample> samples);

std::string hash_hex(std::uint64_t hash);

}  // namespace amf
