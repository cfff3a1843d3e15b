#include "amf/loso.hpp"

#include <cstdio>
#include <map>

#include "amf/errors.hpp"

namespace amf {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) h = (h ^ c) * kFnvPrime;
  h = (h ^ 0xff) * kFnvPrime;  // field separator
}

}  // namespace

FoldPlan loso_splits(std::span<const AVSample> samples) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < samples.size(); ++i) by_subject[samples[i].subject_id].push_back(i);
  if (by_subject.size() < 2) {
    throw TooFewSubjects("leave-one-subject-out needs at least 2 subjects, found " +
                         std::to_string(by_subject.size()));
  }

  FoldPlan plan;
  plan.hash = kFnvOffset;
  for (const auto& [subject, test] : by_subject) {
    Fold fold{subject, {}, test};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].subject_id != subject) fold.train.push_back(i);
    }
    fnv_mix(plan.hash, subject);
    for (std::size_t i : test) fnv_mix(plan.hash, samples[i].clip_id);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

void check_fold(const Fold& fold, std::span<const AVSample> samples) {
  for (const auto* part : {&fold.train, &fold.test}) {
    for (std::size_t i : *part) {
      if (i >= samples.size()) {
        throw SubjectLeakage("fold for " + fold.held_out_subject + " references sample " +
                             std::to_string(i) + " of " + std::to_string(samples.size()));
      }
    }
  }
  for (std::size_t i : fold.train) {
    if (samples[i].subject_id == fold.held_out_subject) {
      throw SubjectLeakage("subject " + fold.held_out_subject + " appears in its own training set (" +
                           samples[i].clip_id + ")");
    }
  }
  for (std::size_t i : fold.test) {
    if (samples[i].subject_id != fold.held_out_subject) {
      throw SubjectLeakage("fold for " + fold.held_out_subject + " tests on " + samples[i].clip_id +
                           " from subject " + samples[i].subject_id);
    }
  }
}

void check_plan(const FoldPlan& plan, std::span<const AVSample> samples) {
  std::vector<int> seen(samples.size(), 0);
  for (const auto& fold : plan.folds) {
    check_fold(fold, samples);
    for (std::size_t i : fold.test) ++seen[i];
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (seen[i] != 1) {
      throw SubjectLeakage("sample " + samples[i].clip_id + " is tested " + std::to_string(seen[i]) +
                           " times");
    }
  }
}

std::string hash_hex(std::uint64_t hash) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace amf
