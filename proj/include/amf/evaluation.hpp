#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "amf/dataset.hpp"
#include "amf/json_config.hpp"
#include "amf/loso.hpp"
#include "amf/metrics.hpp"
#include "amf/model.hpp"
#include "amf/training.hpp"

namespace amf {

struct EvalConfig {
  ModelConfig model;
  TrainConfig train;
};

Json to_json(const EvalConfig& config);

/// Execution knobs that never change results.
struct RunOptions {
  std::size_t threads = 1;  // folds trained concurrently
  std::function<void(std::string_view)> log;
};

struct Prediction {
  std::string clip_id;
  std::string subject_id;
  std::size_t predicted = 0;
  std::size_t truth = 0;
};

struct FoldResult {
  std::string subject;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double accuracy = 0;
  std::vector<double> epoch_losses;
};

struct EvalReport {
  Modality modality = Modality::fused;
  std::uint64_t seed = 0;
  EvalConfig config;
  std::vector<std::string> class_names;
  std::uint64_t fold_plan_hash = 0;
  // Pooled over every held-out prediction, in fold order.
  std::vector<Prediction> predictions;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0;
  double uf1 = 0;
  std::vector<FoldResult> folds;
};

Json to_json(const EvalReport& report);
/// Aligned plain-text rendering of the headline numbers, per-class metrics,
/// confusion matrix and per-fold accuracy.
std::string format_report(const EvalReport& report);

/// Builds the report from pooled predictions; `folds` are carried through.
EvalReport make_report(Modality modality, std::uint64_t seed, const EvalConfig& config,
                       const std::vector<std::string>& class_names, std::uint64_t plan_hash,
                       std::vector<Prediction> predictions, std::vector<FoldResult> folds);

/// Throws InvalidConfig if the model geometry does not match the dataset and
/// MissingModality naming the first sample lacking an input `modality` needs.
void check_compatible(const Dataset& data, const ModelConfig& model, Modality modality);

/// Leave-one-subject-out: one freshly initialized model per fold, trained with
/// a per-fold seed derived from `seed`, scored on the held-out subject.
EvalReport run_loso(const Dataset& data, const EvalConfig& config, Modality modality,
                    std::uint64_t seed, const RunOptions& options = {});

struct AblationResult {
  std::array<EvalReport, 3> reports;  // visual, audio, fused
};

/// The three settings on one fold plan with identical per-fold seeds and budgets.
AblationResult run_ablation(const Dataset& data, const EvalConfig& config, std::uint64_t seed,
                            const RunOptions& options = {});

std::string_view ablation_row_name(Modality modality);
Json ablation_summary_json(const AblationResult& result);
/// Rows Visual / Audio / Visual+Audio with Acc (%) and UF1.
std::string format_ablation_table(const AblationResult& result);

}  // namespace amf
