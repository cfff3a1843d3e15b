#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "amf/model.hpp"
#include "amf/optim.hpp"

namespace amf {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  AdamConfig adam;
  // Per-class loss weights; empty means unweighted.
  std::vector<Real> class_weights;

  /// Throws InvalidConfig naming the offending field.
  void validate(std::size_t num_classes) const;
};

struct TrainResult {
  FusionModel model;
  std::vector<double> epoch_losses;  // mean loss per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch Adam on the parameters reachable from `modality`. Weights are
/// initialized from `seed` and batches drawn from the "shuffle" sub-stream of
/// `seed`, so the result is a pure function of the arguments.
/// Throws EmptyTrainSet, or DivergedLoss if a loss or gradient goes non-finite.
TrainResult train_model(std::span<const AVSample> train, const ModelConfig& model_config,
                        const TrainConfig& train_config, Modality modality, std::uint64_t seed,
                        const EpochCallback& on_epoch = {});

/// Mean cross-entropy of `model` over `samples` (unweighted).
double mean_loss(std::span<const AVSample> samples, const FusionModel& model, Modality modality);

}  // namespace amf
