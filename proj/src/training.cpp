#include "amf/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "amf/errors.hpp"
#include "amf/random.hpp"

namespace amf {

void TrainConfig::validate(std::size_t num_classes) const {
  if (epochs == 0) throw InvalidConfig("train.epochs must be positive");
  if (batch_size == 0) throw InvalidConfig("train.batch_size must be positive");
  const auto& a = adam;
  if (!(a.learning_rate >= 0) || !std::isfinite(a.learning_rate)) {
    throw InvalidConfig("train.learning_rate must be finite and non-negative");
  }
  if (!(a.beta1 >= 0 && a.beta1 < 1)) throw InvalidConfig("train.beta1 must lie in [0, 1)");
  if (!(a.beta2 >= 0 && a.beta2 < 1)) throw InvalidConfig("train.beta2 must lie in [0, 1)");
  if (!(a.epsilon > 0) || !std::isfinite(a.epsilon)) throw InvalidConfig("train.epsilon must be positive");
  if (!class_weights.empty()) {
    if (class_weights.size() != num_classes) {
      throw InvalidConfig("train.class_weights has " + std::to_string(class_weights.size()) +
                          " entries for " + std::to_string(num_classes) + " classes");
    }
    for (Real w : class_weights) {
      if (!(w >= 0) || !std::isfinite(w)) {
        throw InvalidConfig("train.class_weights must be finite and non-negative");
      }
    }
  }
}

TrainResult train_model(std::span<const AVSample> train, const ModelConfig& model_config,
                        const TrainConfig& train_config, Modality modality, std::uint64_t seed,
                        const EpochCallback& on_epoch) {
  if (train.empty()) throw EmptyTrainSet("no training samples");
  model_config.validate();
  train_config.validate(model_config.num_classes);

  TrainResult result{FusionModel(model_config, seed), {}};
  FusionModel& model = result.model;
  std::vector<Var> params = model.parameters(modality);
  AdamState adam{train_config.adam, {}, {}, 0};
  Rng shuffle_rng(derive_seed(seed, "shuffle"));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = train_config.batch_size;

  for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const Real inv = Real(1) / static_cast<Real>(end - start);
      for (auto& p : params) p.zero_grad();
      try {
        // Gradients accumulate on the leaves across the per-sample passes.
        for (std::size_t k = start; k < end; ++k) {
          const AVSample& s = train[order[k]];
          Var loss = cross_entropy(forward(s, model, modality), s.label, train_config.class_weights);
          epoch_loss += loss.item();
          backward(scale(loss, inv));
        }
        adam_step(params, adam);
      } catch (const NonFiniteValue& e) {
        throw DivergedLoss("training diverged in epoch " + std::to_string(epoch + 1) + ": " + e.what());
      } catch (const NonFiniteGradient& e) {
        throw DivergedLoss("training diverged in epoch " + std::to_string(epoch + 1) + ": " + e.what());
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      throw DivergedLoss("training loss is not finite in epoch " + std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }
  for (auto& p : params) p.zero_grad();
  return result;
}

double mean_loss(std::span<const AVSample> samples, const FusionModel& model, Modality modality) {
  if (samples.empty()) throw EmptyInput("no samples to score");
  double total = 0;
  for (const auto& s : samples) total += cross_entropy(forward(s, model, modality), s.label).item();
  return total / static_cast<double>(samples.size());
}

}  // namespace amf
