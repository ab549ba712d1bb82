#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nctc/data.hpp"
#include "nctc/network.hpp"

namespace nctc {

struct TrainConfig {
  double learning_rate = 0.01;
  double l2_weight = 1e-5;
  int epochs = 10;
  std::uint64_t seed = 1;
  double epsilon = 1e-8;
  bool shuffle = true;
  int batch_size = 1;

  void validate() const;
};

/// Per-coordinate sums of squared gradients, one buffer per parameter tensor.
struct AdaGradState {
  std::vector<std::vector<double>> accumulators;
  std::int64_t step_count = 0;

  static AdaGradState for_model(const Model& model);
};

/// G += g^2; theta -= lr * g / (sqrt(G) + eps), coordinate-wise.
void adagrad_step(std::span<const std::span<double>> params,
                  std::span<const std::span<const double>> grads, AdaGradState& state,
                  double learning_rate, double epsilon);
void adagrad_step(Model& model, const Gradients& grads, AdaGradState& state,
                  const TrainConfig& cfg);

/// Adds the gradient 2 * l2_weight * theta of the penalty l2_weight * |theta|^2,
/// over every tensor including biases and W.
void apply_l2(Gradients& grads, const Model& model, double l2_weight);

/// l2_weight * sum of squares of every trainable parameter.
double l2_penalty(const Model& model, double l2_weight);

struct EvalSummary {
  double loss = 0.0;  // mean cross-entropy, eval mode
  double accuracy = 0.0;
  std::size_t count = 0;
};

EvalSummary evaluate(const Model& model, std::span<const EncodedExample> data);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // eval-mode mean cross-entropy + L2 penalty, after the epoch
  double train_accuracy = 0.0;
  double dev_accuracy = 0.0;  // NaN without a dev set
  double seconds = 0.0;
};

struct StepInfo {
  int epoch = 0;
  std::size_t step = 0;
  std::size_t example = 0;  // index into the training set
  double loss = 0.0;        // train-mode loss before the update
};

struct TrainCallbacks {
  std::function<void(const EpochStats&)> on_epoch;
  std::function<void(const StepInfo&)> on_step;
};

struct TrainResult {
  Model best_model;  // best dev accuracy (earliest on ties); final model without dev data
  int best_epoch = 0;
  std::vector<EpochStats> epochs;
};

/// Stochastic AdaGrad over shuffled examples. `model` holds the final
/// parameters on return. Deterministic for a fixed seed.
TrainResult train(Model& model, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks = {});

}  // namespace nctc
