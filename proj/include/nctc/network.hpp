#pragma once

#include <span>
#include <string>
#include <vector>

#include "nctc/feature_layer.hpp"

namespace nctc {

struct ModelConfig {
  int order = 3;
  Index hidden = 100;
  int layers = 1;
  double decay = 0.5;
  double dropout = 0.0;
  std::vector<std::string> labels;
  Index word_dim = 300;

  Index label_count() const { return static_cast<Index>(labels.size()); }
  void validate() const;
};

/// Stacked feature layers followed by a softmax over the concatenated
/// per-layer means. `classifier` is W, (layers * hidden) x labels.
struct Model {
  ModelConfig config;
  std::vector<LayerParams> layers;
  Eigen::MatrixXd classifier;

  void validate() const;
};

/// Same shapes as a Model's trainable tensors.
struct Gradients {
  std::vector<LayerParams> layers;
  Eigen::MatrixXd classifier;
};

enum class Mode { Train, Eval };

struct LayerRecord {
  ForwardTrace trace;
  Sequence activation;    // ReLU(Z + b), after dropout in train mode
  Sequence dropout_mask;  // 0 or 1/(1-p) per unit; empty when no dropout was applied
};

struct ModelOutput {
  Eigen::VectorXd probs;
  Eigen::VectorXd logits;
  Eigen::VectorXd features;  // concatenated layer means
  std::vector<Eigen::VectorXd> layer_means;
  std::vector<LayerRecord> records;
};

/// Layer 1 maps word_dim -> hidden, later layers hidden -> hidden.
/// The classifier starts at zero.
Model init_model(const ModelConfig& config, Rng& rng);

/// Zero tensors shaped like the model's parameters.
Gradients zero_gradients(const Model& model);

/// Flat views of every trainable tensor in storage order:
/// per layer U_1..U_n, O, b; then W.
std::vector<std::span<double>> tensor_spans(Model& model);
std::vector<std::span<const double>> tensor_spans(const Model& model);
std::vector<std::span<double>> tensor_spans(Gradients& grads);
std::vector<std::span<const double>> tensor_spans(const Gradients& grads);

/// Names matching tensor_spans order, e.g. "layer1.U2", "layer2.b", "W".
std::vector<std::string> tensor_names(const ModelConfig& config);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// -sum_l y_l log(max(p_l, 1e-12)). `target` must be a distribution.
double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& target);

Eigen::VectorXd one_hot(Index label, Index size);

/// `rng` is only consumed in train mode with dropout > 0; it may be null
/// otherwise.
ModelOutput forward_model(const Model& model, const Sequence& input, Mode mode, Rng* rng);

/// Gradients of cross_entropy(forward_model(...).probs, target). The input
/// gradient of layer 1 is dropped since word vectors stay fixed.
Gradients backward_model(const Model& model, const ModelOutput& output,
                         const Eigen::VectorXd& target);

/// One row per position: the softmax of W^T applied to that position's
/// concatenated post-activation features (no averaging), followed by the
/// expected score sum_s score_s * p(s). Shape L x (labels + 1).
Eigen::MatrixXd per_position_scores(const Model& model, const Sequence& input,
                                    const Eigen::VectorXd& score_values);

/// Index of the largest probability; ties go to the lowest index.
Index argmax(const Eigen::VectorXd& v);

Index predict(const Model& model, const Sequence& input);

}  // namespace nctc
