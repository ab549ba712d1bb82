#include "nctc/network.hpp"

#include <cmath>
#include <string>

#include "nctc/errors.hpp"

namespace nctc {

namespace {

constexpr double kProbFloor = 1e-12;

template <class T, class M>
std::span<T> view(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <class T, class Params>
std::vector<std::span<T>> collect(Params& layers_owner) {
  std::vector<std::span<T>> out;
  for (auto& layer : layers_owner.layers) {
    for (auto& u : layer.slots) {
      out.push_back(view<T>(u));
    }
    out.push_back(view<T>(layer.output));
    out.push_back(view<T>(layer.bias));
  }
  out.push_back(view<T>(layers_owner.classifier));
  return out;
}

}  // namespace

void ModelConfig::validate() const {
  if (order < 1 || hidden < 1 || layers < 1 || word_dim < 1) {
    throw InvalidArgument("order, hidden, layers and word_dim must be positive");
  }
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw InvalidArgument("decay must lie in [0, 1)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw InvalidArgument("dropout must lie in [0, 1)");
  }
  if (labels.size() < 2) {
    throw InvalidArgument("at least two labels are required");
  }
}

void Model::validate() const {
  config.validate();
  if (static_cast<int>(layers.size()) != config.layers) {
    throw ShapeError("layer count does not match the configuration");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const auto& layer = layers[t];
    layer.validate();
    const Index expected_in = t == 0 ? config.word_dim : config.hidden;
    if (layer.order() != config.order || layer.hidden_dim() != config.hidden ||
        layer.input_dim() != expected_in) {
      throw ShapeError("layer " + std::to_string(t + 1) + " shape does not match the configuration");
    }
  }
  if (classifier.rows() != config.layers * config.hidden ||
      classifier.cols() != config.label_count()) {
    throw ShapeError("classifier must be (layers * hidden) x labels");
  }
  if (!classifier.allFinite()) {
    throw NumericError("classifier contains non-finite values");
  }
}

Model init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  Model model;
  model.config = config;
  for (int t = 0; t < config.layers; ++t) {
    const Index in = t == 0 ? config.word_dim : config.hidden;
    model.layers.push_back(init_layer(in, config.hidden, config.order, rng));
  }
  model.classifier = Eigen::MatrixXd::Zero(config.layers * config.hidden, config.label_count());
  return model;
}

Gradients zero_gradients(const Model& model) {
  Gradients g;
  for (const auto& layer : model.layers) {
    LayerParams z;
    for (const auto& u : layer.slots) {
      z.slots.push_back(Eigen::MatrixXd::Zero(u.rows(), u.cols()));
    }
    z.output = Eigen::MatrixXd::Zero(layer.output.rows(), layer.output.cols());
    z.bias = Eigen::VectorXd::Zero(layer.bias.size());
    g.layers.push_back(std::move(z));
  }
  g.classifier = Eigen::MatrixXd::Zero(model.classifier.rows(), model.classifier.cols());
  return g;
}

std::vector<std::span<double>> tensor_spans(Model& model) { return collect<double>(model); }
std::vector<std::span<const double>> tensor_spans(const Model& model) {
  return collect<const double>(model);
}
std::vector<std::span<double>> tensor_spans(Gradients& grads) { return collect<double>(grads); }
std::vector<std::span<const double>> tensor_spans(const Gradients& grads) {
  return collect<const double>(grads);
}

std::vector<std::string> tensor_names(const ModelConfig& config) {
  std::vector<std::string> names;
  for (int t = 1; t <= config.layers; ++t) {
    const std::string prefix = "layer" + std::to_string(t) + ".";
    for (int m = 1; m <= config.order; ++m) {
      names.push_back(prefix + "U" + std::to_string(m));
    }
    names.push_back(prefix + "O");
    names.push_back(prefix + "b");
  }
  names.emplace_back("W");
  return names;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - shift).exp();
  return e / e.sum();
}

double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& target) {
  if (probs.size() != target.size()) {
    throw InvalidArgument("cross_entropy: size mismatch");
  }
  if ((target.array() < 0.0).any() || std::abs(target.sum() - 1.0) > 1e-9) {
    throw InvalidArgument("cross_entropy: target is not a distribution");
  }
  double loss = 0.0;
  for (Index l = 0; l < probs.size(); ++l) {
    if (target[l] != 0.0) {
      loss -= target[l] * std::log(std::max(probs[l], kProbFloor));
    }
  }
  return loss;
}

Eigen::VectorXd one_hot(Index label, Index size) {
  if (label < 0 || label >= size) {
    throw InvalidArgument("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(size) + ")");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v[label] = 1.0;
  return v;
}

ModelOutput forward_model(const Model& model, const Sequence& input, Mode mode, Rng* rng) {
  const auto& cfg = model.config;
  if (input.cols() != cfg.word_dim) {
    throw ShapeError("input has " + std::to_string(input.cols()) + " columns, model expects " +
                     std::to_string(cfg.word_dim));
  }
  const bool drop = mode == Mode::Train && cfg.dropout > 0.0;
  if (drop && rng == nullptr) {
    throw InvalidArgument("train-mode dropout needs a random source");
  }
  const Index len = input.rows();

  ModelOutput out;
  out.features.resize(cfg.layers * cfg.hidden);
  out.records.reserve(cfg.layers);
  const Sequence* layer_input = &input;
  for (int t = 0; t < cfg.layers; ++t) {
    const auto& layer = model.layers[t];
    LayerRecord rec;
    rec.trace = forward(layer, *layer_input, cfg.decay);
    rec.activation = (rec.trace.output.rowwise() + layer.bias.transpose()).cwiseMax(0.0);
    if (drop) {
      std::bernoulli_distribution keep(1.0 - cfg.dropout);
      const double scale = 1.0 / (1.0 - cfg.dropout);
      rec.dropout_mask.resize(len, cfg.hidden);
      for (Index k = 0; k < len; ++k) {
        for (Index j = 0; j < cfg.hidden; ++j) {
          rec.dropout_mask(k, j) = keep(*rng) ? scale : 0.0;
        }
      }
      rec.activation = rec.activation.cwiseProduct(rec.dropout_mask);
    }
    Eigen::VectorXd mean = rec.activation.colwise().mean().transpose();
    out.features.segment(t * cfg.hidden, cfg.hidden) = mean;
    out.layer_means.push_back(std::move(mean));
    out.records.push_back(std::move(rec));
    layer_input = &out.records.back().activation;
  }
  out.logits = model.classifier.transpose() * out.features;
  out.probs = softmax(out.logits);
  return out;
}

Gradients backward_model(const Model& model, const ModelOutput& output,
                         const Eigen::VectorXd& target) {
  const auto& cfg = model.config;
  if (static_cast<int>(output.records.size()) != cfg.layers) {
    throw InvalidState("model output carries no forward traces for backward");
  }
  if (target.size() != cfg.label_count()) {
    throw InvalidArgument("target size does not match label count");
  }
  // Softmax + cross-entropy: d loss / d logits = p - y for a normalized y.
  const Eigen::VectorXd grad_logits = output.probs - target;

  Gradients g;
  g.layers.resize(cfg.layers);
  g.classifier = output.features * grad_logits.transpose();
  const Eigen::VectorXd grad_features = model.classifier * grad_logits;

  Sequence from_above;  // dL/d activation of layer t coming from layer t+1
  for (int t = cfg.layers - 1; t >= 0; --t) {
    const auto& layer = model.layers[t];
    const auto& rec = output.records[t];
    const Index len = rec.activation.rows();

    const Eigen::RowVectorXd grad_mean = grad_features.segment(t * cfg.hidden, cfg.hidden).transpose();
    Sequence grad_act = grad_mean.replicate(len, 1) / static_cast<double>(len);
    if (from_above.size() != 0) {
      grad_act += from_above;
    }
    if (rec.dropout_mask.size() != 0) {
      grad_act = grad_act.cwiseProduct(rec.dropout_mask);
    }
    // ReLU gate on the pre-activation Z + b.
    const Sequence pre = rec.trace.output.rowwise() + layer.bias.transpose();
    const Sequence grad_pre = (pre.array() > 0.0).select(grad_act, 0.0);

    LayerGradients lg = backward(layer, rec.trace, grad_pre);
    auto& dst = g.layers[t];
    dst.slots = std::move(lg.slots);
    dst.output = std::move(lg.output);
    dst.bias = grad_pre.colwise().sum().transpose();
    if (t > 0) {
      from_above = std::move(lg.input);
    }
  }
  return g;
}

Eigen::MatrixXd per_position_scores(const Model& model, const Sequence& input,
                                    const Eigen::VectorXd& score_values) {
  const Index m = model.config.label_count();
  if (score_values.size() != m) {
    throw InvalidArgument("expected " + std::to_string(m) + " score values, got " +
                          std::to_string(score_values.size()));
  }
  const ModelOutput out = forward_model(model, input, Mode::Eval, nullptr);
  const Index len = input.rows();
  const Index h = model.config.hidden;

  Eigen::MatrixXd table(len, m + 1);
  Eigen::VectorXd concat(model.config.layers * h);
  for (Index k = 0; k < len; ++k) {
    for (int t = 0; t < model.config.layers; ++t) {
      concat.segment(t * h, h) = out.records[t].activation.row(k).transpose();
    }
    const Eigen::VectorXd p = softmax(model.classifier.transpose() * concat);
    table.row(k).head(m) = p.transpose();
    table(k, m) = p.dot(score_values);
  }
  return table;
}

Index argmax(const Eigen::VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) {
      best = i;
    }
  }
  return best;
}

Index predict(const Model& model, const Sequence& input) {
  return argmax(forward_model(model, input, Mode::Eval, nullptr).probs);
}

}  // namespace nctc
