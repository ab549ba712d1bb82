#include "nctc/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "nctc/errors.hpp"

namespace nctc {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) {
    throw InvalidArgument("learning rate must be nonnegative");
  }
  if (!(l2_weight >= 0.0)) {
    throw InvalidArgument("L2 weight must be nonnegative");
  }
  if (!(epsilon > 0.0)) {
    throw InvalidArgument("epsilon must be positive");
  }
  if (epochs < 0 || batch_size < 1) {
    throw InvalidArgument("epochs must be >= 0 and batch size >= 1");
  }
}

AdaGradState AdaGradState::for_model(const Model& model) {
  AdaGradState state;
  for (auto span : tensor_spans(model)) {
    state.accumulators.emplace_back(span.size(), 0.0);
  }
  return state;
}

void adagrad_step(std::span<const std::span<double>> params,
                  std::span<const std::span<const double>> grads, AdaGradState& state,
                  double learning_rate, double epsilon) {
  if (params.size() != grads.size() || params.size() != state.accumulators.size()) {
    throw InvalidArgument("adagrad_step: tensor count mismatch");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& acc = state.accumulators[t];
    if (params[t].size() != grads[t].size() || acc.size() != grads[t].size()) {
      throw InvalidArgument("adagrad_step: tensor " + std::to_string(t) + " shape mismatch");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double g = grads[t][i];
      if (g == 0.0) {
        continue;
      }
      acc[i] += g * g;
      params[t][i] -= learning_rate * g / (std::sqrt(acc[i]) + epsilon);
    }
  }
  ++state.step_count;
}

void adagrad_step(Model& model, const Gradients& grads, AdaGradState& state,
                  const TrainConfig& cfg) {
  const auto p = tensor_spans(model);
  const auto g = tensor_spans(grads);
  adagrad_step(p, g, state, cfg.learning_rate, cfg.epsilon);
}

void apply_l2(Gradients& grads, const Model& model, double l2_weight) {
  if (l2_weight == 0.0) {
    return;
  }
  const auto g = tensor_spans(grads);
  const auto p = tensor_spans(model);
  if (g.size() != p.size()) {
    throw InvalidArgument("apply_l2: tensor count mismatch");
  }
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g[t].size() != p[t].size()) {
      throw InvalidArgument("apply_l2: tensor shape mismatch");
    }
    for (std::size_t i = 0; i < g[t].size(); ++i) {
      g[t][i] += 2.0 * l2_weight * p[t][i];
    }
  }
}

double l2_penalty(const Model& model, double l2_weight) {
  double sum = 0.0;
  for (auto span : tensor_spans(model)) {
    for (double v : span) {
      sum += v * v;
    }
  }
  return l2_weight * sum;
}

EvalSummary evaluate(const Model& model, std::span<const EncodedExample> data) {
  EvalSummary s;
  s.count = data.size();
  if (data.empty()) {
    return s;
  }
  std::size_t correct = 0;
  const Index m = model.config.label_count();
  for (const auto& ex : data) {
    const auto out = forward_model(model, ex.input, Mode::Eval, nullptr);
    s.loss += cross_entropy(out.probs, one_hot(ex.label, m));
    correct += argmax(out.probs) == ex.label ? 1 : 0;
  }
  s.loss /= static_cast<double>(data.size());
  s.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return s;
}

namespace {

void check_examples(const Model& model, std::span<const EncodedExample> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data[i];
    if (ex.label < 0 || ex.label >= model.config.label_count()) {
      throw DataError(std::string(what) + " example " + std::to_string(i) +
                      ": label outside the model's label range");
    }
    if (ex.input.cols() != model.config.word_dim || ex.input.rows() < 1) {
      throw ShapeError(std::string(what) + " example " + std::to_string(i) +
                       ": input does not match the model's word dimension");
    }
  }
}

void accumulate(Gradients& into, const Gradients& g) {
  const auto dst = tensor_spans(into);
  const auto src = tensor_spans(g);
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t i = 0; i < dst[t].size(); ++i) {
      dst[t][i] += src[t][i];
    }
  }
}

}  // namespace

TrainResult train(Model& model, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& cfg,
                  const TrainCallbacks& callbacks) {
  cfg.validate();
  model.validate();
  if (train_set.empty()) {
    throw DataError("training set is empty");
  }
  check_examples(model, train_set, "training");
  check_examples(model, dev_set, "dev");

  using Clock = std::chrono::steady_clock;
  Rng rng(cfg.seed);
  AdaGradState state = AdaGradState::for_model(model);
  const Index m = model.config.label_count();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best_model = model;
  double best_dev = -1.0;
  std::size_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    if (cfg.shuffle) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), pos + cfg.batch_size);
      Gradients batch = zero_gradients(model);
      for (std::size_t j = pos; j < end; ++j) {
        const auto& ex = train_set[order[j]];
        const auto target = one_hot(ex.label, m);
        const auto out = forward_model(model, ex.input, Mode::Train, &rng);
        if (callbacks.on_step) {
          callbacks.on_step({epoch, step, order[j], cross_entropy(out.probs, target)});
        }
        accumulate(batch, backward_model(model, out, target));
        ++step;
      }
      apply_l2(batch, model, cfg.l2_weight);
      adagrad_step(model, batch, state, cfg);
    }

    EpochStats stats;
    stats.epoch = epoch;
    const auto train_eval = evaluate(model, train_set);
    stats.train_loss = train_eval.loss + l2_penalty(model, cfg.l2_weight);
    stats.train_accuracy = train_eval.accuracy;
    stats.dev_accuracy = dev_set.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : evaluate(model, dev_set).accuracy;
    stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.epochs.push_back(stats);
    if (callbacks.on_epoch) {
      callbacks.on_epoch(stats);
    }

    if (dev_set.empty()) {
      result.best_model = model;
      result.best_epoch = epoch;
    } else if (stats.dev_accuracy > best_dev) {
      best_dev = stats.dev_accuracy;
      result.best_model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace nctc
