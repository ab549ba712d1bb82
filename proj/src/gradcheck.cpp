#include "nctc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace nctc {

double GradcheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& t : tensors) {
    worst = std::max(worst, t.max_rel_error);
  }
  return worst;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradcheckReport gradient_check(const Model& model, const Sequence& input, Index label,
                               double epsilon, double tolerance, std::uint64_t dropout_seed) {
  const Eigen::VectorXd target = one_hot(label, model.config.label_count());

  Rng rng(dropout_seed);
  const auto out = forward_model(model, input, Mode::Train, &rng);
  const Gradients analytic = backward_model(model, out, target);

  Model probe = model;
  auto loss = [&]() {
    Rng replay(dropout_seed);
    return cross_entropy(forward_model(probe, input, Mode::Train, &replay).probs, target);
  };

  GradcheckReport report;
  report.epsilon = epsilon;
  report.tolerance = tolerance;
  const auto names = tensor_names(model.config);
  const auto params = tensor_spans(probe);
  const auto grads = tensor_spans(analytic);
  for (std::size_t t = 0; t < params.size(); ++t) {
    TensorCheck check;
    check.name = names[t];
    check.coordinates = params[t].size();
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      double& theta = params[t][i];
      const double saved = theta;
      theta = saved + epsilon;
      const double plus = loss();
      theta = saved - epsilon;
      const double minus = loss();
      theta = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      check.max_abs_error = std::max(check.max_abs_error, std::abs(grads[t][i] - numeric));
      check.max_rel_error = std::max(check.max_rel_error, relative_error(grads[t][i], numeric));
    }
    report.tensors.push_back(check);
  }
  report.pass = std::all_of(report.tensors.begin(), report.tensors.end(),
                            [&](const TensorCheck& c) { return c.max_rel_error < tolerance; });
  return report;
}

GradcheckReport random_gradient_check(const GradcheckSetup& setup, double epsilon,
                                      double tolerance) {
  ModelConfig cfg;
  cfg.layers = setup.layers;
  cfg.order = setup.order;
  cfg.hidden = setup.hidden;
  cfg.word_dim = setup.word_dim;
  cfg.decay = setup.decay;
  cfg.dropout = setup.dropout;
  for (Index l = 0; l < setup.labels; ++l) {
    cfg.labels.push_back("c" + std::to_string(l));
  }
  Rng rng(setup.seed);
  Model model = init_model(cfg, rng);

  // A zero W would zero every upstream gradient; biases are spread around 0
  // so the ReLU gate is exercised in both states.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Index i = 0; i < model.classifier.size(); ++i) {
    model.classifier.data()[i] = unit(rng);
  }
  for (auto& layer : model.layers) {
    for (Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = 0.5 * unit(rng);
    }
  }
  Sequence input(setup.length, setup.word_dim);
  for (Index k = 0; k < input.rows(); ++k) {
    for (Index j = 0; j < input.cols(); ++j) {
      input(k, j) = unit(rng);
    }
    input.row(k).normalize();
  }
  std::uniform_int_distribution<Index> pick(0, setup.labels - 1);
  const Index label = pick(rng);
  return gradient_check(model, input, label, epsilon, tolerance, rng());
}

}  // namespace nctc
