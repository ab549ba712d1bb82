#include "nctc/feature_layer.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "nctc/errors.hpp"

namespace nctc {

namespace {

void check_decay(double decay) {
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw InvalidArgument("decay must lie in [0, 1), got " + std::to_string(decay));
  }
}

void check_input(const LayerParams& params, const Sequence& input) {
  params.validate();
  if (input.rows() < 1) {
    throw ShapeError("input sequence is empty");
  }
  if (input.cols() != params.input_dim()) {
    throw ShapeError("input has " + std::to_string(input.cols()) + " columns, layer expects " +
                     std::to_string(params.input_dim()));
  }
  if (!input.allFinite()) {
    throw NumericError("input sequence contains non-finite values");
  }
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = dist(rng);
    }
  }
}

}  // namespace

void LayerParams::validate() const {
  if (slots.empty()) {
    throw ShapeError("layer has no slot matrices");
  }
  const Index h = output.rows();
  const Index d = slots.front().cols();
  if (h < 1 || d < 1) {
    throw ShapeError("layer dimensions must be positive");
  }
  if (output.cols() != h) {
    throw ShapeError("output matrix must be h x h");
  }
  if (bias.size() != h) {
    throw ShapeError("bias length must equal h");
  }
  for (const auto& u : slots) {
    if (u.rows() != h || u.cols() != d) {
      throw ShapeError("slot matrices must all be h x d_in");
    }
    if (!u.allFinite()) {
      throw NumericError("slot matrix contains non-finite values");
    }
  }
  if (!output.allFinite() || !bias.allFinite()) {
    throw NumericError("layer parameters contain non-finite values");
  }
}

double init_bound(Index dim) { return std::sqrt(3.0 / static_cast<double>(dim)); }

LayerParams init_layer(Index input_dim, Index hidden_dim, int order, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || order < 1) {
    throw InvalidArgument("init_layer: dimensions and order must be positive");
  }
  LayerParams p;
  p.slots.reserve(order);
  for (int m = 0; m < order; ++m) {
    Eigen::MatrixXd u(hidden_dim, input_dim);
    fill_uniform(u, init_bound(input_dim), rng);
    p.slots.push_back(std::move(u));
  }
  p.output.resize(hidden_dim, hidden_dim);
  fill_uniform(p.output, init_bound(hidden_dim), rng);
  p.bias = Eigen::VectorXd::Constant(hidden_dim, 0.01);
  return p;
}

ForwardTrace forward(const LayerParams& params, const Sequence& input, double decay) {
  check_decay(decay);
  check_input(params, input);

  const int n = params.order();
  const Index len = input.rows();
  const Index h = params.hidden_dim();

  ForwardTrace t;
  t.input = input;
  t.decay = decay;
  t.projections.reserve(n);
  for (const auto& u : params.slots) {
    t.projections.emplace_back(input * u.transpose());
  }

  t.f.assign(n, Sequence::Zero(len, h));
  t.s.assign(n - 1, Sequence::Zero(len + 1, h));
  t.f[0] = t.projections[0];
  for (int m = 0; m < n; ++m) {
    if (m > 0) {
      // f_m[k] = s_{m-1}[k-1] (.) U_m x_k, with s row k covering positions < k.
      t.f[m] = t.s[m - 1].topRows(len).cwiseProduct(t.projections[m]);
    }
    if (m + 1 < n) {
      auto& s = t.s[m];
      for (Index k = 0; k < len; ++k) {
        s.row(k + 1) = decay * s.row(k) + t.f[m].row(k);
      }
    }
  }

  t.features = t.f[0];
  for (int m = 1; m < n; ++m) {
    t.features += t.f[m];
  }
  t.output = t.features * params.output;
  return t;
}

Sequence forward_reference(const LayerParams& params, const Sequence& input, double decay) {
  check_decay(decay);
  check_input(params, input);

  const int n = params.order();
  const Index len = input.rows();
  const Index h = params.hidden_dim();
  Sequence z = Sequence::Zero(len, h);

  // Positions chosen so far, last element first: tuple[0] = k.
  std::vector<Index> tuple;
  std::function<void(int)> extend = [&](int remaining) {
    // Every prefix is itself a complete (|tuple|)-gram ending at k.
    Eigen::VectorXd prod = Eigen::VectorXd::Ones(h);
    const int m = static_cast<int>(tuple.size());
    for (int slot = 0; slot < m; ++slot) {
      // tuple is stored in reverse, so slot 0 is the earliest position.
      const Index pos = tuple[m - 1 - slot];
      prod = prod.cwiseProduct(params.slots[slot] * input.row(pos).transpose());
    }
    const Index gaps = (tuple.front() - tuple.back()) - (m - 1);
    const double weight = std::pow(decay, static_cast<double>(gaps));  // pow(0, 0) == 1
    z.row(tuple.front()) += weight * (params.output.transpose() * prod).transpose();
    if (remaining == 0) {
      return;
    }
    for (Index prev = tuple.back() - 1; prev >= 0; --prev) {
      tuple.push_back(prev);
      extend(remaining - 1);
      tuple.pop_back();
    }
  };

  for (Index k = 0; k < len; ++k) {
    tuple.assign(1, k);
    extend(n - 1);
  }
  return z;
}

LayerGradients backward(const LayerParams& params, const ForwardTrace& trace,
                        const Sequence& grad_output) {
  params.validate();
  const int n = params.order();
  const Index len = trace.length();
  const Index h = params.hidden_dim();
  if (static_cast<int>(trace.f.size()) != n || static_cast<int>(trace.s.size()) != n - 1 ||
      static_cast<int>(trace.projections.size()) != n || trace.input.cols() != params.input_dim() ||
      trace.features.cols() != h) {
    throw InvalidArgument("trace was not produced by these layer parameters");
  }
  if (grad_output.rows() != len || grad_output.cols() != h) {
    throw ShapeError("output gradient must be L x h");
  }

  LayerGradients g;
  g.output = trace.features.transpose() * grad_output;
  const Sequence grad_features = grad_output * params.output.transpose();

  std::vector<Sequence> grad_proj(n);
  // Total gradient reaching f[m]: direct path through the feature sum plus
  // the path through s[m] into f[m+1].
  Sequence grad_f = grad_features;
  for (int m = n - 1; m >= 1; --m) {
    const auto s_prev = trace.s[m - 1].topRows(len);
    grad_proj[m] = grad_f.cwiseProduct(s_prev);

    // Direct contribution to s[m-1] row k from f[m] row k.
    const Sequence grad_s = grad_f.cwiseProduct(trace.projections[m]);
    Sequence next = grad_features;
    // s row k+1 = decay * s row k + f row k, so f row k receives the
    // accumulated gradient of every s row j > k, discounted by decay^(j-k-1).
    Eigen::RowVectorXd carry = Eigen::RowVectorXd::Zero(h);
    for (Index k = len - 1; k >= 0; --k) {
      if (k + 1 < len) {
        carry = grad_s.row(k + 1) + trace.decay * carry;
      }
      next.row(k) += carry;
    }
    grad_f = std::move(next);
  }
  grad_proj[0] = std::move(grad_f);

  g.slots.reserve(n);
  g.input = Sequence::Zero(len, params.input_dim());
  for (int m = 0; m < n; ++m) {
    g.slots.emplace_back(grad_proj[m].transpose() * trace.input);
    g.input.noalias() += grad_proj[m] * params.slots[m];
  }
  return g;
}

}  // namespace nctc
