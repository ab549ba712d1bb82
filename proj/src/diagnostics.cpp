#include "nctc/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "nctc/errors.hpp"

namespace nctc::diag {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double FullTensor::at(const std::vector<Index>& idx) const {
  if (idx.size() != shape.size()) {
    throw InvalidArgument("FullTensor::at: wrong number of indices");
  }
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(idx[a]);
  }
  return values.at(flat);
}

FullTensor materialize_full_tensor(const LayerParams& params, std::size_t max_entries) {
  params.validate();
  const int n = params.order();
  const Index d = params.input_dim();
  const Index h = params.hidden_dim();

  double entries = static_cast<double>(h);
  for (int m = 0; m < n; ++m) {
    entries *= static_cast<double>(d);
  }
  if (entries > static_cast<double>(max_entries)) {
    throw InvalidArgument("full tensor would have " + std::to_string(entries) +
                          " entries, limit is " + std::to_string(max_entries));
  }

  FullTensor t;
  t.shape.assign(n, d);
  t.shape.push_back(h);
  t.values.assign(static_cast<std::size_t>(entries), 0.0);

  // Walk the word indices like an odometer; each step fills h entries.
  std::vector<Index> idx(n, 0);
  std::size_t base = 0;
  while (true) {
    for (Index r = 0; r < h; ++r) {
      double coef = 1.0;
      for (int m = 0; m < n; ++m) {
        coef *= params.slots[m](r, idx[m]);
      }
      for (Index l = 0; l < h; ++l) {
        t.values[base + l] += coef * params.output(r, l);
      }
    }
    base += static_cast<std::size_t>(h);
    int a = n - 1;
    while (a >= 0 && ++idx[a] == d) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) {
      break;
    }
  }
  return t;
}

Eigen::VectorXd contract(const FullTensor& tensor, const std::vector<Eigen::VectorXd>& words) {
  const std::size_t n = tensor.shape.size() - 1;
  if (words.size() != n) {
    throw ShapeError("contract: expected " + std::to_string(n) + " word vectors");
  }
  const Index d = n > 0 ? tensor.shape[0] : 0;
  const Index h = tensor.shape.back();
  for (const auto& w : words) {
    if (w.size() != d) {
      throw ShapeError("contract: word vector has the wrong dimension");
    }
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(h);
  std::vector<Index> idx(n, 0);
  std::size_t base = 0;
  while (true) {
    double weight = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      weight *= words[m][idx[m]];
    }
    for (Index l = 0; l < h; ++l) {
      z[l] += tensor.values[base + l] * weight;
    }
    base += static_cast<std::size_t>(h);
    int a = static_cast<int>(n) - 1;
    while (a >= 0 && ++idx[a] == d) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) {
      break;
    }
  }
  return z;
}

Eigen::VectorXd factored_ngram(const LayerParams& params,
                               const std::vector<Eigen::VectorXd>& words) {
  params.validate();
  if (static_cast<int>(words.size()) != params.order()) {
    throw ShapeError("factored_ngram: expected one word per slot");
  }
  Eigen::VectorXd prod = Eigen::VectorXd::Ones(params.hidden_dim());
  for (int m = 0; m < params.order(); ++m) {
    prod = prod.cwiseProduct(params.slots[m] * words[m]);
  }
  return params.output.transpose() * prod;
}

DpInstance make_dp_instance(std::uint64_t seed) {
  static constexpr double kDecays[] = {0.0, 0.3, 0.5, 0.9};
  Rng rng(seed);
  std::uniform_int_distribution<Index> len_dist(1, 8), d_dist(1, 5), h_dist(1, 4);
  std::uniform_int_distribution<int> n_dist(2, 3), decay_dist(0, 3);
  const Index len = len_dist(rng);
  const Index d = d_dist(rng);
  const Index h = h_dist(rng);
  const int n = n_dist(rng);

  DpInstance inst;
  inst.decay = kDecays[decay_dist(rng)];
  inst.params = init_layer(d, h, n, rng);
  std::uniform_real_distribution<double> x_dist(-1.0, 1.0);
  inst.input.resize(len, d);
  for (Index i = 0; i < len; ++i) {
    for (Index j = 0; j < d; ++j) {
      inst.input(i, j) = x_dist(rng);
    }
  }
  return inst;
}

DpReport check_dp_equivalence(std::size_t count, std::uint64_t seed, double tolerance) {
  DpReport report;
  report.instances = count;
  report.tolerance = tolerance;
  report.worst_seed = splitmix64(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t inst_seed = splitmix64(seed + i);
    const auto inst = make_dp_instance(inst_seed);
    const Sequence dp = forward(inst.params, inst.input, inst.decay).output;
    const Sequence ref = forward_reference(inst.params, inst.input, inst.decay);
    const double dev = (dp - ref).cwiseAbs().maxCoeff();
    if (dev > report.max_abs_dev || std::isnan(dev)) {
      report.max_abs_dev = dev;
      report.worst_seed = inst_seed;
    }
  }
  report.pass = report.max_abs_dev < tolerance;
  return report;
}

std::string DpReport::text() const {
  std::ostringstream os;
  os.precision(3);
  os << "dp-equivalence: instances=" << instances << " max_abs_dev=" << std::scientific
     << max_abs_dev << " tolerance=" << tolerance << " worst_seed=" << worst_seed << " "
     << (pass ? "PASS" : "FAIL");
  return os.str();
}

std::string DpReport::json() const {
  nlohmann::json j;
  j["check"] = "dp_equivalence";
  j["instances"] = instances;
  j["max_abs_dev"] = max_abs_dev;
  j["tolerance"] = tolerance;
  j["worst_seed"] = worst_seed;
  j["pass"] = pass;
  return j.dump();
}

InitReport check_init_variance(Index input_dim, Index hidden_dim, std::size_t samples,
                               std::uint64_t seed, int order) {
  if (samples < 10'000) {
    throw InvalidArgument("check_init_variance needs at least 10^4 samples");
  }
  InitReport report;
  report.input_dim = input_dim;
  report.hidden_dim = hidden_dim;
  report.order = order;
  report.samples = samples;

  // Each init_layer call yields h independent rank-1 slices (one per row).
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t drawn = 0;
  while (drawn < samples) {
    const LayerParams p = init_layer(input_dim, hidden_dim, order, rng);
    for (Index r = 0; r < hidden_dim && drawn < samples; ++r, ++drawn) {
      double v = p.output.row(r).squaredNorm();
      for (const auto& u : p.slots) {
        v *= u.row(r).squaredNorm();
      }
      sum += v;
      sum_sq += v * v;
    }
  }
  const double n = static_cast<double>(samples);
  report.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq - n * report.estimate * report.estimate) / (n - 1.0));
  report.std_error = std::sqrt(var / n);
  report.pass = report.estimate >= 0.9 && report.estimate <= 1.1;
  return report;
}

std::string InitReport::text() const {
  std::ostringstream os;
  os << "init-variance: d=" << input_dim << " h=" << hidden_dim << " n=" << order
     << " samples=" << samples << " estimate=" << estimate << " std_error=" << std_error << " "
     << (pass ? "PASS" : "FAIL");
  return os.str();
}

std::string InitReport::json() const {
  nlohmann::json j;
  j["check"] = "init_variance";
  j["instances"] = samples;
  j["estimate"] = estimate;
  j["std_error"] = std_error;
  j["max_abs_dev"] = std::abs(estimate - 1.0);
  j["pass"] = pass;
  return j.dump();
}

}  // namespace nctc::diag
