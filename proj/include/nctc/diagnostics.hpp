#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nctc/feature_layer.hpp"

namespace nctc::diag {

/// Dense order-(n+1) array of shape d x ... x d x h, last index fastest.
struct FullTensor {
  std::vector<Index> shape;
  std::vector<double> values;

  double at(const std::vector<Index>& idx) const;
};

/// Expands the Kruskal form sum_r U_1[r] x ... x U_n[r] x O[r].
/// Refuses (InvalidArgument) when d^n * h exceeds `max_entries`.
FullTensor materialize_full_tensor(const LayerParams& params, std::size_t max_entries = 1'000'000);

/// z_l = sum over all index tuples of T[i_1..i_n, l] * x_1[i_1] * ... * x_n[i_n].
Eigen::VectorXd contract(const FullTensor& tensor, const std::vector<Eigen::VectorXd>& words);

/// O^T (U_1 x_1 (.) ... (.) U_n x_n) for one n-gram.
Eigen::VectorXd factored_ngram(const LayerParams& params, const std::vector<Eigen::VectorXd>& words);

/// One randomly drawn oracle instance, reproducible from its seed.
struct DpInstance {
  LayerParams params;
  Sequence input;
  double decay = 0.0;
};

DpInstance make_dp_instance(std::uint64_t seed);

struct DpReport {
  std::size_t instances = 0;
  double max_abs_dev = 0.0;
  std::uint64_t worst_seed = 0;
  double tolerance = 1e-9;
  bool pass = true;

  std::string text() const;
  std::string json() const;
};

/// Compares forward against forward_reference on `count` random instances
/// (L in 1..8, d_in in 1..5, h in 1..4, n in {2,3}, decay in {0,.3,.5,.9}).
DpReport check_dp_equivalence(std::size_t count, std::uint64_t seed, double tolerance = 1e-9);

struct InitReport {
  Index input_dim = 0;
  Index hidden_dim = 0;
  int order = 3;
  std::size_t samples = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  bool pass = false;

  std::string text() const;
  std::string json() const;
};

/// Monte-Carlo estimate of E|U_1[r] x ... x U_n[r] x O[r]|^2 over rank-1
/// slices drawn by init_layer. The squared norm of an outer product is the
/// product of the row norms. Pass iff the estimate lies in [0.9, 1.1].
/// Requires samples >= 10^4.
InitReport check_init_variance(Index input_dim, Index hidden_dim, std::size_t samples,
                               std::uint64_t seed, int order = 3);

}  // namespace nctc::diag
