#pragma once

#include <vector>

#include "nctc/types.hpp"

namespace nctc {

/// Parameters of one low-rank tensor feature layer.
///
/// The n-gram filter is the Kruskal tensor sum_r U_1[r] x ... x U_n[r] x O[r]
/// and is never stored densely. `slots[m]` maps the word in the (m+1)-th slot
/// of an n-gram into the h-dimensional rank space.
struct LayerParams {
  std::vector<Eigen::MatrixXd> slots;  // n matrices, h x d_in
  Eigen::MatrixXd output;              // O, h x h
  Eigen::VectorXd bias;                // added before the ReLU (network module)

  int order() const { return static_cast<int>(slots.size()); }
  Index input_dim() const { return slots.empty() ? 0 : slots.front().cols(); }
  Index hidden_dim() const { return output.rows(); }

  /// Throws ShapeError if the matrices disagree on h/d_in, NumericError on
  /// non-finite entries.
  void validate() const;
};

/// Everything `backward` needs from one `forward` evaluation.
///
/// Rows of `f[m]` hold the decayed sum of all (m+1)-gram features ending at
/// that position. `s[m]` has L+1 rows; row k is the running sum over
/// positions < k (row 0 is zero), so f[m+1] row k = s[m] row k * U_{m+1} x_k.
struct ForwardTrace {
  Sequence input;                     // X, L x d_in
  std::vector<Sequence> projections;  // U_m X, L x h each
  std::vector<Sequence> f;            // n tables, L x h
  std::vector<Sequence> s;            // n-1 tables, (L+1) x h
  Sequence features;                  // f_1 + ... + f_n
  Sequence output;                    // Z = features * O
  double decay = 0.0;

  Index length() const { return input.rows(); }
};

struct LayerGradients {
  std::vector<Eigen::MatrixXd> slots;
  Eigen::MatrixXd output;
  Sequence input;  // dX
};

/// Bound of the uniform initializer for a fan-in of `dim`: sqrt(3 / dim).
/// Rows drawn this way have unit expected squared norm.
double init_bound(Index dim);

/// U entries ~ U[-sqrt(3/d_in), sqrt(3/d_in)], O entries ~ U[-sqrt(3/h), sqrt(3/h)],
/// bias = 0.01. Draw order is U_1 .. U_n then O, each row-major.
LayerParams init_layer(Index input_dim, Index hidden_dim, int order, Rng& rng);

/// Dynamic-programming evaluation over all (gappy) n-grams, O(L n) mat-vecs.
/// `decay` must lie in [0, 1).
ForwardTrace forward(const LayerParams& params, const Sequence& input, double decay);

/// Brute-force enumeration of every index tuple i_1 < ... < i_m = k for
/// m = 1..n, each weighted by decay^(i_m - i_1 - (m - 1)). O(L^n) per call;
/// intended as an oracle for `forward`.
Sequence forward_reference(const LayerParams& params, const Sequence& input, double decay);

/// Gradient of sum_k <dZ[k], z[k]> with respect to U_1..U_n, O and X.
/// The bias is not touched here.
LayerGradients backward(const LayerParams& params, const ForwardTrace& trace,
                        const Sequence& grad_output);

}  // namespace nctc
