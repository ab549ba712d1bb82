#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nctc/network.hpp"

namespace nctc {

struct TensorCheck {
  std::string name;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradcheckReport {
  std::vector<TensorCheck> tensors;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  bool pass = false;

  double max_rel_error() const;
};

/// Relative error used throughout: |a - b| / max(|a|, |b|, floor). The
/// floor keeps coordinates whose true gradient is ~0 from dividing
/// round-off by round-off.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Compares backward_model against central differences of the train-mode
/// loss for every coordinate of every tensor. Dropout masks are replayed by
/// re-seeding `dropout_seed` for each evaluation.
GradcheckReport gradient_check(const Model& model, const Sequence& input, Index label,
                               double epsilon, double tolerance, std::uint64_t dropout_seed = 0);

struct GradcheckSetup {
  int layers = 2;
  int order = 3;
  Index hidden = 5;
  Index word_dim = 4;
  Index length = 6;
  Index labels = 3;
  double decay = 0.5;
  double dropout = 0.0;
  std::uint64_t seed = 1;
};

/// A random model whose every tensor (including W and b) is non-trivial, a
/// random input and label. Returns the report for that instance.
GradcheckReport random_gradient_check(const GradcheckSetup& setup, double epsilon,
                                      double tolerance);

}  // namespace nctc
