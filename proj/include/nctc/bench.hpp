#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nctc/types.hpp"

namespace nctc {

struct BenchSetup {
  std::vector<Index> lengths{250, 500, 1000, 2000};
  Index hidden = 100;
  Index word_dim = 50;
  int order = 3;
  double decay = 0.5;
  int trials = 5;
  Index oracle_max_length = 32;  // enumeration oracle is timed only up to this length
  std::uint64_t seed = 1;
};

/// Median wall-clock milliseconds per length.
struct BenchRow {
  Index length = 0;
  double forward_ms = 0.0;
  double forward_backward_ms = 0.0;
  std::optional<double> oracle_ms;
};

std::vector<BenchRow> run_bench(const BenchSetup& setup);

}  // namespace nctc
