#include "nctc/bench.hpp"

#include <algorithm>
#include <chrono>

#include "nctc/errors.hpp"
#include "nctc/feature_layer.hpp"

namespace nctc {

namespace {

template <class F>
double median_ms(int trials, F&& body) {
  using Clock = std::chrono::steady_clock;
  std::vector<double> times;
  times.reserve(trials);
  for (int i = 0; i < trials; ++i) {
    const auto start = Clock::now();
    body();
    times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  const auto mid = times.size() / 2;
  return times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchSetup& setup) {
  if (setup.trials < 1) {
    throw InvalidArgument("bench needs at least one trial");
  }
  Rng rng(setup.seed);
  const LayerParams params = init_layer(setup.word_dim, setup.hidden, setup.order, rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<BenchRow> rows;
  for (const Index len : setup.lengths) {
    if (len < 1) {
      throw InvalidArgument("bench lengths must be positive");
    }
    Sequence x(len, setup.word_dim);
    for (Index i = 0; i < x.size(); ++i) {
      x.data()[i] = unit(rng);
    }
    Sequence grad = Sequence::Ones(len, setup.hidden);

    BenchRow row;
    row.length = len;
    volatile double sink = 0.0;
    row.forward_ms = median_ms(setup.trials, [&] {
      sink = sink + forward(params, x, setup.decay).output(0, 0);
    });
    row.forward_backward_ms = median_ms(setup.trials, [&] {
      const auto trace = forward(params, x, setup.decay);
      sink = sink + backward(params, trace, grad).output(0, 0);
    });
    if (len <= setup.oracle_max_length) {
      row.oracle_ms = median_ms(setup.trials, [&] {
        sink = sink + forward_reference(params, x, setup.decay)(0, 0);
      });
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nctc
