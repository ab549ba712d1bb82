#include <gtest/gtest.h>

#include <json.hpp>

#include "nctc/diagnostics.hpp"
#include "nctc/errors.hpp"
#include "test_util.hpp"

namespace nctc::diag {
namespace {

LayerParams ones_layer(Index d, int n) {
  LayerParams p;
  for (int m = 0; m < n; ++m) {
    p.slots.push_back(Eigen::MatrixXd::Ones(1, d));
  }
  p.output = Eigen::MatrixXd::Ones(1, 1);
  p.bias = Eigen::VectorXd::Zero(1);
  return p;
}

TEST(FullTensor, RankOneOfOnesIsAllOnes) {
  const auto t = materialize_full_tensor(ones_layer(3, 3));
  EXPECT_EQ(t.shape, (std::vector<Index>{3, 3, 3, 1}));
  ASSERT_EQ(t.values.size(), 27u);
  for (double v : t.values) {
    EXPECT_DOUBLE_EQ(v, 1.0);
  }
}

TEST(FullTensor, ZeroOutputGivesZeroTensor) {
  Rng rng(1);
  auto p = init_layer(2, 3, 3, rng);
  p.output.setZero();
  for (double v : materialize_full_tensor(p).values) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(FullTensor, EntriesFollowKruskalSum) {
  Rng rng(2);
  const auto p = init_layer(2, 2, 3, rng);
  const auto t = materialize_full_tensor(p);
  for (Index j = 0; j < 2; ++j) {
    for (Index k = 0; k < 2; ++k) {
      for (Index l = 0; l < 2; ++l) {
        for (Index m = 0; m < 2; ++m) {
          double expected = 0.0;
          for (Index r = 0; r < 2; ++r) {
            expected += p.slots[0](r, j) * p.slots[1](r, k) * p.slots[2](r, l) * p.output(r, m);
          }
          EXPECT_NEAR(t.at({j, k, l, m}), expected, 1e-15);
        }
      }
    }
  }
}

TEST(FullTensor, ContractionMatchesFactoredForm) {
  Rng rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = init_layer(2, 2, 3, rng);
    std::vector<Eigen::VectorXd> words;
    for (int m = 0; m < 3; ++m) {
      words.emplace_back(Eigen::Vector2d(unit(rng), unit(rng)));
    }
    const auto full = contract(materialize_full_tensor(p), words);
    const auto factored = factored_ngram(p, words);
    EXPECT_LT((full - factored).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FullTensor, RefusesOversizedTensor) {
  Rng rng(4);
  const auto p = init_layer(101, 1, 3, rng);  // 101^3 > 10^6
  EXPECT_THROW(materialize_full_tensor(p), InvalidArgument);
  EXPECT_NO_THROW(materialize_full_tensor(init_layer(100, 1, 3, rng)));
}

TEST(DpEquivalence, PassesOnFiveHundredInstances) {
  const auto r = check_dp_equivalence(500, 7);
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_LT(r.max_abs_dev, 1e-9);
  EXPECT_EQ(r.instances, 500u);
}

TEST(DpEquivalence, EmptyRunIsVacuousPass) {
  const auto r = check_dp_equivalence(0, 7);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_abs_dev, 0.0);
}

TEST(DpEquivalence, WorstSeedReplays) {
  const auto r = check_dp_equivalence(50, 11);
  const auto inst = make_dp_instance(r.worst_seed);
  const double dev = (forward(inst.params, inst.input, inst.decay).output -
                      forward_reference(inst.params, inst.input, inst.decay))
                         .cwiseAbs()
                         .maxCoeff();
  EXPECT_EQ(dev, r.max_abs_dev);
  const auto j = nlohmann::json::parse(r.json());
  EXPECT_EQ(j["instances"], 50);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["worst_seed"].get<std::uint64_t>(), r.worst_seed);
}

TEST(DpEquivalence, InstancesCoverTheSampledGrid) {
  bool saw_order[4] = {};
  bool saw_decay_zero = false, saw_decay_high = false;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto inst = make_dp_instance(s);
    EXPECT_GE(inst.input.rows(), 1);
    EXPECT_LE(inst.input.rows(), 8);
    EXPECT_LE(inst.params.input_dim(), 5);
    EXPECT_LE(inst.params.hidden_dim(), 4);
    saw_order[inst.params.order()] = true;
    saw_decay_zero |= inst.decay == 0.0;
    saw_decay_high |= inst.decay == 0.9;
  }
  EXPECT_TRUE(saw_order[2] && saw_order[3]);
  EXPECT_TRUE(saw_decay_zero && saw_decay_high);
}

TEST(InitVariance, SliceSquaredNormIsNearOne) {
  const auto r = check_init_variance(50, 50, 100'000, 1);
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_GE(r.estimate, 0.9);
  EXPECT_LE(r.estimate, 1.1);
  const auto j = nlohmann::json::parse(r.json());
  EXPECT_EQ(j["instances"], 100000);
}

TEST(InitVariance, OneDimensionalSlotsAreExactInExpectation) {
  // d = h = 1: each factor is U[-sqrt3, sqrt3]^2 with mean exactly 1.
  const auto r = check_init_variance(1, 1, 100'000, 2);
  EXPECT_TRUE(r.pass) << r.text();
  EXPECT_NEAR(r.estimate, 1.0, 5 * r.std_error);
}

TEST(InitVariance, StandardErrorShrinksWithSamples) {
  const auto small = check_init_variance(10, 10, 10'000, 3);
  const auto large = check_init_variance(10, 10, 160'000, 3);
  // 16x samples -> 4x smaller standard error.
  const double ratio = small.std_error / large.std_error;
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}

TEST(InitVariance, RequiresEnoughSamples) {
  EXPECT_THROW(check_init_variance(5, 5, 100, 1), InvalidArgument);
}

}  // namespace
}  // namespace nctc::diag
