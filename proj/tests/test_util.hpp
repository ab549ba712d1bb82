#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "nctc/feature_layer.hpp"

namespace nctc::testing {

inline Sequence random_sequence(Index len, Index dim, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unit(-scale, scale);
  Sequence x(len, dim);
  for (Index i = 0; i < x.size(); ++i) {
    x.data()[i] = unit(rng);
  }
  return x;
}

/// 1x1 layer with every matrix equal to `value`.
inline LayerParams scalar_layer(int order, double value = 1.0) {
  LayerParams p;
  for (int m = 0; m < order; ++m) {
    p.slots.push_back(Eigen::MatrixXd::Constant(1, 1, value));
  }
  p.output = Eigen::MatrixXd::Constant(1, 1, value);
  p.bias = Eigen::VectorXd::Constant(1, 0.01);
  return p;
}

inline Sequence column(std::initializer_list<double> values) {
  Sequence x(static_cast<Index>(values.size()), 1);
  Index i = 0;
  for (double v : values) {
    x(i++, 0) = v;
  }
  return x;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("nctc_test_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace nctc::testing
