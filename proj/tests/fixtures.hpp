#pragma once

// Small test doubles shared by several test files.

#include <Eigen/Dense>

#include <random>

#include "dcp/features.hpp"
#include "dcp/reward_net.hpp"
#include "dcp/trajectory.hpp"

namespace fixture {

/// phi(s) = ||s - g||, one feature.
class DistanceFeature final : public dcp::FeatureMap {
 public:
  explicit DistanceFeature(Eigen::VectorXd g) : g_(std::move(g)) {}
  int dim() const override { return static_cast<int>(g_.size()); }
  int feature_count() const override { return 1; }
  Eigen::VectorXd features(const Eigen::VectorXd& c) const override {
    return Eigen::VectorXd::Constant(1, (c - g_).norm());
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& c) const override {
    const Eigen::VectorXd diff = c - g_;
    const double n = diff.norm();
    return n > 0.0 ? Eigen::MatrixXd(diff.transpose() / n) : Eigen::MatrixXd::Zero(1, dim());
  }

 private:
  Eigen::VectorXd g_;
};

/// phi(s) = (sin s_0, s_0 * s_1), smooth and nonlinear, for chain-rule checks.
class WavyFeatures final : public dcp::FeatureMap {
 public:
  int dim() const override { return 2; }
  int feature_count() const override { return 2; }
  Eigen::VectorXd features(const Eigen::VectorXd& c) const override {
    Eigen::VectorXd f(2);
    f << std::sin(c[0]), c[0] * c[1];
    return f;
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& c) const override {
    Eigen::MatrixXd j(2, 2);
    j << std::cos(c[0]), 0.0, c[1], c[0];
    return j;
  }
};

inline dcp::Trajectory random_trajectory(int H, int d, dcp::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd c(d, H + 1);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return dcp::Trajectory(c);
}

/// Random network with biases filled in too, so every parameter matters.
inline dcp::NetParams random_net(int d_aug, int width, dcp::Rng& rng, double scale = 0.8) {
  dcp::NetParams p(d_aug, width);
  std::normal_distribution<double> n(0.0, scale);
  for (Eigen::Index i = 0; i < p.data().size(); ++i) p.data()[i] = n(rng) / std::sqrt(static_cast<double>(width));
  p.b3() = n(rng) * 0.3;
  return p;
}

}  // namespace fixture
