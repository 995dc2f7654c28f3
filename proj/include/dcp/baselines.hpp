#pragma once

// Simplified feature-based baselines. Both learn linear weights over a known
// subset of the environment's features and plan with the same optimizer as
// the network learner.

#include <Eigen/Dense>

#include <vector>

#include "dcp/sim_world.hpp"

namespace dcp {

/// Sum of the feature vector over every state of `xi`.
Eigen::VectorXd feature_sums(const FeatureMap& fm, const Trajectory& xi);

/// Perceptron-style update theta += rate * (Phi(human) - Phi(robot)).
class CoactiveLearner {
 public:
  CoactiveLearner(int feature_count, double rate);

  void update(const Eigen::VectorXd& phi_human, const Eigen::VectorXd& phi_robot);
  const Eigen::VectorXd& theta() const { return theta_; }

 private:
  Eigen::VectorXd theta_;
  double rate_;
};

/// Particle posterior over unit-norm linear weights with the pairwise softmax
/// likelihood sigma(beta * theta . (Phi_w - Phi_l)).
class LinearBayesLearner {
 public:
  LinearBayesLearner(int feature_count, int particles, double beta, Rng& rng);

  /// One winner-over-loser observation in feature-sum space. Returns false
  /// when every weight underflowed and the posterior was reset to uniform.
  bool observe(const Eigen::VectorXd& phi_winner, const Eigen::VectorXd& phi_loser);

  /// Weighted mean of the particles.
  Eigen::VectorXd mean() const;
  /// Shannon entropy of the weights, nats.
  double entropy() const;
  /// Expected information gain (bits) of asking winner-between (a, b).
  double info_gain(const Eigen::VectorXd& phi_a, const Eigen::VectorXd& phi_b) const;

  const Eigen::MatrixXd& particles() const { return particles_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double beta() const { return beta_; }

 private:
  Eigen::MatrixXd particles_;  // n x P
  Eigen::VectorXd weights_;
  double beta_;
};

/// Optimizer output for the linear reward theta . phi_known(s).
Trajectory plan_linear(const FeatureMap& fm, const Eigen::VectorXd& theta, const WorkspaceBox& box,
                       const Eigen::VectorXd& s0, const std::optional<Eigen::VectorXd>& sH, int horizon,
                       const OptConfig& cfg, std::uint64_t seed, const std::vector<Trajectory>& seeds);

}  // namespace dcp
