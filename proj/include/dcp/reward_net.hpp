#pragma once

// Per-state reward network r(s) = tanh(w3 . lrelu(W2 lrelu(W1 s + b1) + b2) + b3),
// its ensemble, hand-derived reverse-mode gradients and the Adam update.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dcp/features.hpp"
#include "dcp/trajectory.hpp"

namespace dcp {

/// Weights of one reward network, stored as a single flat vector so the same
/// type doubles as a parameter-shaped gradient.
///
/// Layout: W1 (width x d_aug, column-major), b1, W2 (width x width), b2, w3, b3.
class NetParams {
 public:
  NetParams() = default;
  NetParams(int d_aug, int width, double leak = 0.01);

  static std::size_t parameter_count(int d_aug, int width);

  int input_width() const { return d_aug_; }
  int hidden_width() const { return width_; }
  double leak() const { return leak_; }
  std::size_t size() const { return static_cast<std::size_t>(data_.size()); }

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }

  Eigen::Map<Eigen::MatrixXd> w1();
  Eigen::Map<const Eigen::MatrixXd> w1() const;
  Eigen::Map<Eigen::VectorXd> b1();
  Eigen::Map<const Eigen::VectorXd> b1() const;
  Eigen::Map<Eigen::MatrixXd> w2();
  Eigen::Map<const Eigen::MatrixXd> w2() const;
  Eigen::Map<Eigen::VectorXd> b2();
  Eigen::Map<const Eigen::VectorXd> b2() const;
  Eigen::Map<Eigen::RowVectorXd> w3();
  Eigen::Map<const Eigen::RowVectorXd> w3() const;
  double& b3() { return data_[data_.size() - 1]; }
  double b3() const { return data_[data_.size() - 1]; }

  /// Zero-valued parameters with the same shapes.
  NetParams zeros_like() const;
  bool all_finite() const { return data_.allFinite(); }

  bool operator==(const NetParams& o) const {
    return d_aug_ == o.d_aug_ && width_ == o.width_ && leak_ == o.leak_ && data_.size() == o.data_.size() &&
           data_ == o.data_;
  }

 private:
  std::size_t off_b1() const;
  std::size_t off_w2() const;
  std::size_t off_b2() const;
  std::size_t off_w3() const;

  int d_aug_ = 0;
  int width_ = 0;
  double leak_ = 0.01;
  Eigen::VectorXd data_;
};

struct RewardEnsemble {
  std::vector<NetParams> members;

  int size() const { return static_cast<int>(members.size()); }
  int input_width() const { return members.empty() ? 0 : members.front().input_width(); }
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
NetParams init_net(int d_aug, int width, std::uint64_t seed, double leak = 0.01);
RewardEnsemble init_ensemble(int members, int d_aug, int width, std::uint64_t seed, double leak = 0.01);

/// Per-column rewards of an augmented-state batch (d_aug x T) -> 1 x T.
Eigen::RowVectorXd state_rewards(const NetParams& theta, const Eigen::MatrixXd& aug_states);
double state_reward(const NetParams& theta, const State& s);
double state_reward(const NetParams& theta, const Eigen::VectorXd& aug_state);

/// R(xi) = sum over its states of r(s).
double traj_reward(const NetParams& theta, const Eigen::MatrixXd& aug_states);
double traj_reward(const NetParams& theta, const Trajectory& xi, const FeatureMap* fm);

double ensemble_state_reward(const RewardEnsemble& e, const State& s);
/// Mean over members for every column, 1 x T.
Eigen::RowVectorXd ensemble_state_rewards(const RewardEnsemble& e, const Eigen::MatrixXd& aug_states);

/// d(sum_t adjoint_t * r(x_t)) / d(theta) for a batch of augmented states.
NetParams grad_params(const NetParams& theta, const Eigen::MatrixXd& aug_states,
                      const Eigen::RowVectorXd& adjoints);

/// Single forward pass, then backpropagation of the adjoints that
/// `adjoint_of` derives from the batch's per-column rewards.
NetParams grad_params_fused(const NetParams& theta, const Eigen::MatrixXd& aug_states,
                            const std::function<Eigen::RowVectorXd(const Eigen::RowVectorXd&)>& adjoint_of);

/// One trajectory's contribution to a loss: dLoss/dR(xi) = adjoint.
struct TrajectoryAdjoint {
  const Eigen::MatrixXd* aug_states;
  double adjoint;
};
NetParams grad_params(const NetParams& theta, std::span<const TrajectoryAdjoint> terms);

/// Gradient of r wrt the augmented input for every column: d_aug x T.
Eigen::MatrixXd grad_aug_input(const NetParams& theta, const Eigen::MatrixXd& aug_states);

/// d(ensemble_state_reward)/d(coords), composing the feature Jacobian of `fm`.
Eigen::VectorXd grad_input(const RewardEnsemble& e, const State& s, const FeatureMap* fm);

void adam_step(NetParams& theta, const NetParams& grad, AdamState& st);

// Binary format: one JSON header line {"d_aug","W","layers","leak","count","checksum"}
// followed by `count` little-endian IEEE-754 doubles.
void write_params(std::ostream& os, const NetParams& theta);
NetParams read_params(std::istream& is);

void save_ensemble(const std::filesystem::path& file, const RewardEnsemble& e);
/// Throws std::runtime_error naming `file` on truncation, checksum mismatch or bad header.
RewardEnsemble load_ensemble(const std::filesystem::path& file);

}  // namespace dcp
