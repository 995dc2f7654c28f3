#pragma once

// Converts a state reward into a trajectory: maximize the summed reward over
// the free waypoints with the start (and optionally goal) pinned, by projected
// gradient ascent with backtracking and multiple restarts.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "dcp/feedback.hpp"
#include "dcp/features.hpp"
#include "dcp/reward_net.hpp"
#include "dcp/trajectory.hpp"
#include "dcp/workspace.hpp"

namespace dcp {

/// Summed state reward of a trajectory and its gradient wrt every waypoint.
class TrajectoryObjective {
 public:
  virtual ~TrajectoryObjective() = default;
  virtual double value(const Trajectory& xi) const = 0;
  /// d x (H + 1)
  virtual Eigen::MatrixXd gradient(const Trajectory& xi) const = 0;
};

/// sum over members, sum over states of r_theta(s).
class EnsembleObjective final : public TrajectoryObjective {
 public:
  EnsembleObjective(const RewardEnsemble& e, const FeatureMap* fm) : ensemble_(e), fm_(fm) {}
  double value(const Trajectory& xi) const override;
  Eigen::MatrixXd gradient(const Trajectory& xi) const override;

 private:
  const RewardEnsemble& ensemble_;
  const FeatureMap* fm_;
};

/// sum over states of w . phi(s).
class LinearFeatureObjective final : public TrajectoryObjective {
 public:
  LinearFeatureObjective(const FeatureMap& fm, Eigen::VectorXd weights);
  double value(const Trajectory& xi) const override;
  Eigen::MatrixXd gradient(const Trajectory& xi) const override;
  double state_value(const Eigen::VectorXd& coords) const;

 private:
  const FeatureMap& fm_;
  Eigen::VectorXd w_;
};

struct OptConfig {
  /// Random starting points in addition to the explicit seeds; the first is the straight line.
  int restarts = 5;
  int iters = 300;
  /// Largest waypoint move of the first trial step; <= 0 means 0.05 x workspace diagonal.
  double step = 0.0;
  bool goal_constrained = true;
  double smooth_weight = 1e-3;
  double tol = 1e-8;
  int max_halvings = 20;
  /// Perturbation scale for random restarts; <= 0 means 0.25 x workspace diagonal.
  double restart_sigma = 0.0;
};

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AscentResult {
  Trajectory trajectory;
  double objective = 0.0;
  /// Objective after the start point and after every accepted step.
  std::vector<double> history;
};

struct OptResult {
  Trajectory trajectory;
  double objective = 0.0;
  std::size_t start_index = 0;
  std::vector<AscentResult> runs;
};

/// reward - smooth_weight * sum of squared second differences.
double regularized_objective(const TrajectoryObjective& obj, const Trajectory& xi, double smooth_weight);

/// Local ascent from `start`. Columns with free[t] == false never move.
AscentResult ascend(const TrajectoryObjective& obj, const WorkspaceBox& box, const Trajectory& start,
                    const std::vector<bool>& free, const OptConfig& cfg);

/// Best trajectory over seeds and random restarts. Restarts run in parallel.
OptResult optimize(const TrajectoryObjective& obj, const WorkspaceBox& box, const Eigen::VectorXd& s0,
                   const std::optional<Eigen::VectorXd>& sH, int horizon, const OptConfig& cfg, std::uint64_t seed,
                   const std::vector<Trajectory>& seeds = {});

/// Moves interior waypoints by a linear blend of the endpoint offsets so the
/// endpoints become exactly s0 (and sH, when given).
Trajectory shift_endpoints(const Trajectory& xi, const Eigen::VectorXd& s0, const std::optional<Eigen::VectorXd>& sH);

/// The straight line (or s0 held when there is no goal), every demonstration
/// and every corrected robot trajectory, endpoint-shifted. Items with a
/// different horizon are skipped.
std::vector<Trajectory> default_seeds(const FeedbackStore& store, const Eigen::VectorXd& s0,
                                      const std::optional<Eigen::VectorXd>& sH, int horizon);

}  // namespace dcp
