#pragma once

// Desk-scale task environments, ground-truth linear rewards, simulated
// teachers and the regret metric.

#include <Eigen/Dense>

#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dcp/active_query.hpp"
#include "dcp/feedback.hpp"
#include "dcp/features.hpp"
#include "dcp/traj_opt.hpp"
#include "dcp/workspace.hpp"

namespace dcp {

enum class FeatureKind { DistTo, Height, Tilt };

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::DistTo;
  /// Target point for DistTo.
  Eigen::VectorXd point;
  /// Sign convention for sampled true weights: -1 (<= 0), +1 (>= 0) or 0 (free).
  int sign = 0;

  double value(const Eigen::VectorXd& coords, double table_height) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& coords) const;
};

struct Environment {
  std::string name;
  WorkspaceBox box;
  std::map<std::string, Eigen::VectorXd> landmarks;
  double table_height = 0.0;
  std::vector<FeatureDef> features;
  int default_horizon = 20;
  Eigen::VectorXd start;
  /// Sessions are goal-constrained exactly when the environment has a goal.
  std::optional<Eigen::VectorXd> goal;

  int dim() const { return box.dim(); }
  int feature_count() const { return static_cast<int>(features.size()); }
  int feature_index(const std::string& name) const;

  Eigen::VectorXd feature_vector(const Eigen::VectorXd& coords) const;
  Eigen::MatrixXd feature_jacobian(const Eigen::VectorXd& coords) const;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Feature map over a named subset of an environment's features.
class EnvFeatureMap final : public FeatureMap {
 public:
  EnvFeatureMap(const Environment& env, const std::vector<std::string>& names);
  /// All features of the environment.
  explicit EnvFeatureMap(const Environment& env);

  int dim() const override { return env_->dim(); }
  int feature_count() const override { return static_cast<int>(idx_.size()); }
  Eigen::VectorXd features(const Eigen::VectorXd& coords) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& coords) const override;
  const std::vector<int>& indices() const { return idx_; }

 private:
  const Environment* env_;
  std::vector<int> idx_;
};

Environment builtin_environment(const std::string& name);
std::vector<std::string> builtin_environment_names();

/// TOML environment definition; see envs/*.toml.
Environment load_environment(const std::filesystem::path& file);
Environment parse_environment(const std::string& toml_text);
/// A builtin name, or a path to a TOML file.
Environment resolve_environment(const std::string& name_or_path);

/// True weights over all environment features, unit l2 norm.
struct GroundTruthReward {
  Eigen::VectorXd theta;
};

/// Uniform on the unit sphere with each weight folded to its feature's sign convention.
GroundTruthReward sample_theta_star(const Environment& env, Rng& rng);
GroundTruthReward normalized_theta(const Eigen::VectorXd& theta);

/// One teaching problem: environment, hidden reward and boundary states.
struct Task {
  std::shared_ptr<const Environment> env;
  GroundTruthReward truth;
  Eigen::VectorXd start;
  std::optional<Eigen::VectorXd> goal;
  int horizon = 20;
};

double true_state_reward(const Environment& env, const GroundTruthReward& truth, const Eigen::VectorXd& coords);
double true_traj_reward(const Environment& env, const GroundTruthReward& truth, const Trajectory& xi);

/// R*(xi_star) - R*(xi), clamped at zero.
double regret(const Environment& env, const GroundTruthReward& truth, const Trajectory& xi, const Trajectory& xi_star);

/// Optimum of the true reward under the task's boundary constraints. Dense grid
/// search seeds plus heavy projected ascent; cached per task.
const Trajectory& oracle_optimum(const Task& task);

struct TeacherConfig {
  double demo_noise = 0.05;
  /// Infinity means noiseless comparisons.
  double pref_beta = std::numeric_limits<double>::infinity();
  int correction_window = 7;
  int correction_steps = 10;

  void validate(int horizon) const;
};

Demonstration teacher_demo(const Task& task, const TeacherConfig& cfg, Rng& rng);

struct TeacherCorrection {
  Correction correction;
  /// The teacher found no improvement; the snippet equals the replaced slice.
  bool declined = false;
};

/// Window with the largest summed true-reward deficit against the time-aligned
/// oracle. Ties go to the earliest window.
Window worst_window(const Task& task, const Trajectory& robot, int window_length);

TeacherCorrection teacher_correction(const Task& task, const Trajectory& robot, const TeacherConfig& cfg, Rng& rng);

PreferenceQuery teacher_preference(const Task& task, const QueryCandidate& q, const TeacherConfig& cfg, Rng& rng);

}  // namespace dcp
