#pragma once

// Trajectories, snippet windows and the acceleration-norm deformation
// operator used to generate nearby alternatives of a trajectory.

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <vector>

#include "dcp/rng.hpp"

namespace dcp {

/// One augmented robot state: workspace coordinates and, when the
/// environment supplies them, task features.
struct State {
  Eigen::VectorXd coords;
  std::optional<Eigen::VectorXd> features;

  /// coords followed by features (if any).
  Eigen::VectorXd augmented() const;
};

/// Fixed-length sequence of H+1 workspace states, stored column-wise as a
/// d x (H+1) matrix. Features are never stored; the environment recomputes
/// them from coordinates on demand.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(Eigen::MatrixXd coords);

  /// Linear interpolation from `from` to `to` over H steps.
  static Trajectory straight_line(const Eigen::VectorXd& from, const Eigen::VectorXd& to, int horizon);

  int horizon() const { return static_cast<int>(coords_.cols()) - 1; }
  int dim() const { return static_cast<int>(coords_.rows()); }
  int size() const { return static_cast<int>(coords_.cols()); }

  const Eigen::MatrixXd& coords() const { return coords_; }
  Eigen::MatrixXd& coords() { return coords_; }

  Eigen::VectorXd waypoint(int t) const { return coords_.col(t); }

  bool operator==(const Trajectory& other) const {
    return coords_.rows() == other.coords_.rows() && coords_.cols() == other.coords_.cols() &&
           coords_ == other.coords_;
  }

 private:
  Eigen::MatrixXd coords_;
};

/// Inclusive index range [start, end] of a trajectory.
struct Window {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool valid_for(int horizon) const { return start >= 0 && start < end && end <= horizon && length() >= 3; }
};

struct DeformationConfig {
  /// Peak per-waypoint displacement standard deviation, task units.
  double sigma = 0.1;
  /// Deform only waypoints 1..H-1 so the start and end states stay fixed.
  bool preserve_endpoints = true;
};

/// 10% of the bounding-box diagonal of `xi`, floored at 1e-3.
double default_sigma(const Trajectory& xi);

/// M = (A^T A)^-1 for the (L+2) x L second-difference operator A. Cached per L;
/// the returned reference stays valid for the life of the process.
const Eigen::MatrixXd& accel_norm_matrix(int interior_points);

/// Uncached build; used by the cache and by tests.
Eigen::MatrixXd build_accel_norm_matrix(int interior_points);

/// max_i sqrt((M M^T)_ii): the peak displacement std-dev produced by a
/// unit-variance lambda. Cached alongside M.
double accel_norm_unit_scale(int interior_points);

/// Number of waypoints the deformation moves for a given horizon.
int deformable_points(int horizon, bool preserve_endpoints);

/// xi + M lambda, applied independently per coordinate dimension.
/// lambda is L x d with L = deformable_points(H, preserve_endpoints).
Trajectory deform(const Trajectory& xi, const Eigen::MatrixXd& lambda, const DeformationConfig& cfg);

/// Draws lambda with i.i.d. N(0, (sigma / unit_scale)^2) entries, so the
/// largest per-waypoint displacement std-dev equals sigma.
Eigen::MatrixXd sample_lambda(int horizon, int dim, const DeformationConfig& cfg, Rng& rng);

std::vector<Trajectory> sample_alternatives(const Trajectory& xi, int count, const DeformationConfig& cfg,
                                            Rng& rng);

Trajectory slice(const Trajectory& xi, const Window& w);
Trajectory splice(const Trajectory& xi, const Window& w, const Trajectory& snippet);

/// Sum of squared second differences over all interior waypoints.
double squared_second_differences(const Trajectory& xi);

nlohmann::json trajectory_to_json(const Trajectory& xi);
/// Throws std::invalid_argument on a malformed object or ragged states.
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace dcp
