#pragma once

#include <Eigen/Dense>

#include "dcp/trajectory.hpp"

namespace dcp {

/// Maps workspace coordinates to task features phi(s) with Jacobian.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  virtual int dim() const = 0;
  virtual int feature_count() const = 0;
  virtual Eigen::VectorXd features(const Eigen::VectorXd& coords) const = 0;
  /// feature_count() x dim()
  virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& coords) const = 0;
};

/// Augmented-state matrix (d + n) x (H + 1); coordinates only when `fm` is null.
Eigen::MatrixXd augment(const Trajectory& xi, const FeatureMap* fm);

State augmented_state(const Eigen::VectorXd& coords, const FeatureMap* fm);

/// Chain rule from an augmented-input gradient (d + n) x T back to coordinates d x T.
Eigen::MatrixXd coords_gradient(const Trajectory& xi, const Eigen::MatrixXd& aug_grad, const FeatureMap* fm);

}  // namespace dcp
