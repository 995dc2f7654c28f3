#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace dcp {

/// Axis-aligned workspace box [lo, hi] per dimension.
struct WorkspaceBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double diagonal() const { return (hi - lo).norm(); }

  bool contains(const Eigen::VectorXd& x, double slack = 0.0) const {
    return x.size() == lo.size() && (x.array() >= lo.array() - slack).all() && (x.array() <= hi.array() + slack).all();
  }

  Eigen::VectorXd clip(const Eigen::VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

  /// Clamps every column of a d x T matrix.
  void clip_columns(Eigen::MatrixXd& m) const {
    for (Eigen::Index t = 0; t < m.cols(); ++t) m.col(t) = clip(m.col(t));
  }

  void validate() const {
    if (lo.size() == 0 || lo.size() != hi.size()) throw std::invalid_argument("workspace box: bad dimensions");
    if (!(hi.array() > lo.array()).all()) throw std::invalid_argument("workspace box: empty extent");
  }
};

}  // namespace dcp
