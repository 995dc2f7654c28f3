#include "dcp/features.hpp"

#include <stdexcept>

namespace dcp {

Eigen::MatrixXd augment(const Trajectory& xi, const FeatureMap* fm) {
  if (!fm || fm->feature_count() == 0) return xi.coords();
  if (fm->dim() != xi.dim()) throw std::invalid_argument("augment: trajectory dimension differs from feature map");
  const int d = xi.dim();
  const int n = fm->feature_count();
  Eigen::MatrixXd out(d + n, xi.size());
  out.topRows(d) = xi.coords();
  for (int t = 0; t < xi.size(); ++t) out.col(t).tail(n) = fm->features(xi.coords().col(t));
  return out;
}

State augmented_state(const Eigen::VectorXd& coords, const FeatureMap* fm) {
  State s{coords, std::nullopt};
  if (fm && fm->feature_count() > 0) s.features = fm->features(coords);
  return s;
}

Eigen::MatrixXd coords_gradient(const Trajectory& xi, const Eigen::MatrixXd& aug_grad, const FeatureMap* fm) {
  const int d = xi.dim();
  Eigen::MatrixXd g = aug_grad.topRows(d);
  if (!fm || fm->feature_count() == 0) return g;
  const int n = fm->feature_count();
  for (int t = 0; t < xi.size(); ++t)
    g.col(t) += fm->jacobian(xi.coords().col(t)).transpose() * aug_grad.col(t).tail(n);
  return g;
}

}  // namespace dcp
