#include "dcp/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "dcp/log.hpp"

namespace dcp {

Eigen::VectorXd feature_sums(const FeatureMap& fm, const Trajectory& xi) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(fm.feature_count());
  for (int t = 0; t < xi.size(); ++t) s += fm.features(xi.coords().col(t));
  return s;
}

CoactiveLearner::CoactiveLearner(int feature_count, double rate)
    : theta_(Eigen::VectorXd::Zero(feature_count)), rate_(rate) {
  if (feature_count < 1) throw std::invalid_argument("coactive: need at least one feature");
  if (!(rate > 0.0)) throw std::invalid_argument("coactive: rate must be positive");
}

void CoactiveLearner::update(const Eigen::VectorXd& phi_human, const Eigen::VectorXd& phi_robot) {
  if (phi_human.size() != theta_.size() || phi_robot.size() != theta_.size())
    throw std::invalid_argument("coactive: feature size mismatch");
  theta_ += rate_ * (phi_human - phi_robot);
}

LinearBayesLearner::LinearBayesLearner(int feature_count, int particles, double beta, Rng& rng) : beta_(beta) {
  if (feature_count < 1 || particles < 1) throw std::invalid_argument("linear bayes: bad particle set size");
  if (!(beta > 0.0)) throw std::invalid_argument("linear bayes: beta must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  particles_.resize(feature_count, particles);
  for (int p = 0; p < particles; ++p) {
    Eigen::VectorXd v(feature_count);
    do {
      for (int i = 0; i < feature_count; ++i) v[i] = normal(rng);
    } while (v.norm() < 1e-12);
    particles_.col(p) = v / v.norm();
  }
  weights_ = Eigen::VectorXd::Constant(particles, 1.0 / particles);
}

bool LinearBayesLearner::observe(const Eigen::VectorXd& phi_winner, const Eigen::VectorXd& phi_loser) {
  if (phi_winner.size() != particles_.rows() || phi_loser.size() != particles_.rows())
    throw std::invalid_argument("linear bayes: feature size mismatch");
  const Eigen::VectorXd delta = phi_winner - phi_loser;
  const Eigen::VectorXd margin = beta_ * (particles_.transpose() * delta);
  // log-space update, renormalized against the largest term
  Eigen::VectorXd logw(weights_.size());
  for (Eigen::Index p = 0; p < weights_.size(); ++p) {
    const double loglik = -softplus(-margin[p]);
    logw[p] = weights_[p] > 0.0 ? std::log(weights_[p]) + loglik : -std::numeric_limits<double>::infinity();
  }
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) {
    log::warn("linear bayes: posterior weights degenerated; resetting to uniform");
    weights_.setConstant(1.0 / weights_.size());
    return false;
  }
  for (Eigen::Index p = 0; p < weights_.size(); ++p) weights_[p] = std::exp(logw[p] - top);
  const double sum = weights_.sum();
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    log::warn("linear bayes: posterior weights degenerated; resetting to uniform");
    weights_.setConstant(1.0 / weights_.size());
    return false;
  }
  weights_ /= sum;
  return true;
}

Eigen::VectorXd LinearBayesLearner::mean() const { return particles_ * weights_; }

double LinearBayesLearner::entropy() const {
  double h = 0.0;
  for (Eigen::Index p = 0; p < weights_.size(); ++p)
    if (weights_[p] > 0.0) h -= weights_[p] * std::log(weights_[p]);
  return h;
}

double LinearBayesLearner::info_gain(const Eigen::VectorXd& phi_a, const Eigen::VectorXd& phi_b) const {
  const Eigen::VectorXd margin = beta_ * (particles_.transpose() * (phi_a - phi_b));
  std::vector<double> p(margin.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) p[i] = pair_prob(margin[i], 0.0);
  return info_gain_weighted(p, std::span<const double>(weights_.data(), weights_.size()));
}

Trajectory plan_linear(const FeatureMap& fm, const Eigen::VectorXd& theta, const WorkspaceBox& box,
                       const Eigen::VectorXd& s0, const std::optional<Eigen::VectorXd>& sH, int horizon,
                       const OptConfig& cfg, std::uint64_t seed, const std::vector<Trajectory>& seeds) {
  const LinearFeatureObjective objective(fm, theta);
  return optimize(objective, box, s0, sH, horizon, cfg, seed, seeds).trajectory;
}

}  // namespace dcp
