#pragma once

// Data-parallel hot loops. Every kernel has an OpenMP version (used by the
// library) and a serial reference with identical semantics, kept for tests
// and for the benchmark. Results are written per index, so both versions are
// bit-identical.

#include <Eigen/Dense>

#include <vector>

#include "dcp/reward_net.hpp"

namespace dcp::kernels {

/// Trajectory returns of every member on every augmented trajectory: m x N.
namespace serial {
Eigen::MatrixXd member_returns(const RewardEnsemble& e, const std::vector<Eigen::MatrixXd>& aug_trajs);
std::vector<double> info_gains(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b);
}  // namespace serial

namespace omp {
Eigen::MatrixXd member_returns(const RewardEnsemble& e, const std::vector<Eigen::MatrixXd>& aug_trajs);
std::vector<double> info_gains(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b);
}  // namespace omp

/// Core of the query score: p[j] and q[j] are member j's probabilities of the
/// two outcomes, w[j] its weight (nullptr for uniform 1/m).
double info_gain_pq(const double* p, const double* q, const double* w, int m);

/// Information gain (bits) of one pairwise query given each member's return on
/// both options (column j of the m x N matrices).
double info_gain_column(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b, Eigen::Index j);

}  // namespace dcp::kernels
