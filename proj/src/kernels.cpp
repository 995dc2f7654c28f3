#include "dcp/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "dcp/feedback.hpp"

namespace dcp::kernels {

double info_gain_pq(const double* p, const double* q, const double* w, int m) {
  const double uniform = 1.0 / m;
  double mean_p = 0.0;
  double mean_q = 0.0;
  for (int j = 0; j < m; ++j) {
    const double wj = w ? w[j] : uniform;
    mean_p += wj * p[j];
    mean_q += wj * q[j];
  }
  double gain = 0.0;
  for (int j = 0; j < m; ++j) {
    const double wj = w ? w[j] : uniform;
    if (p[j] > 0.0) gain += wj * p[j] * std::log2(p[j] / mean_p);
    if (q[j] > 0.0) gain += wj * q[j] * std::log2(q[j] / mean_q);
  }
  // mutual information is non-negative; clamp rounding residue
  return gain < 0.0 ? 0.0 : gain;
}

double info_gain_column(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b, Eigen::Index col) {
  const auto m = static_cast<int>(returns_a.rows());
  // small fixed buffers avoid heap traffic in the pool loop
  constexpr int kStack = 64;
  double p_stack[kStack] = {};
  double q_stack[kStack] = {};
  std::vector<double> p_heap, q_heap;
  double* p = p_stack;
  double* q = q_stack;
  if (m > kStack) {
    p_heap.resize(m);
    q_heap.resize(m);
    p = p_heap.data();
    q = q_heap.data();
  }
  for (int j = 0; j < m; ++j) {
    p[j] = pair_prob(returns_a(j, col), returns_b(j, col));
    q[j] = pair_prob(returns_b(j, col), returns_a(j, col));
  }
  return info_gain_pq(p, q, nullptr, m);
}

namespace {

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() < 1)
    throw std::invalid_argument("info_gains: return matrices must share a non-empty shape");
}

}  // namespace

namespace serial {

Eigen::MatrixXd member_returns(const RewardEnsemble& e, const std::vector<Eigen::MatrixXd>& aug_trajs) {
  const auto n = static_cast<Eigen::Index>(aug_trajs.size());
  Eigen::MatrixXd out(e.size(), n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < e.size(); ++j) out(j, i) = traj_reward(e.members[j], aug_trajs[i]);
  return out;
}

std::vector<double> info_gains(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b) {
  check_shapes(returns_a, returns_b);
  std::vector<double> out(returns_a.cols());
  for (Eigen::Index i = 0; i < returns_a.cols(); ++i) out[i] = info_gain_column(returns_a, returns_b, i);
  return out;
}

}  // namespace serial

namespace omp {

Eigen::MatrixXd member_returns(const RewardEnsemble& e, const std::vector<Eigen::MatrixXd>& aug_trajs) {
  const auto n = static_cast<Eigen::Index>(aug_trajs.size());
  const int m = e.size();
  for (const auto& x : aug_trajs)
    if (x.rows() != e.input_width()) throw std::invalid_argument("member_returns: input width mismatch");
  Eigen::MatrixXd out(m, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out(j, i) = traj_reward(e.members[j], aug_trajs[i]);
  return out;
}

std::vector<double> info_gains(const Eigen::MatrixXd& returns_a, const Eigen::MatrixXd& returns_b) {
  check_shapes(returns_a, returns_b);
  std::vector<double> out(returns_a.cols());
  const Eigen::Index n = returns_a.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = info_gain_column(returns_a, returns_b, i);
  return out;
}

}  // namespace omp

}  // namespace dcp::kernels
