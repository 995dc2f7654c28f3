#include "dcp/active_query.hpp"

#include <stdexcept>

#include "dcp/kernels.hpp"

namespace dcp {

double info_gain_from_probs(std::span<const double> p_a) {
  if (p_a.empty()) throw std::invalid_argument("info_gain: empty ensemble");
  std::vector<double> q(p_a.size());
  for (std::size_t j = 0; j < p_a.size(); ++j) q[j] = 1.0 - p_a[j];
  return kernels::info_gain_pq(p_a.data(), q.data(), nullptr, static_cast<int>(p_a.size()));
}

double info_gain_weighted(std::span<const double> p_a, std::span<const double> w) {
  if (p_a.empty() || p_a.size() != w.size()) throw std::invalid_argument("info_gain_weighted: size mismatch");
  std::vector<double> q(p_a.size());
  for (std::size_t j = 0; j < p_a.size(); ++j) q[j] = 1.0 - p_a[j];
  return kernels::info_gain_pq(p_a.data(), q.data(), w.data(), static_cast<int>(p_a.size()));
}

namespace {

void check_candidate(const QueryCandidate& q) {
  if (q.a.size() != q.b.size() || q.a.dim() != q.b.dim())
    throw std::invalid_argument("query candidate trajectories differ in shape");
}

}  // namespace

double info_gain(const RewardEnsemble& e, const QueryCandidate& q, const FeatureMap* fm) {
  if (e.members.empty()) throw std::invalid_argument("info_gain: empty ensemble");
  check_candidate(q);
  const Eigen::MatrixXd ra = kernels::serial::member_returns(e, {augment(q.a, fm)});
  const Eigen::MatrixXd rb = kernels::serial::member_returns(e, {augment(q.b, fm)});
  return kernels::info_gain_column(ra, rb, 0);
}

std::vector<double> score_pool(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm) {
  if (e.members.empty()) throw std::invalid_argument("score_pool: empty ensemble");
  std::vector<Eigen::MatrixXd> as, bs;
  as.reserve(pool.candidates.size());
  bs.reserve(pool.candidates.size());
  for (const auto& c : pool.candidates) {
    check_candidate(c);
    as.push_back(augment(c.a, fm));
    bs.push_back(augment(c.b, fm));
  }
  return kernels::omp::info_gains(kernels::omp::member_returns(e, as), kernels::omp::member_returns(e, bs));
}

std::size_t select_query_index(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm,
                               std::span<const char> exclude) {
  if (pool.candidates.empty()) throw std::invalid_argument("select_query: empty pool");
  if (!exclude.empty() && exclude.size() != pool.candidates.size())
    throw std::invalid_argument("select_query: exclusion mask size mismatch");
  const std::vector<double> gains = score_pool(e, pool, fm);
  std::size_t best = pool.candidates.size();
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!exclude.empty() && exclude[i]) continue;
    if (best == pool.candidates.size() || gains[i] > gains[best]) best = i;
  }
  if (best == pool.candidates.size()) throw std::invalid_argument("select_query: every candidate is excluded");
  return best;
}

const QueryCandidate& select_query(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm) {
  return pool.candidates[select_query_index(e, pool, fm)];
}

QueryPool generate_pool(const WorkspaceBox& box, const Eigen::VectorXd& start, int horizon, int size, double sigma,
                        Rng& rng) {
  if (size < 1) throw std::invalid_argument("generate_pool: size must be >= 1");
  box.validate();
  if (!box.contains(start)) throw std::invalid_argument("generate_pool: start outside the workspace");
  QueryPool pool;
  pool.candidates.reserve(size);
  for (int i = 0; i < size; ++i) {
    Eigen::VectorXd goal(box.dim());
    for (int k = 0; k < box.dim(); ++k) goal[k] = std::uniform_real_distribution<double>(box.lo[k], box.hi[k])(rng);
    const Trajectory line = Trajectory::straight_line(start, goal, horizon);
    const DeformationConfig cfg{sigma > 0.0 ? sigma : default_sigma(line), true};
    auto alts = sample_alternatives(line, 2, cfg, rng);
    for (auto& alt : alts) box.clip_columns(alt.coords());
    pool.candidates.push_back({std::move(alts[0]), std::move(alts[1])});
  }
  return pool;
}

}  // namespace dcp
