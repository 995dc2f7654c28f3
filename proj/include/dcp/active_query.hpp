#pragma once

// Information-gain scoring of pairwise preference queries over the reward
// ensemble and greedy selection from a finite pool.

#include <span>
#include <vector>

#include "dcp/features.hpp"
#include "dcp/reward_net.hpp"
#include "dcp/trajectory.hpp"
#include "dcp/workspace.hpp"

namespace dcp {

struct QueryCandidate {
  Trajectory a;
  Trajectory b;
};

struct QueryPool {
  std::vector<QueryCandidate> candidates;
};

/// Expected information gain (bits) about which member is correct, given each
/// member's probability p_j that option a is preferred:
///   I = 1/m * sum_{outcome} sum_j P_j(outcome) log2(m P_j(outcome) / sum_k P_k(outcome)).
/// Lies in [0, log2 m].
double info_gain_from_probs(std::span<const double> p_a);

/// Same expectation with members weighted by `w` (sums to one), as used by
/// particle posteriors. Uniform weights reproduce info_gain_from_probs.
double info_gain_weighted(std::span<const double> p_a, std::span<const double> w);

double info_gain(const RewardEnsemble& e, const QueryCandidate& q, const FeatureMap* fm);

/// Per-candidate gains; OpenMP over the pool.
std::vector<double> score_pool(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm);

/// Index of the highest-gain candidate (lowest index on ties), skipping
/// candidates flagged in `exclude`. Throws std::invalid_argument when nothing
/// is eligible.
std::size_t select_query_index(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm,
                               std::span<const char> exclude = {});
const QueryCandidate& select_query(const RewardEnsemble& e, const QueryPool& pool, const FeatureMap* fm);

/// N candidates: a uniform random goal in the box, the straight line from
/// `start` to it, and two independent deformations of that line, clipped to the
/// box. sigma <= 0 uses default_sigma() of the line.
QueryPool generate_pool(const WorkspaceBox& box, const Eigen::VectorXd& start, int horizon, int size, double sigma,
                        Rng& rng);

}  // namespace dcp
