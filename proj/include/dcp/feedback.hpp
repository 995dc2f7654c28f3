#pragma once

// Feedback buffers, the pairwise softmax likelihood, the unified ranking loss
// over demonstrations, corrections and preferences, and ensemble training.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dcp/features.hpp"
#include "dcp/reward_net.hpp"
#include "dcp/trajectory.hpp"

namespace dcp {

struct Demonstration {
  Trajectory xi;
};

/// The robot's trajectory before the interaction, the corrected window and the
/// human's replacement for that window.
struct Correction {
  Trajectory robot;
  Window window;
  Trajectory snippet;

  /// The part of `robot` the human replaced.
  Trajectory replaced() const { return slice(robot, window); }
  /// `robot` with the snippet spliced in.
  Trajectory corrected() const { return splice(robot, window, snippet); }
};

/// Trajectories ranked best first.
struct PreferenceQuery {
  std::vector<Trajectory> ranking;
};

struct FeedbackStore {
  std::vector<Demonstration> demos;
  std::vector<Correction> corrections;
  std::vector<PreferenceQuery> prefs;

  bool empty() const { return demos.empty() && corrections.empty() && prefs.empty(); }
  std::size_t total() const { return demos.size() + corrections.size() + prefs.size(); }
};

struct RankedPair {
  Trajectory winner;
  Trajectory loser;
};

struct TrainConfig {
  int n_demo = 10;
  int n_correction = 10;
  int n_preference = 10;
  int epochs = 200;
  int batch = 32;
  /// Deformation scale; <= 0 selects default_sigma() of each source trajectory.
  double sigma = 0.0;
  bool preserve_endpoints = true;
  bool warm_start = false;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Throws std::invalid_argument when a feedback item violates its invariants.
void validate(const Correction& c);
void validate(const PreferenceQuery& q);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// P(winner > loser) = exp R(w) / (exp R(w) + exp R(l)), evaluated as a logistic of R(w) - R(l).
double pair_prob(double winner_reward, double loser_reward);
double pair_prob(const NetParams& theta, const RankedPair& pair, const FeatureMap* fm);

/// -log P(winner > loser) = softplus(R(l) - R(w)).
double pair_loss(double winner_reward, double loser_reward);
double pair_loss(const NetParams& theta, const RankedPair& pair, const FeatureMap* fm);

/// Mean pair loss over the buffer. Throws on an empty buffer.
double unified_loss(const NetParams& theta, const std::vector<RankedPair>& buffer, const FeatureMap* fm);

/// Flattens the store into winner/loser comparisons:
///   demos:  n_demo pairs (xi_d > deformation of xi_d)
///   corrections: (snippet > replaced window) plus n_correction - 1 pairs (snippet > deformed snippet)
///   preferences: n_preference ordered pairs drawn uniformly from each ranking
std::vector<RankedPair> build_rankings_buffer(const FeedbackStore& store, const TrainConfig& cfg, Rng& rng);

struct TrainResult {
  RewardEnsemble ensemble;
  std::vector<double> initial_loss;
  std::vector<double> final_loss;
  std::size_t buffer_size = 0;
};

/// Minibatch Adam on the unified loss, one independent run per member. A member
/// whose final loss exceeds its initial loss keeps its initial parameters.
TrainResult train_ensemble(const RewardEnsemble& e, const FeedbackStore& store, const TrainConfig& cfg,
                           const FeatureMap* fm);

/// Same as above on a prebuilt buffer.
TrainResult train_on_buffer(const RewardEnsemble& e, const std::vector<RankedPair>& buffer, const TrainConfig& cfg,
                            const FeatureMap* fm);

nlohmann::json store_to_json(const FeedbackStore& store);
FeedbackStore store_from_json(const nlohmann::json& j);

}  // namespace dcp
