#include "dcp/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

namespace dcp {

void validate(const Correction& c) {
  if (!c.window.valid_for(c.robot.horizon()))
    throw std::invalid_argument("correction window [" + std::to_string(c.window.start) + "," +
                                std::to_string(c.window.end) + "] invalid for horizon " +
                                std::to_string(c.robot.horizon()));
  if (c.snippet.size() != c.window.length())
    throw std::invalid_argument("correction snippet length differs from window length");
  if (c.snippet.dim() != c.robot.dim()) throw std::invalid_argument("correction snippet dimension mismatch");
}

void validate(const PreferenceQuery& q) {
  if (q.ranking.size() < 2) throw std::invalid_argument("preference ranking needs at least two trajectories");
  for (const auto& xi : q.ranking)
    if (xi.size() != q.ranking.front().size() || xi.dim() != q.ranking.front().dim())
      throw std::invalid_argument("preference ranking members differ in shape");
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double pair_prob(double winner_reward, double loser_reward) {
  const double diff = winner_reward - loser_reward;
  if (diff >= 0.0) return 1.0 / (1.0 + std::exp(-diff));
  const double e = std::exp(diff);
  return e / (1.0 + e);
}

double pair_prob(const NetParams& theta, const RankedPair& pair, const FeatureMap* fm) {
  return pair_prob(traj_reward(theta, pair.winner, fm), traj_reward(theta, pair.loser, fm));
}

double pair_loss(double winner_reward, double loser_reward) { return softplus(loser_reward - winner_reward); }

double pair_loss(const NetParams& theta, const RankedPair& pair, const FeatureMap* fm) {
  return pair_loss(traj_reward(theta, pair.winner, fm), traj_reward(theta, pair.loser, fm));
}

double unified_loss(const NetParams& theta, const std::vector<RankedPair>& buffer, const FeatureMap* fm) {
  if (buffer.empty()) throw std::invalid_argument("unified_loss: empty rankings buffer");
  double total = 0.0;
  for (const auto& p : buffer) total += pair_loss(theta, p, fm);
  return total / static_cast<double>(buffer.size());
}

namespace {

DeformationConfig deformation_for(const Trajectory& xi, const TrainConfig& cfg) {
  return {cfg.sigma > 0.0 ? cfg.sigma : default_sigma(xi), cfg.preserve_endpoints};
}

}  // namespace

std::vector<RankedPair> build_rankings_buffer(const FeedbackStore& store, const TrainConfig& cfg, Rng& rng) {
  if (cfg.n_demo < 1 || cfg.n_correction < 1 || cfg.n_preference < 1)
    throw std::invalid_argument("alternative counts must be >= 1");
  std::vector<RankedPair> buffer;
  for (const auto& d : store.demos) {
    for (auto& alt : sample_alternatives(d.xi, cfg.n_demo, deformation_for(d.xi, cfg), rng))
      buffer.push_back({d.xi, std::move(alt)});
  }
  for (const auto& c : store.corrections) {
    validate(c);
    buffer.push_back({c.snippet, c.replaced()});
    if (cfg.n_correction > 1) {
      for (auto& alt : sample_alternatives(c.snippet, cfg.n_correction - 1, deformation_for(c.snippet, cfg), rng))
        buffer.push_back({c.snippet, std::move(alt)});
    }
  }
  for (const auto& q : store.prefs) {
    validate(q);
    const int k = static_cast<int>(q.ranking.size());
    std::uniform_int_distribution<int> pick(0, k * (k - 1) / 2 - 1);
    for (int n = 0; n < cfg.n_preference; ++n) {
      // decode the r-th ordered pair (i < j) in row-major order
      int r = pick(rng);
      int i = 0;
      while (r >= k - 1 - i) {
        r -= k - 1 - i;
        ++i;
      }
      buffer.push_back({q.ranking[i], q.ranking[i + 1 + r]});
    }
  }
  return buffer;
}

namespace {

// Winner states followed by loser states, one matrix per pair.
struct PackedPair {
  Eigen::MatrixXd states;
  Eigen::Index winner_cols;
};

double packed_loss(const NetParams& theta, const std::vector<PackedPair>& packed) {
  double total = 0.0;
  for (const auto& p : packed) {
    const Eigen::RowVectorXd r = state_rewards(theta, p.states);
    total += pair_loss(r.head(p.winner_cols).sum(), r.tail(r.size() - p.winner_cols).sum());
  }
  return total / static_cast<double>(packed.size());
}

NetParams train_member(NetParams theta, const std::vector<PackedPair>& packed, const TrainConfig& cfg,
                       std::uint64_t shuffle_seed, double& initial, double& final_loss) {
  initial = packed_loss(theta, packed);
  if (!std::isfinite(initial)) throw TrainingError("non-finite initial loss", 0);
  const NetParams start = theta;
  AdamState adam;
  adam.lr = cfg.learning_rate;
  Rng rng(shuffle_seed);
  std::vector<std::size_t> order(packed.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch));
  const Eigen::Index d_aug = packed.front().states.rows();

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      Eigen::Index cols = 0;
      for (std::size_t i = lo; i < hi; ++i) cols += packed[order[i]].states.cols();
      Eigen::MatrixXd x(d_aug, cols);
      Eigen::Index at = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& p = packed[order[i]].states;
        x.middleCols(at, p.cols()) = p;
        at += p.cols();
      }
      const double scale = 1.0 / static_cast<double>(hi - lo);
      double batch_loss = 0.0;
      const NetParams grad = grad_params_fused(theta, x, [&](const Eigen::RowVectorXd& r) {
        Eigen::RowVectorXd adj(r.size());
        Eigen::Index pos = 0;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& p = packed[order[i]];
          const Eigen::Index nw = p.winner_cols;
          const Eigen::Index nl = p.states.cols() - nw;
          const double rw = r.segment(pos, nw).sum();
          const double rl = r.segment(pos + nw, nl).sum();
          batch_loss += pair_loss(rw, rl);
          // d softplus(rl - rw) = sigmoid(rl - rw) * (d rl - d rw)
          const double s = 1.0 - pair_prob(rw, rl);
          adj.segment(pos, nw).setConstant(-s * scale);
          adj.segment(pos + nw, nl).setConstant(s * scale);
          pos += nw + nl;
        }
        return adj;
      });
      if (!std::isfinite(batch_loss) || !grad.all_finite())
        throw TrainingError("non-finite loss at step " + std::to_string(step), step);
      adam_step(theta, grad, adam);
      if (!theta.all_finite()) throw TrainingError("non-finite parameters at step " + std::to_string(step), step);
      ++step;
    }
  }
  final_loss = packed_loss(theta, packed);
  if (!std::isfinite(final_loss)) throw TrainingError("non-finite final loss", step);
  if (final_loss > initial) {
    final_loss = initial;
    return start;
  }
  return theta;
}

}  // namespace

TrainResult train_on_buffer(const RewardEnsemble& e, const std::vector<RankedPair>& buffer, const TrainConfig& cfg,
                            const FeatureMap* fm) {
  if (e.members.empty()) throw std::invalid_argument("train_ensemble: empty ensemble");
  if (cfg.epochs < 1) throw std::invalid_argument("train_ensemble: epochs must be >= 1");
  TrainResult result;
  result.buffer_size = buffer.size();
  result.ensemble = e;
  const int m = e.size();
  result.initial_loss.assign(m, 0.0);
  result.final_loss.assign(m, 0.0);
  if (buffer.empty()) return result;

  std::vector<PackedPair> packed;
  packed.reserve(buffer.size());
  for (const auto& p : buffer) {
    if (p.winner.size() != p.loser.size()) throw std::invalid_argument("ranked pair members differ in length");
    const Eigen::MatrixXd w = augment(p.winner, fm);
    const Eigen::MatrixXd l = augment(p.loser, fm);
    Eigen::MatrixXd both(w.rows(), w.cols() + l.cols());
    both << w, l;
    packed.push_back({std::move(both), w.cols()});
  }

  std::vector<std::exception_ptr> errors(m);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    try {
      const NetParams& prior = e.members[j];
      NetParams start = cfg.warm_start
                            ? prior
                            : init_net(prior.input_width(), prior.hidden_width(), derive_seed(cfg.seed, 0x1417, j),
                                       prior.leak());
      result.ensemble.members[j] = train_member(std::move(start), packed, cfg, derive_seed(cfg.seed, 0x5b1f, j),
                                                result.initial_loss[j], result.final_loss[j]);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return result;
}

TrainResult train_ensemble(const RewardEnsemble& e, const FeedbackStore& store, const TrainConfig& cfg,
                           const FeatureMap* fm) {
  Rng rng(derive_seed(cfg.seed, 0xb0ff));
  return train_on_buffer(e, build_rankings_buffer(store, cfg, rng), cfg, fm);
}

nlohmann::json store_to_json(const FeedbackStore& store) {
  nlohmann::json demos = nlohmann::json::array();
  for (const auto& d : store.demos) demos.push_back(trajectory_to_json(d.xi));
  nlohmann::json corrections = nlohmann::json::array();
  for (const auto& c : store.corrections)
    corrections.push_back({{"robot", trajectory_to_json(c.robot)},
                           {"window", {c.window.start, c.window.end}},
                           {"snippet", trajectory_to_json(c.snippet)}});
  nlohmann::json prefs = nlohmann::json::array();
  for (const auto& q : store.prefs) {
    nlohmann::json ranking = nlohmann::json::array();
    for (const auto& xi : q.ranking) ranking.push_back(trajectory_to_json(xi));
    prefs.push_back({{"ranking", std::move(ranking)}});
  }
  return {{"demos", std::move(demos)}, {"corrections", std::move(corrections)}, {"prefs", std::move(prefs)}};
}

FeedbackStore store_from_json(const nlohmann::json& j) {
  FeedbackStore store;
  try {
    for (const auto& d : j.at("demos")) store.demos.push_back({trajectory_from_json(d)});
    for (const auto& c : j.at("corrections")) {
      Correction corr{trajectory_from_json(c.at("robot")),
                      {c.at("window").at(0).get<int>(), c.at("window").at(1).get<int>()},
                      trajectory_from_json(c.at("snippet"))};
      validate(corr);
      store.corrections.push_back(std::move(corr));
    }
    for (const auto& q : j.at("prefs")) {
      PreferenceQuery pq;
      for (const auto& xi : q.at("ranking")) pq.ranking.push_back(trajectory_from_json(xi));
      validate(pq);
      store.prefs.push_back(std::move(pq));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("feedback store: ") + e.what());
  }
  return store;
}

}  // namespace dcp
