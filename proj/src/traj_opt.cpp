#include "dcp/traj_opt.hpp"

#include <cmath>
#include <exception>
#include <string>

namespace dcp {

double EnsembleObjective::value(const Trajectory& xi) const {
  const Eigen::MatrixXd x = augment(xi, fm_);
  double total = 0.0;
  for (const auto& m : ensemble_.members) total += traj_reward(m, x);
  return total;
}

Eigen::MatrixXd EnsembleObjective::gradient(const Trajectory& xi) const {
  const Eigen::MatrixXd x = augment(xi, fm_);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (const auto& m : ensemble_.members) g += grad_aug_input(m, x);
  return coords_gradient(xi, g, fm_);
}

LinearFeatureObjective::LinearFeatureObjective(const FeatureMap& fm, Eigen::VectorXd weights)
    : fm_(fm), w_(std::move(weights)) {
  if (w_.size() != fm_.feature_count()) throw std::invalid_argument("linear objective: weight count mismatch");
}

double LinearFeatureObjective::state_value(const Eigen::VectorXd& coords) const {
  return w_.dot(fm_.features(coords));
}

double LinearFeatureObjective::value(const Trajectory& xi) const {
  double total = 0.0;
  for (int t = 0; t < xi.size(); ++t) total += state_value(xi.coords().col(t));
  return total;
}

Eigen::MatrixXd LinearFeatureObjective::gradient(const Trajectory& xi) const {
  Eigen::MatrixXd g(xi.dim(), xi.size());
  for (int t = 0; t < xi.size(); ++t) g.col(t) = fm_.jacobian(xi.coords().col(t)).transpose() * w_;
  return g;
}

double regularized_objective(const TrajectoryObjective& obj, const Trajectory& xi, double smooth_weight) {
  double v = obj.value(xi);
  if (smooth_weight != 0.0) v -= smooth_weight * squared_second_differences(xi);
  return v;
}

namespace {

Eigen::MatrixXd regularized_gradient(const TrajectoryObjective& obj, const Trajectory& xi, double smooth_weight) {
  Eigen::MatrixXd g = obj.gradient(xi);
  if (smooth_weight != 0.0) {
    const auto& c = xi.coords();
    for (int t = 1; t + 1 < xi.size(); ++t) {
      const Eigen::VectorXd e = c.col(t + 1) - 2.0 * c.col(t) + c.col(t - 1);
      g.col(t - 1) -= smooth_weight * 2.0 * e;
      g.col(t) += smooth_weight * 4.0 * e;
      g.col(t + 1) -= smooth_weight * 2.0 * e;
    }
  }
  return g;
}

void check_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw OptimizationError(std::string("non-finite objective in ") + where);
}

}  // namespace

AscentResult ascend(const TrajectoryObjective& obj, const WorkspaceBox& box, const Trajectory& start,
                    const std::vector<bool>& free, const OptConfig& cfg) {
  if (static_cast<int>(free.size()) != start.size()) throw std::invalid_argument("ascend: free mask size mismatch");
  AscentResult res{start, regularized_objective(obj, start, cfg.smooth_weight), {}};
  check_finite(res.objective, "ascent start");
  res.history.push_back(res.objective);
  const double step = cfg.step > 0.0 ? cfg.step : 0.05 * box.diagonal();
  double alpha = -1.0;

  for (int it = 0; it < cfg.iters; ++it) {
    Eigen::MatrixXd g = regularized_gradient(obj, res.trajectory, cfg.smooth_weight);
    for (int t = 0; t < start.size(); ++t)
      if (!free[t]) g.col(t).setZero();
    if (!g.allFinite()) throw OptimizationError("non-finite gradient during ascent");
    const double gmax = g.cwiseAbs().maxCoeff();
    if (gmax == 0.0) break;
    if (alpha < 0.0) alpha = step / gmax;

    bool accepted = false;
    Trajectory trial = res.trajectory;
    double trial_value = 0.0;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      trial.coords() = res.trajectory.coords() + alpha * g;
      for (int t = 0; t < start.size(); ++t)
        if (free[t]) trial.coords().col(t) = box.clip(trial.coords().col(t));
      trial_value = regularized_objective(obj, trial, cfg.smooth_weight);
      check_finite(trial_value, "line search");
      if (trial_value > res.objective) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const double gain = trial_value - res.objective;
    res.trajectory = std::move(trial);
    res.objective = trial_value;
    res.history.push_back(trial_value);
    alpha *= 2.0;
    if (gain < cfg.tol) break;
  }
  return res;
}

Trajectory shift_endpoints(const Trajectory& xi, const Eigen::VectorXd& s0, const std::optional<Eigen::VectorXd>& sH) {
  Trajectory out = xi;
  const int H = xi.horizon();
  const Eigen::VectorXd d0 = s0 - xi.coords().col(0);
  const Eigen::VectorXd dH = sH ? Eigen::VectorXd(*sH - xi.coords().col(H)) : Eigen::VectorXd::Zero(xi.dim());
  for (int t = 0; t <= H; ++t) {
    const double a = H > 0 ? static_cast<double>(t) / H : 0.0;
    out.coords().col(t) += (1.0 - a) * d0 + a * dH;
  }
  out.coords().col(0) = s0;
  if (sH) out.coords().col(H) = *sH;
  return out;
}

std::vector<Trajectory> default_seeds(const FeedbackStore& store, const Eigen::VectorXd& s0,
                                      const std::optional<Eigen::VectorXd>& sH, int horizon) {
  std::vector<Trajectory> seeds;
  seeds.push_back(Trajectory::straight_line(s0, sH ? *sH : s0, horizon));
  auto add = [&](const Trajectory& xi) {
    if (xi.horizon() == horizon && xi.dim() == s0.size()) seeds.push_back(shift_endpoints(xi, s0, sH));
  };
  for (const auto& d : store.demos) add(d.xi);
  for (const auto& c : store.corrections) add(c.corrected());
  return seeds;
}

OptResult optimize(const TrajectoryObjective& obj, const WorkspaceBox& box, const Eigen::VectorXd& s0,
                   const std::optional<Eigen::VectorXd>& sH, int horizon, const OptConfig& cfg, std::uint64_t seed,
                   const std::vector<Trajectory>& seeds) {
  box.validate();
  if (cfg.restarts < 0 || cfg.iters < 1 || !(cfg.tol > 0.0))
    throw std::invalid_argument("optimize: invalid optimizer configuration");
  if (horizon < 2) throw std::invalid_argument("optimize: horizon must be >= 2");
  if (!box.contains(s0)) throw std::invalid_argument("optimize: start state outside the workspace");
  const bool goal = cfg.goal_constrained && sH.has_value();
  if (cfg.goal_constrained && !sH) throw std::invalid_argument("optimize: goal-constrained without a goal state");
  if (goal && !box.contains(*sH)) throw std::invalid_argument("optimize: goal state outside the workspace");
  const std::optional<Eigen::VectorXd> end = goal ? sH : std::nullopt;

  std::vector<bool> free(horizon + 1, true);
  free[0] = false;
  if (goal) free[horizon] = false;

  std::vector<Trajectory> starts;
  for (const auto& s : seeds) {
    if (s.horizon() != horizon || s.dim() != s0.size())
      throw std::invalid_argument("optimize: seed trajectory has the wrong shape");
    Trajectory t = shift_endpoints(s, s0, end);
    box.clip_columns(t.coords());
    starts.push_back(std::move(t));
  }
  const Trajectory line = Trajectory::straight_line(s0, end ? *end : s0, horizon);
  Rng rng(derive_seed(seed, 0x0b7));
  const double restart_sigma = cfg.restart_sigma > 0.0 ? cfg.restart_sigma : 0.25 * box.diagonal();
  for (int r = 0; r < cfg.restarts; ++r) {
    if (r == 0) {
      starts.push_back(line);
      continue;
    }
    const DeformationConfig dc{restart_sigma, goal};
    Trajectory t = deform(line, sample_lambda(horizon, line.dim(), dc, rng), dc);
    t.coords().col(0) = s0;
    box.clip_columns(t.coords());
    starts.push_back(std::move(t));
  }
  if (starts.empty()) throw std::invalid_argument("optimize: no starting points");

  OptResult result;
  result.runs.resize(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  const auto n = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      result.runs[i] = ascend(obj, box, starts[i], free, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.runs.size(); ++i)
    if (result.runs[i].objective > result.runs[best].objective) best = i;
  result.start_index = best;
  result.trajectory = result.runs[best].trajectory;
  result.objective = result.runs[best].objective;
  // pin endpoints bitwise
  result.trajectory.coords().col(0) = s0;
  if (goal) result.trajectory.coords().col(horizon) = *sH;
  return result;
}

}  // namespace dcp
