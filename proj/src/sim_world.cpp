#include "dcp/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace dcp {

namespace {

int height_axis(int dim) { return dim >= 3 ? 2 : dim - 1; }

}  // namespace

double FeatureDef::value(const Eigen::VectorXd& coords, double table_height) const {
  switch (kind) {
    case FeatureKind::DistTo:
      return (coords - point).norm();
    case FeatureKind::Height:
      return coords[height_axis(static_cast<int>(coords.size()))] - table_height;
    case FeatureKind::Tilt:
      return std::abs(coords[coords.size() - 1]);
  }
  return 0.0;
}

Eigen::VectorXd FeatureDef::gradient(const Eigen::VectorXd& coords) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(coords.size());
  switch (kind) {
    case FeatureKind::DistTo: {
      const Eigen::VectorXd diff = coords - point;
      const double n = diff.norm();
      // subgradient 0 at the singular point
      if (n > 0.0) g = diff / n;
      break;
    }
    case FeatureKind::Height:
      g[height_axis(static_cast<int>(coords.size()))] = 1.0;
      break;
    case FeatureKind::Tilt: {
      const double v = coords[coords.size() - 1];
      g[coords.size() - 1] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      break;
    }
  }
  return g;
}

int Environment::feature_index(const std::string& fname) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == fname) return static_cast<int>(i);
  throw std::invalid_argument("environment '" + name + "' has no feature '" + fname + "'");
}

Eigen::VectorXd Environment::feature_vector(const Eigen::VectorXd& coords) const {
  Eigen::VectorXd phi(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) phi[i] = features[i].value(coords, table_height);
  return phi;
}

Eigen::MatrixXd Environment::feature_jacobian(const Eigen::VectorXd& coords) const {
  Eigen::MatrixXd j(features.size(), coords.size());
  for (std::size_t i = 0; i < features.size(); ++i) j.row(i) = features[i].gradient(coords).transpose();
  return j;
}

void Environment::validate() const {
  box.validate();
  if (box.dim() < 1) throw std::invalid_argument("environment: workspace needs at least one dimension");
  if (default_horizon < 2) throw std::invalid_argument("environment: horizon must be >= 2");
  if (start.size() != box.dim() || !box.contains(start))
    throw std::invalid_argument("environment '" + name + "': start outside the workspace");
  if (goal && (goal->size() != box.dim() || !box.contains(*goal)))
    throw std::invalid_argument("environment '" + name + "': goal outside the workspace");
  for (const auto& [lname, p] : landmarks)
    if (p.size() != box.dim() || !box.contains(p))
      throw std::invalid_argument("environment '" + name + "': landmark '" + lname + "' outside the workspace");
  for (const auto& f : features) {
    if (f.kind == FeatureKind::DistTo && f.point.size() != box.dim())
      throw std::invalid_argument("environment '" + name + "': feature '" + f.name + "' has a bad target point");
    if (f.sign < -1 || f.sign > 1) throw std::invalid_argument("feature sign must be -1, 0 or 1");
  }
}

EnvFeatureMap::EnvFeatureMap(const Environment& env, const std::vector<std::string>& names) : env_(&env) {
  for (const auto& n : names) idx_.push_back(env.feature_index(n));
}

EnvFeatureMap::EnvFeatureMap(const Environment& env) : env_(&env) {
  for (int i = 0; i < env.feature_count(); ++i) idx_.push_back(i);
}

Eigen::VectorXd EnvFeatureMap::features(const Eigen::VectorXd& coords) const {
  Eigen::VectorXd phi(idx_.size());
  for (std::size_t i = 0; i < idx_.size(); ++i) phi[i] = env_->features[idx_[i]].value(coords, env_->table_height);
  return phi;
}

Eigen::MatrixXd EnvFeatureMap::jacobian(const Eigen::VectorXd& coords) const {
  Eigen::MatrixXd j(idx_.size(), coords.size());
  for (std::size_t i = 0; i < idx_.size(); ++i) j.row(i) = env_->features[idx_[i]].gradient(coords).transpose();
  return j;
}

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

FeatureDef dist_feature(const std::string& name, const Eigen::VectorXd& p, int sign) {
  return {name, FeatureKind::DistTo, p, sign};
}

}  // namespace

std::vector<std::string> builtin_environment_names() { return {"table", "laptop", "cup", "bowl_ball"}; }

Environment builtin_environment(const std::string& name) {
  Environment env;
  env.name = name;
  if (name == "table") {
    env.box = {vec({0.0, 0.0}), vec({1.0, 1.0})};
    env.start = vec({0.1, 0.7});
    env.goal = vec({0.9, 0.4});
    env.landmarks["goal"] = *env.goal;
    env.features = {dist_feature("goal", *env.goal, -1), {"height", FeatureKind::Height, {}, -1}};
  } else if (name == "laptop") {
    env.box = {vec({0.0, 0.0}), vec({1.0, 1.0})};
    env.start = vec({0.1, 0.5});
    env.goal = vec({0.9, 0.5});
    env.landmarks["goal"] = *env.goal;
    env.landmarks["laptop"] = vec({0.5, 0.45});
    env.features = {dist_feature("goal", *env.goal, -1), dist_feature("laptop", env.landmarks["laptop"], +1)};
  } else if (name == "cup") {
    env.box = {vec({0.0, 0.0, -1.0}), vec({1.0, 1.0, 1.0})};
    env.start = vec({0.1, 0.3, 0.0});
    env.goal = vec({0.9, 0.7, 0.0});
    env.landmarks["goal"] = *env.goal;
    env.features = {dist_feature("goal", *env.goal, -1), {"tilt", FeatureKind::Tilt, {}, -1}};
  } else if (name == "bowl_ball") {
    env.box = {vec({0.0, 0.0, 0.0}), vec({1.0, 1.0, 1.0})};
    env.start = vec({0.1, 0.1, 0.6});
    env.landmarks["bowl"] = vec({0.7, 0.3, 0.1});
    env.landmarks["ball"] = vec({0.3, 0.8, 0.2});
    env.features = {dist_feature("bowl", env.landmarks["bowl"], 0),
                    {"height", FeatureKind::Height, {}, 0},
                    dist_feature("ball", env.landmarks["ball"], 0)};
  } else {
    throw std::invalid_argument("unknown environment '" + name + "'");
  }
  env.validate();
  return env;
}

Environment resolve_environment(const std::string& name_or_path) {
  for (const auto& n : builtin_environment_names())
    if (n == name_or_path) return builtin_environment(n);
  if (std::filesystem::exists(name_or_path)) return load_environment(name_or_path);
  throw std::invalid_argument("unknown environment '" + name_or_path + "' (not a builtin and no such file)");
}

GroundTruthReward normalized_theta(const Eigen::VectorXd& theta) {
  const double n = theta.norm();
  if (!std::isfinite(n)) throw std::invalid_argument("true reward weights must be finite");
  if (n == 0.0) return {theta};
  return {theta / n};
}

GroundTruthReward sample_theta_star(const Environment& env, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(env.feature_count());
  do {
    for (int i = 0; i < env.feature_count(); ++i) {
      double w = normal(rng);
      if (env.features[i].sign < 0) w = -std::abs(w);
      if (env.features[i].sign > 0) w = std::abs(w);
      theta[i] = w;
    }
  } while (theta.norm() < 1e-12);
  return normalized_theta(theta);
}

double true_state_reward(const Environment& env, const GroundTruthReward& truth, const Eigen::VectorXd& coords) {
  return truth.theta.dot(env.feature_vector(coords));
}

double true_traj_reward(const Environment& env, const GroundTruthReward& truth, const Trajectory& xi) {
  double total = 0.0;
  for (int t = 0; t < xi.size(); ++t) total += true_state_reward(env, truth, xi.coords().col(t));
  return total;
}

double regret(const Environment& env, const GroundTruthReward& truth, const Trajectory& xi, const Trajectory& xi_star) {
  const double r = true_traj_reward(env, truth, xi_star) - true_traj_reward(env, truth, xi);
  return r > 0.0 ? r : 0.0;
}

namespace {

void append_bytes(std::string& key, const Eigen::VectorXd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  key.append(reinterpret_cast<const char*>(&n), sizeof n);
  key.append(reinterpret_cast<const char*>(v.data()), n * sizeof(double));
}

std::string task_key(const Task& task) {
  const Environment& env = *task.env;
  std::string key = env.name;
  key.push_back('\0');
  append_bytes(key, env.box.lo);
  append_bytes(key, env.box.hi);
  key.append(reinterpret_cast<const char*>(&env.table_height), sizeof(double));
  for (const auto& f : env.features) {
    key.push_back(static_cast<char>(f.kind));
    append_bytes(key, f.point);
  }
  append_bytes(key, task.truth.theta);
  append_bytes(key, task.start);
  key.push_back(task.goal ? 'g' : 'n');
  if (task.goal) append_bytes(key, *task.goal);
  key.append(reinterpret_cast<const char*>(&task.horizon), sizeof(int));
  return key;
}

Trajectory compute_oracle(const Task& task) {
  const Environment& env = *task.env;
  const EnvFeatureMap fm(env);
  const LinearFeatureObjective objective(fm, task.truth.theta);
  const int H = task.horizon;

  // dense grid over the box, keeping the best few points as constant-interior seeds
  const int d = env.dim();
  const int per_dim = d <= 2 ? 41 : 15;
  long total = 1;
  for (int k = 0; k < d; ++k) total *= per_dim;
  constexpr int kKeep = 4;
  std::vector<std::pair<double, Eigen::VectorXd>> best;
  Eigen::VectorXd p(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = 0; k < d; ++k) {
      const double a = static_cast<double>(rem % per_dim) / (per_dim - 1);
      rem /= per_dim;
      p[k] = env.box.lo[k] + a * (env.box.hi[k] - env.box.lo[k]);
    }
    const double v = objective.state_value(p);
    if (static_cast<int>(best.size()) < kKeep || v > best.back().first) {
      best.emplace_back(v, p);
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      if (static_cast<int>(best.size()) > kKeep) best.pop_back();
    }
  }
  // the straight line goes first so it wins ties (e.g. a zero reward)
  std::vector<Trajectory> seeds{Trajectory::straight_line(task.start, task.goal ? *task.goal : task.start, H)};
  for (const auto& [v, q] : best) {
    Eigen::MatrixXd c(d, H + 1);
    for (int t = 0; t <= H; ++t) c.col(t) = q;
    c.col(0) = task.start;
    if (task.goal) c.col(H) = *task.goal;
    seeds.emplace_back(std::move(c));
  }

  OptConfig cfg;
  cfg.restarts = 25;
  cfg.iters = 2000;
  cfg.smooth_weight = 0.0;
  cfg.goal_constrained = task.goal.has_value();
  cfg.tol = 1e-12;
  return optimize(objective, env.box, task.start, task.goal, H, cfg, 0x0ac1e, seeds).trajectory;
}

}  // namespace

const Trajectory& oracle_optimum(const Task& task) {
  static std::shared_mutex mu;
  static std::unordered_map<std::string, std::unique_ptr<Trajectory>> cache;
  const std::string key = task_key(task);
  {
    std::shared_lock lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;
  }
  auto traj = std::make_unique<Trajectory>(compute_oracle(task));
  std::unique_lock lock(mu);
  // a concurrent caller may have inserted first; keep the earliest entry
  auto [it, inserted] = cache.emplace(key, std::move(traj));
  return *it->second;
}

void TeacherConfig::validate(int horizon) const {
  if (!(demo_noise >= 0.0)) throw std::invalid_argument("teacher: demo_noise must be >= 0");
  if (!(pref_beta > 0.0)) throw std::invalid_argument("teacher: pref_beta must be > 0");
  if (correction_window < 3 || correction_window > horizon - 1)
    throw std::invalid_argument("teacher: correction window must lie in [3, H-1]");
  if (correction_steps < 1) throw std::invalid_argument("teacher: correction_steps must be >= 1");
}

Demonstration teacher_demo(const Task& task, const TeacherConfig& cfg, Rng& rng) {
  const Trajectory& best = oracle_optimum(task);
  if (cfg.demo_noise == 0.0) return {best};
  const DeformationConfig dc{cfg.demo_noise, true};
  Trajectory xi = deform(best, sample_lambda(best.horizon(), best.dim(), dc, rng), dc);
  for (int t = 1; t < xi.horizon(); ++t) xi.coords().col(t) = task.env->box.clip(xi.coords().col(t));
  return {std::move(xi)};
}

Window worst_window(const Task& task, const Trajectory& robot, int window_length) {
  const int H = robot.horizon();
  if (window_length < 3 || window_length > H + 1) throw std::invalid_argument("worst_window: bad window length");
  const Trajectory& best = oracle_optimum(task);
  if (best.size() != robot.size()) throw std::invalid_argument("worst_window: robot horizon differs from task");
  std::vector<double> deficit(H + 1);
  for (int t = 0; t <= H; ++t)
    deficit[t] = true_state_reward(*task.env, task.truth, best.coords().col(t)) -
                 true_state_reward(*task.env, task.truth, robot.coords().col(t));
  Window w{0, window_length - 1};
  double best_sum = -std::numeric_limits<double>::infinity();
  for (int s = 0; s + window_length - 1 <= H; ++s) {
    double sum = 0.0;
    for (int t = s; t < s + window_length; ++t) sum += deficit[t];
    if (sum > best_sum) {
      best_sum = sum;
      w = {s, s + window_length - 1};
    }
  }
  return w;
}

TeacherCorrection teacher_correction(const Task& task, const Trajectory& robot, const TeacherConfig& cfg, Rng&) {
  cfg.validate(robot.horizon());
  const Window w = worst_window(task, robot, cfg.correction_window);
  const Trajectory original = slice(robot, w);

  const EnvFeatureMap fm(*task.env);
  const LinearFeatureObjective objective(fm, task.truth.theta);
  std::vector<bool> free(w.length(), true);
  free.front() = false;
  free.back() = false;
  OptConfig oc;
  oc.iters = cfg.correction_steps;
  oc.smooth_weight = 0.0;
  const AscentResult run = ascend(objective, task.env->box, original, free, oc);

  TeacherCorrection out{{robot, w, run.trajectory}, false};
  if (!(run.objective > objective.value(original))) {
    out.correction.snippet = original;
    out.declined = true;
  }
  return out;
}

PreferenceQuery teacher_preference(const Task& task, const QueryCandidate& q, const TeacherConfig& cfg, Rng& rng) {
  const double ra = true_traj_reward(*task.env, task.truth, q.a);
  const double rb = true_traj_reward(*task.env, task.truth, q.b);
  bool a_wins = ra >= rb;
  if (std::isfinite(cfg.pref_beta)) {
    const double p = pair_prob(cfg.pref_beta * ra, cfg.pref_beta * rb);
    a_wins = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  }
  return a_wins ? PreferenceQuery{{q.a, q.b}} : PreferenceQuery{{q.b, q.a}};
}

}  // namespace dcp
