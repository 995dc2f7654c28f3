#include "dcp/trajectory.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>

namespace dcp {

Eigen::VectorXd State::augmented() const {
  if (!features) return coords;
  Eigen::VectorXd out(coords.size() + features->size());
  out << coords, *features;
  return out;
}

Trajectory::Trajectory(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
  if (coords_.cols() < 1 || coords_.rows() < 1)
    throw std::invalid_argument("trajectory needs at least one state of dimension >= 1");
}

Trajectory Trajectory::straight_line(const Eigen::VectorXd& from, const Eigen::VectorXd& to, int horizon) {
  if (horizon < 1) throw std::invalid_argument("straight_line: horizon must be positive");
  if (from.size() != to.size()) throw std::invalid_argument("straight_line: endpoint dimensions differ");
  Eigen::MatrixXd c(from.size(), horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    const double a = static_cast<double>(t) / horizon;
    c.col(t) = (1.0 - a) * from + a * to;
  }
  // exact endpoints regardless of rounding
  c.col(0) = from;
  c.col(horizon) = to;
  return Trajectory(std::move(c));
}

double default_sigma(const Trajectory& xi) {
  const Eigen::VectorXd lo = xi.coords().rowwise().minCoeff();
  const Eigen::VectorXd hi = xi.coords().rowwise().maxCoeff();
  return std::max(0.1 * (hi - lo).norm(), 1e-3);
}

Eigen::MatrixXd build_accel_norm_matrix(int interior_points) {
  const int n = interior_points;
  if (n < 1) throw std::invalid_argument("accel norm matrix: interior point count must be positive");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 2, n);
  for (int k = 0; k < n; ++k) {
    A(k, k) = 1.0;
    A(k + 1, k) = -2.0;
    A(k + 2, k) = 1.0;
  }
  const Eigen::MatrixXd gram = A.transpose() * A;
  Eigen::MatrixXd M = gram.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  return 0.5 * (M + M.transpose());
}

namespace {

struct AccelNorm {
  Eigen::MatrixXd M;
  double unit_scale = 1.0;
};

const AccelNorm& cached_accel_norm(int n) {
  static std::shared_mutex mu;
  static std::map<int, std::unique_ptr<AccelNorm>> cache;
  {
    std::shared_lock lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return *it->second;
  }
  auto entry = std::make_unique<AccelNorm>();
  entry->M = build_accel_norm_matrix(n);
  entry->unit_scale = std::sqrt((entry->M * entry->M.transpose()).diagonal().maxCoeff());
  std::unique_lock lock(mu);
  auto [it, inserted] = cache.emplace(n, std::move(entry));
  return *it->second;
}

}  // namespace

const Eigen::MatrixXd& accel_norm_matrix(int interior_points) {
  if (interior_points < 1) throw std::invalid_argument("accel norm matrix: interior point count must be positive");
  return cached_accel_norm(interior_points).M;
}

double accel_norm_unit_scale(int interior_points) {
  if (interior_points < 1) throw std::invalid_argument("accel norm matrix: interior point count must be positive");
  return cached_accel_norm(interior_points).unit_scale;
}

int deformable_points(int horizon, bool preserve_endpoints) {
  return preserve_endpoints ? horizon - 1 : horizon + 1;
}

Trajectory deform(const Trajectory& xi, const Eigen::MatrixXd& lambda, const DeformationConfig& cfg) {
  const int L = deformable_points(xi.horizon(), cfg.preserve_endpoints);
  if (L < 1) throw std::invalid_argument("deform: trajectory too short to deform");
  if (lambda.rows() != L || lambda.cols() != xi.dim())
    throw std::invalid_argument("deform: lambda must be " + std::to_string(L) + "x" + std::to_string(xi.dim()) +
                                ", got " + std::to_string(lambda.rows()) + "x" + std::to_string(lambda.cols()));
  const Eigen::MatrixXd& M = accel_norm_matrix(L);
  const int offset = cfg.preserve_endpoints ? 1 : 0;
  Trajectory out = xi;
  // (M lambda) is L x d; coords are d x (H+1)
  out.coords().middleCols(offset, L) += (M * lambda).transpose();
  return out;
}

Eigen::MatrixXd sample_lambda(int horizon, int dim, const DeformationConfig& cfg, Rng& rng) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma))
    throw std::invalid_argument("deformation sigma must be finite and positive");
  const int L = deformable_points(horizon, cfg.preserve_endpoints);
  if (L < 1) throw std::invalid_argument("sample_lambda: trajectory too short to deform");
  std::normal_distribution<double> normal(0.0, cfg.sigma / accel_norm_unit_scale(L));
  Eigen::MatrixXd lambda(L, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < L; ++i) lambda(i, j) = normal(rng);
  return lambda;
}

std::vector<Trajectory> sample_alternatives(const Trajectory& xi, int count, const DeformationConfig& cfg,
                                            Rng& rng) {
  if (count < 1) throw std::invalid_argument("sample_alternatives: count must be >= 1");
  std::vector<Trajectory> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(deform(xi, sample_lambda(xi.horizon(), xi.dim(), cfg, rng), cfg));
  return out;
}

Trajectory slice(const Trajectory& xi, const Window& w) {
  if (!w.valid_for(xi.horizon()))
    throw std::invalid_argument("slice: window [" + std::to_string(w.start) + "," + std::to_string(w.end) +
                                "] invalid for horizon " + std::to_string(xi.horizon()));
  return Trajectory(xi.coords().middleCols(w.start, w.length()));
}

Trajectory splice(const Trajectory& xi, const Window& w, const Trajectory& snippet) {
  if (!w.valid_for(xi.horizon())) throw std::invalid_argument("splice: window invalid for trajectory");
  if (snippet.size() != w.length()) throw std::invalid_argument("splice: snippet length differs from window length");
  if (snippet.dim() != xi.dim()) throw std::invalid_argument("splice: snippet dimension differs from trajectory");
  Trajectory out = xi;
  out.coords().middleCols(w.start, w.length()) = snippet.coords();
  return out;
}

double squared_second_differences(const Trajectory& xi) {
  double total = 0.0;
  const auto& c = xi.coords();
  for (int t = 1; t + 1 < xi.size(); ++t) total += (c.col(t + 1) - 2.0 * c.col(t) + c.col(t - 1)).squaredNorm();
  return total;
}

nlohmann::json trajectory_to_json(const Trajectory& xi) {
  nlohmann::json states = nlohmann::json::array();
  for (int t = 0; t < xi.size(); ++t) {
    nlohmann::json s = nlohmann::json::array();
    for (int k = 0; k < xi.dim(); ++k) s.push_back(xi.coords()(k, t));
    states.push_back(std::move(s));
  }
  return {{"horizon", xi.horizon()}, {"states", std::move(states)}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("states") || !j["states"].is_array())
    throw std::invalid_argument("trajectory: expected object with a 'states' array");
  const auto& states = j["states"];
  if (states.empty()) throw std::invalid_argument("trajectory: no states");
  if (!states[0].is_array() || states[0].empty()) throw std::invalid_argument("trajectory: state 0 is not a vector");
  const auto dim = static_cast<Eigen::Index>(states[0].size());
  Eigen::MatrixXd c(dim, static_cast<Eigen::Index>(states.size()));
  for (std::size_t t = 0; t < states.size(); ++t) {
    const auto& s = states[t];
    if (!s.is_array() || static_cast<Eigen::Index>(s.size()) != dim)
      throw std::invalid_argument("trajectory: state " + std::to_string(t) + " has wrong dimension");
    for (Eigen::Index k = 0; k < dim; ++k) {
      if (!s[k].is_number()) throw std::invalid_argument("trajectory: non-numeric coordinate");
      c(k, static_cast<Eigen::Index>(t)) = s[k].get<double>();
      if (!std::isfinite(c(k, static_cast<Eigen::Index>(t))))
        throw std::invalid_argument("trajectory: non-finite coordinate");
    }
  }
  if (j.contains("horizon")) {
    if (!j["horizon"].is_number_integer() || j["horizon"].get<long>() != c.cols() - 1)
      throw std::invalid_argument("trajectory: 'horizon' disagrees with the number of states");
  }
  return Trajectory(std::move(c));
}

}  // namespace dcp
