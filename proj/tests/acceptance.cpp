// Acceptance checks for the primary component. Prints one PASS/FAIL line per
// criterion and exits nonzero when any fails.
//
//   acceptance            run all criteria
//   acceptance 1 4 10     run a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "dcp/active_query.hpp"
#include "dcp/experiments.hpp"
#include "dcp/feedback.hpp"
#include "dcp/session.hpp"
#include "dcp/traj_opt.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks; the first few are kept for the report.
struct Checker {
  long checks = 0, failures = 0;
  std::string first;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    if (failures++ < 3) first += (first.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    std::ostringstream os;
    os << summary << ", " << checks << " checks";
    if (failures) os << ", " << failures << " failed: " << first;
    return {failures == 0, os.str()};
  }
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1: gradients

// Forward pass with plain loops; `pattern` receives the sign of every hidden
// pre-activation so callers can tell when a step crosses a kink.
double loop_forward(const NetParams& p, const Eigen::VectorXd& x, std::vector<char>* pattern) {
  const int W = p.hidden_width(), d = p.input_width();
  auto lrelu = [&](double z) { return z > 0 ? z : p.leak() * z; };
  std::vector<double> h1(W);
  double o = p.b3();
  for (int i = 0; i < W; ++i) {
    double z = p.b1()[i];
    for (int k = 0; k < d; ++k) z += p.w1()(i, k) * x[k];
    if (pattern) pattern->push_back(z > 0);
    h1[i] = lrelu(z);
  }
  for (int i = 0; i < W; ++i) {
    double z = p.b2()[i];
    for (int k = 0; k < W; ++k) z += p.w2()(i, k) * h1[k];
    if (pattern) pattern->push_back(z > 0);
    o += p.w3()[i] * lrelu(z);
  }
  return std::tanh(o);
}

// Central difference whose step shrinks until neither end of the interval
// changes the activation pattern, so the function is smooth on it.
double smooth_central_diff(const std::function<double(const Eigen::VectorXd&, std::vector<char>*)>& f,
                           Eigen::VectorXd x, Eigen::Index i) {
  std::vector<char> at;
  f(x, &at);
  const double x0 = x[i];
  for (double h = 1e-5; h >= 1e-9; h /= 4) {
    std::vector<char> pp, pm;
    x[i] = x0 + h;
    const double fp = f(x, &pp);
    x[i] = x0 - h;
    const double fm = f(x, &pm);
    if ((pp == at && pm == at) || h / 4 < 1e-9) return (fp - fm) / (2 * h);
  }
  return 0.0;
}

Outcome gradients() {
  const Environment env = builtin_environment("table");
  const EnvFeatureMap fm(env);
  const int d_aug = env.dim() + fm.feature_count(), W = 32, H = 20;
  Rng rng(20241);
  Checker c;
  for (int draw = 0; draw < 100; ++draw) {
    RewardEnsemble e;
    for (int j = 0; j < 3; ++j) e.members.push_back(fixture::random_net(d_aug, W, rng, 1.5));
    const Trajectory xi = fixture::random_trajectory(H, 2, rng, 0.0, 1.0);
    const Eigen::MatrixXd X = augment(xi, &fm);

    // parameters of one member, through the trajectory return
    const NetParams& p = e.members[draw % 3];
    const NetParams g = grad_params(p, X, Eigen::RowVectorXd::Ones(X.cols()));
    auto f = [&](const Eigen::VectorXd& v, std::vector<char>* pat) {
      NetParams q = p;
      q.data() = v;
      double s = 0.0;
      for (Eigen::Index t = 0; t < X.cols(); ++t) s += loop_forward(q, X.col(t), pat);
      return s;
    };
    for (Eigen::Index i = 0; i < p.data().size(); ++i) {
      const double fd = smooth_central_diff(f, p.data(), i);
      c.expect(oracle::close(g.data()[i], fd, 1e-4, 1e-7),
               "draw " + std::to_string(draw) + " param " + std::to_string(i) + ": " + fmt(g.data()[i], 10) +
                   " vs " + fmt(fd, 10));
    }

    // coordinates of every state, through the features, for the ensemble mean
    for (int t = 0; t <= H; ++t) {
      const Eigen::VectorXd s = xi.coords().col(t);
      const Eigen::VectorXd gi = grad_input(e, augmented_state(s, &fm), &fm);
      auto fs = [&](const Eigen::VectorXd& coords, std::vector<char>* pat) {
        const Eigen::VectorXd x = augmented_state(coords, &fm).augmented();
        double r = 0.0;
        for (const auto& m : e.members) r += loop_forward(m, x, pat);
        return r / static_cast<double>(e.size());
      };
      for (int k = 0; k < 2; ++k) {
        const double fd = smooth_central_diff(fs, s, k);
        c.expect(oracle::close(gi[k], fd, 1e-4, 1e-7), "draw " + std::to_string(draw) + " input " +
                                                           std::to_string(t) + "/" + std::to_string(k));
      }
    }
  }
  return c.outcome("100 draws, width " + std::to_string(W) + ", H " + std::to_string(H));
}

// ---------------------------------------------------------------------------
// 2: deformation

Outcome deformation() {
  Checker c;
  for (int L = 1; L <= 200; L += (L < 20 ? 1 : 9)) {
    const Eigen::MatrixXd M = build_accel_norm_matrix(L);
    c.expect(M == M.transpose(), "M not symmetric at L=" + std::to_string(L));
    const Eigen::MatrixXd A = oracle::to_eigen(oracle::stencil(L));
    const double res = (A.transpose() * A * M - Eigen::MatrixXd::Identity(L, L)).cwiseAbs().maxCoeff();
    c.expect(res < 1e-8, "(A^T A) M - I = " + fmt(res) + " at L=" + std::to_string(L));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    c.expect(es.eigenvalues().minCoeff() > 0.0, "M not PD at L=" + std::to_string(L));
  }

  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int H = 5 + trial * 3, d = 1 + trial % 3;
    const Trajectory xi = fixture::random_trajectory(H, d, rng);
    for (bool keep : {true, false}) {
      const DeformationConfig cfg{0.2, keep};
      const int L = deformable_points(H, keep);
      const Eigen::MatrixXd l1 = Eigen::MatrixXd::Random(L, d), l2 = Eigen::MatrixXd::Random(L, d);
      const double a = std::uniform_real_distribution<double>(-2, 2)(rng), b = -0.7;
      const Eigen::MatrixXd lhs = deform(xi, a * l1 + b * l2, cfg).coords() - xi.coords();
      const Eigen::MatrixXd rhs =
          a * (deform(xi, l1, cfg).coords() - xi.coords()) + b * (deform(xi, l2, cfg).coords() - xi.coords());
      c.expect((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10, "linearity at H=" + std::to_string(H));
    }
    for (const auto& alt : sample_alternatives(xi, 20, {0.3, true}, rng)) {
      c.expect(alt.coords().col(0) == xi.coords().col(0), "start moved");
      c.expect(alt.coords().col(H) == xi.coords().col(H), "end moved");
    }
  }

  const int H = 20, N = 100, L = H - 1;
  const Trajectory line = Trajectory::straight_line(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), H);
  Rng mc(2024);
  const auto alts = sample_alternatives(line, N, {0.5, true}, mc);
  Eigen::MatrixXd disp(L, N);
  for (int n = 0; n < N; ++n) disp.col(n) = (alts[n].coords() - line.coords()).row(0).segment(1, L).transpose();
  const Eigen::MatrixXd emp = disp * disp.transpose() / N;
  const auto inv = oracle::to_eigen(oracle::gauss_jordan_inverse(oracle::gram(oracle::stencil(L))));
  const Eigen::MatrixXd shape = inv * inv.transpose();
  const double scale = emp.cwiseProduct(shape).sum() / shape.squaredNorm();
  const double rel = (emp - scale * shape).norm() / (scale * shape).norm();
  c.expect(rel < 0.2, "covariance relative error " + fmt(rel));
  return c.outcome("L up to 200, covariance error " + fmt(rel, 3));
}

// ---------------------------------------------------------------------------
// 3: loss identities

Outcome loss_identities() {
  Checker c;
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 30.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double a = n(rng), b = n(rng);
    const double s = pair_prob(a, b) + pair_prob(b, a);
    worst = std::max(worst, std::abs(s - 1.0));
    c.expect(std::abs(s - 1.0) < 1e-12, "probabilities sum to " + fmt(s, 17));
    c.expect(std::abs(pair_loss(a, a) - std::log(2.0)) < 1e-12, "equal-reward loss");
  }
  const double sat = pair_loss(60.0, 0.0);
  c.expect(std::isfinite(sat) && sat >= 0.0 && sat < 1e-20, "saturated loss " + fmt(sat));
  c.expect(std::isfinite(pair_loss(0.0, 1e4)), "reverse saturation not finite");
  return c.outcome("max |p(a>b)+p(b>a)-1| = " + fmt(worst, 3) + ", saturated loss " + fmt(sat, 3));
}

// ---------------------------------------------------------------------------
// 4: information gain

NetParams ramp(double k) {
  NetParams p(1, 1);
  p.w1()(0, 0) = 1.0;
  p.w2()(0, 0) = 1.0;
  p.w3()[0] = k;
  return p;
}

Outcome info_gain_bounds() {
  Checker c;
  Rng rng(4);
  for (int draw = 0; draw < 1000; ++draw) {
    const int m = 1 + draw % 8;
    RewardEnsemble e;
    for (int j = 0; j < m; ++j) e.members.push_back(fixture::random_net(3, 6, rng, 3.0));
    const QueryCandidate q{fixture::random_trajectory(10, 3, rng), fixture::random_trajectory(10, 3, rng)};
    const double g = info_gain(e, q, nullptr);
    c.expect(g >= 0.0 && g <= std::log2(static_cast<double>(m)) + 1e-12, "gain " + fmt(g) + " for m=" +
                                                                              std::to_string(m));
    RewardEnsemble same{std::vector<NetParams>(m, e.members[0])};
    const double g0 = info_gain(same, q, nullptr);
    c.expect(g0 < 1e-12, "identical members give " + fmt(g0));
  }
  const RewardEnsemble split{{ramp(40.0), ramp(-40.0)}};
  const QueryCandidate q{Trajectory(Eigen::MatrixXd::Constant(1, 21, 0.5)),
                         Trajectory(Eigen::MatrixXd::Constant(1, 21, -0.5))};
  const double bit = info_gain(split, q, nullptr);
  c.expect(std::abs(bit - 1.0) < 1e-6, "maximal disagreement gives " + fmt(bit, 12));
  std::vector<double> p;
  for (const auto& mbr : split.members)
    p.push_back(oracle::logistic(traj_reward(mbr, q.a, nullptr) - traj_reward(mbr, q.b, nullptr)));
  c.expect(std::abs(oracle::mutual_information_bits(p, {0.5, 0.5}) - bit) < 1e-9, "disagrees with MI oracle");
  return c.outcome("1000 random ensembles, maximal pair " + fmt(bit, 10) + " bits");
}

// ---------------------------------------------------------------------------
// 5: single demonstration

Outcome single_demo() {
  const Environment env = builtin_environment("table");
  const EnvFeatureMap fm(env);
  const Task task{std::make_shared<const Environment>(env), normalized_theta(Eigen::Vector2d(-0.6, -0.8)), env.start,
                  env.goal, 20};
  TeacherConfig tc;
  tc.demo_noise = 0.0;
  Rng rng(5);
  FeedbackStore store;
  store.demos.push_back(teacher_demo(task, tc, rng));
  TrainConfig cfg;
  cfg.seed = 55;
  const TrainResult res = train_ensemble(init_ensemble(3, env.dim() + env.feature_count(), 64, 5), store, cfg, &fm);
  const Trajectory& demo = store.demos[0].xi;
  Rng fresh(9876);
  const auto alts = sample_alternatives(demo, 100, {default_sigma(demo), true}, fresh);
  Checker c;
  std::string ranks;
  for (std::size_t j = 0; j < res.ensemble.members.size(); ++j) {
    const double rd = traj_reward(res.ensemble.members[j], demo, &fm);
    int above = 0;
    for (const auto& a : alts) above += rd > traj_reward(res.ensemble.members[j], a, &fm);
    c.expect(above >= 90, "member " + std::to_string(j) + " ranks the demo above " + std::to_string(above) + "/100");
    ranks += (ranks.empty() ? "" : ", ") + std::to_string(above);
  }
  return c.outcome("demo above " + ranks + " of 100 deformations");
}

// ---------------------------------------------------------------------------
// 6: optimizer

class SquaredDistance final : public FeatureMap {
 public:
  explicit SquaredDistance(Eigen::VectorXd g) : g_(std::move(g)) {}
  int dim() const override { return static_cast<int>(g_.size()); }
  int feature_count() const override { return 1; }
  Eigen::VectorXd features(const Eigen::VectorXd& c) const override {
    return Eigen::VectorXd::Constant(1, (c - g_).squaredNorm());
  }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& c) const override { return 2.0 * (c - g_).transpose(); }

 private:
  Eigen::VectorXd g_;
};

// Maximizer of -sum ||x_t - g||^2 - w * sum ||second differences||^2 by a
// hand-rolled linear solve.
Eigen::MatrixXd quadratic_oracle(const Eigen::VectorXd& s0, const Eigen::VectorXd& sH, const Eigen::VectorXd& g,
                                 int H, double w) {
  const int L = H - 1;
  std::vector<std::vector<double>> DtD(H + 1, std::vector<double>(H + 1, 0.0));
  const double coef[3] = {1.0, -2.0, 1.0};
  for (int r = 0; r < H - 1; ++r)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) DtD[r + a][r + b] += coef[a] * coef[b];
  std::vector<std::vector<double>> A(L, std::vector<double>(L, 0.0));
  for (int i = 0; i < L; ++i) {
    A[i][i] = 1.0;
    for (int j = 0; j < L; ++j) A[i][j] += w * DtD[i + 1][j + 1];
  }
  const auto Ainv = oracle::gauss_jordan_inverse(A);
  Eigen::MatrixXd out(s0.size(), H + 1);
  for (int k = 0; k < s0.size(); ++k) {
    out(k, 0) = s0[k];
    out(k, H) = sH[k];
    for (int i = 0; i < L; ++i) {
      double v = 0.0;
      for (int j = 0; j < L; ++j) v += Ainv[i][j] * (g[k] - w * (DtD[j + 1][0] * s0[k] + DtD[j + 1][H] * sH[k]));
      out(k, i + 1) = v;
    }
  }
  return out;
}

Outcome optimizer() {
  Checker c;
  WorkspaceBox box;
  box.lo = Eigen::VectorXd::Zero(2);
  box.hi = Eigen::VectorXd::Ones(2);

  const RewardEnsemble zero{{NetParams(2, 8)}};
  const EnsembleObjective flat(zero, nullptr);
  Rng rng(6);
  double worst_line = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Vector2d s0 = Eigen::Vector2d::Random().cwiseAbs(), sH = Eigen::Vector2d::Random().cwiseAbs();
    OptConfig cfg;
    cfg.smooth_weight = 1.0;
    cfg.iters = 5000;
    cfg.tol = 1e-16;
    const int H = 8 + 4 * trial;
    const OptResult r = optimize(flat, box, s0, sH, H, cfg, trial);
    const double err = (r.trajectory.coords() - Trajectory::straight_line(s0, sH, H).coords()).cwiseAbs().maxCoeff();
    worst_line = std::max(worst_line, err);
    c.expect(err < 1e-6, "straight-line error " + fmt(err));

    // from a bent start the ascent has to find the line itself
    Trajectory bent = Trajectory::straight_line(s0, sH, H);
    for (int t = 1; t < H; ++t) bent.coords().col(t) += 0.2 * std::sin(M_PI * t / H) * Eigen::Vector2d(0.6, -0.8);
    box.clip_columns(bent.coords());
    std::vector<bool> free(H + 1, true);
    free[0] = free[H] = false;
    cfg.iters = 2000000;
    cfg.tol = 1e-300;
    const AscentResult a = ascend(flat, box, bent, free, cfg);
    const double bent_err =
        (a.trajectory.coords() - Trajectory::straight_line(s0, sH, H).coords()).cwiseAbs().maxCoeff();
    worst_line = std::max(worst_line, bent_err);
    c.expect(bent_err < 1e-6, "straight-line error from a bent start " + fmt(bent_err) + " at H=" + std::to_string(H));
  }

  const Eigen::Vector2d g(0.5, 0.6), s0(0.1, 0.1), sH(0.9, 0.2);
  const SquaredDistance fm(g);
  const LinearFeatureObjective quad(fm, Eigen::VectorXd::Constant(1, -1.0));
  double worst_quad = 0.0;
  for (double w : {0.0, 0.1, 0.5, 2.0}) {
    OptConfig cfg;
    cfg.smooth_weight = w;
    cfg.iters = 20000;
    cfg.tol = 1e-15;
    cfg.restarts = 2;
    const OptResult r = optimize(quad, box, s0, sH, 12, cfg, 2);
    const double err = (r.trajectory.coords() - quadratic_oracle(s0, sH, g, 12, w)).cwiseAbs().maxCoeff();
    worst_quad = std::max(worst_quad, err);
    c.expect(err < 1e-3, "quadratic error " + fmt(err) + " at w=" + fmt(w));
  }

  for (int trial = 0; trial < 10; ++trial) {
    RewardEnsemble e;
    for (int j = 0; j < 3; ++j) e.members.push_back(fixture::random_net(2, 8, rng, 2.0));
    const EnsembleObjective obj(e, nullptr);
    const Eigen::Vector2d a = Eigen::Vector2d::Random().cwiseAbs(), b = Eigen::Vector2d::Random().cwiseAbs();
    OptConfig cfg;
    cfg.restarts = 3;
    const OptResult r = optimize(obj, box, a, b, 15, cfg, trial);
    c.expect(r.trajectory.coords().col(0) == a && r.trajectory.coords().col(15) == b, "endpoints moved");
    for (const auto& run : r.runs)
      for (std::size_t i = 1; i < run.history.size(); ++i)
        c.expect(run.history[i] > run.history[i - 1], "objective decreased on an accepted step");
  }
  return c.outcome("straight line error " + fmt(worst_line, 3) + ", quadratic error " + fmt(worst_quad, 3));
}

// ---------------------------------------------------------------------------
// 7-9: studies

std::filesystem::path config_path(const std::string& name) {
  return std::filesystem::path(DCP_SOURCE_DIR) / "configs" / (name + ".toml");
}

struct Final {
  double mean = 0.0, se = 0.0;
  int n = 0;
};

Final run_final(const std::string& name) {
  StudyConfig cfg = load_study_config(config_path(name));
  const SummaryRow row = final_summary(run_study(cfg));
  std::cerr << "  " << name << ": final regret " << fmt(row.mean) << " +- " << fmt(row.std_err) << " (n=" << row.n
            << ")\n";
  return {row.mean, row.std_err, row.n};
}

double pooled_se(const Final& a, const Final& b) { return std::sqrt(a.se * a.se + b.se * b.se); }

Outcome modality_ordering() {
  Checker c;
  std::string summary;
  for (const std::string env : {"table", "laptop"}) {
    const Final d = run_final("modality_" + env + "_d");
    const Final dc = run_final("modality_" + env + "_dc");
    const Final dcp = run_final("modality_" + env + "_dcp");
    c.expect(d.n >= 15, env + ": fewer than 15 seeds");
    for (const auto& [label, x] : {std::pair<std::string, Final>{"DC", dc}, {"DCP", dcp}}) {
      const double margin = d.mean - x.mean, need = 0.5 * pooled_se(d, x);
      c.expect(margin >= need, env + " " + label + ": D-only minus " + label + " = " + fmt(margin) + " < " + fmt(need));
    }
    summary += (summary.empty() ? "" : "; ") + env + " D " + fmt(d.mean, 3) + ", DC " + fmt(dc.mean, 3) + ", DCP " +
               fmt(dcp.mean, 3);
  }
  return c.outcome(summary);
}

Outcome active_vs_passive() {
  Checker c;
  const Final act = run_final("active_bowl_ball");
  const Final pas = run_final("passive_bowl_ball");
  c.expect(act.n >= 50, "fewer than 50 seeds");
  const double margin = pas.mean - act.mean, se = pooled_se(act, pas);
  c.expect(margin >= -se, "active is worse than passive by " + fmt(-margin) + " > one pooled se " + fmt(se));
  return c.outcome("active " + fmt(act.mean) + " +- " + fmt(act.se) + ", passive " + fmt(pas.mean) + " +- " +
                   fmt(pas.se) + ", margin " + fmt(margin / se, 3) + " pooled se");
}

Outcome missing_feature() {
  Checker c;
  const Final ours = run_final("missing_feature_ours");
  const Final coactive = run_final("missing_feature_coactive");
  const Final bayes = run_final("missing_feature_linear_bayes");
  c.expect(ours.n >= 15, "fewer than 15 seeds");
  c.expect(ours.mean < coactive.mean, "ours " + fmt(ours.mean) + " >= coactive " + fmt(coactive.mean));
  c.expect(ours.mean < bayes.mean, "ours " + fmt(ours.mean) + " >= linear Bayes " + fmt(bayes.mean));
  return c.outcome("ours " + fmt(ours.mean, 3) + ", coactive " + fmt(coactive.mean, 3) + ", linear Bayes " +
                   fmt(bayes.mean, 3));
}

// ---------------------------------------------------------------------------
// 10: determinism and persistence

Outcome determinism() {
  Checker c;
  StudyConfig cfg;
  cfg.env = "laptop";
  cfg.schedule.kinds = {InteractionKind::Demo, InteractionKind::Correction, InteractionKind::PreferenceActive,
                        InteractionKind::PreferencePassive};
  cfg.seeds = 3;
  cfg.width = 16;
  cfg.train.epochs = 30;
  cfg.opt.restarts = 2;
  cfg.opt.iters = 100;
  cfg.pool_size = 100;
  auto csv = [&](int workers) {
    cfg.workers = workers;
    std::ostringstream os;
    write_csv(os, run_study(cfg));
    return os.str();
  };
  const std::string first = csv(1);
  c.expect(csv(1) == first, "rerun CSV differs");
  c.expect(csv(3) == first, "CSV differs with 3 workers");

  const auto dir = std::filesystem::temp_directory_path() / ("dcp_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::string id, traj, field;
  {
    SessionManager m(dir);
    id = m.create({{"env", "table"}, {"seed", 4}, {"width", 16}, {"pool_size", 50}, {"train", {{"epochs", 30}}}});
    nlohmann::json states = nlohmann::json::array();
    for (int t = 0; t <= 20; ++t) states.push_back({0.1 + 0.04 * t, 0.7 - 0.015 * t - 0.3 * std::sin(M_PI * t / 20)});
    m.add_demonstration(id, {{"trajectory", {{"states", states}}}});
    m.retrain(id);
    m.wait_idle(id);
    traj = m.trajectory(id).dump();
    field = m.reward_field(id, 16).dump();
  }
  SessionManager loaded(dir);
  c.expect(loaded.trajectory(id).dump() == traj, "reloaded trajectory differs");
  c.expect(loaded.reward_field(id, 16).dump() == field, "reloaded reward field differs");
  std::filesystem::remove_all(dir);
  return c.outcome("study CSV " + std::to_string(first.size()) + " bytes, session round trip");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"deformation suite", deformation},
      {"loss and probability identities", loss_identities},
      {"information gain bounds", info_gain_bounds},
      {"single-demo premise", single_demo},
      {"optimizer", optimizer},
      {"modality ordering", modality_ordering},
      {"active vs passive", active_vs_passive},
      {"missing-feature crossover", missing_feature},
      {"determinism and persistence", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int num = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(num)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << num << " " << criteria[k].first << " (" << fmt(secs, 3)
              << " s): " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
