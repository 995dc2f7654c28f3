#include "dcp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "dcp/baselines.hpp"
#include "dcp/log.hpp"

namespace dcp {

std::string to_string(InteractionKind k) {
  switch (k) {
    case InteractionKind::Demo: return "demo";
    case InteractionKind::Correction: return "correction";
    case InteractionKind::PreferenceActive: return "preference_active";
    case InteractionKind::PreferencePassive: return "preference_passive";
  }
  return "?";
}

InteractionKind parse_interaction_kind(const std::string& s) {
  if (s == "demo") return InteractionKind::Demo;
  if (s == "correction") return InteractionKind::Correction;
  if (s == "preference_active") return InteractionKind::PreferenceActive;
  if (s == "preference_passive") return InteractionKind::PreferencePassive;
  throw std::invalid_argument("unknown interaction kind '" + s + "'");
}

void Schedule::validate() const {
  if (kinds.empty()) throw std::invalid_argument("schedule is empty");
  bool past_demos = false;
  for (auto k : kinds) {
    if (k != InteractionKind::Demo) past_demos = true;
    else if (past_demos) throw std::invalid_argument("schedule: demonstrations must come before other feedback");
  }
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Ours: return "ours";
    case Method::Coactive: return "coactive";
    case Method::LinearBayes: return "linear_bayes";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "ours") return Method::Ours;
  if (s == "coactive") return Method::Coactive;
  if (s == "linear_bayes") return Method::LinearBayes;
  throw std::invalid_argument("unknown method '" + s + "'");
}

std::vector<std::uint64_t> StudyConfig::seed_values() const {
  if (!seed_list.empty()) return seed_list;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < seeds; ++i) out.push_back(seed_base + static_cast<std::uint64_t>(i));
  return out;
}

void StudyConfig::validate() const {
  schedule.validate();
  if (seed_list.empty() && seeds < 1) throw std::invalid_argument("study: seeds must be >= 1");
  if (ensemble_size < 1 || width < 1) throw std::invalid_argument("study: bad network shape");
  if (pool_size < 1) throw std::invalid_argument("study: pool_size must be >= 1");
  if (particles < 1) throw std::invalid_argument("study: particles must be >= 1");
  if (bayes_demo_alternatives < 1) throw std::invalid_argument("study: bayes_demo_alternatives must be >= 1");
  if (workers < 1) throw std::invalid_argument("study: workers must be >= 1");
  if (horizon < 0 || horizon == 1) throw std::invalid_argument("study: horizon must be 0 (default) or >= 2");
  if (train.epochs < 1 || train.batch < 1 || train.n_demo < 1 || train.n_correction < 1 || train.n_preference < 1)
    throw std::invalid_argument("study: train counts must be >= 1");
  if (opt.iters < 1 || opt.restarts < 0) throw std::invalid_argument("study: bad optimizer settings");
}

Task make_task(const StudyConfig& cfg, std::shared_ptr<const Environment> env, std::uint64_t seed) {
  Task task;
  task.horizon = cfg.horizon > 0 ? cfg.horizon : env->default_horizon;
  task.start = env->start;
  task.goal = env->goal;
  if (cfg.theta_star) {
    if (cfg.theta_star->size() != env->feature_count())
      throw std::invalid_argument("study: theta_star length differs from the environment's feature count");
    task.truth = normalized_theta(*cfg.theta_star);
  } else {
    Rng rng(derive_seed(seed, 0x7e7a));
    task.truth = sample_theta_star(*env, rng);
  }
  task.env = std::move(env);
  return task;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::string> all_feature_names(const Environment& env) {
  std::vector<std::string> names;
  for (const auto& f : env.features) names.push_back(f.name);
  return names;
}

// Per-session learner state for the three methods.
class SessionLearner {
 public:
  SessionLearner(const StudyConfig& cfg, const Task& task, std::uint64_t seed)
      : cfg_(cfg),
        task_(task),
        seed_(seed),
        net_fm_(*task.env, cfg.net_features ? *cfg.net_features : all_feature_names(*task.env)),
        known_fm_(*task.env, cfg.known_features.empty() ? all_feature_names(*task.env) : cfg.known_features),
        coactive_(known_fm_.feature_count(), cfg.coactive_rate) {
    ensemble_ = init_ensemble(cfg.ensemble_size, task.env->dim() + net_fm_.feature_count(), cfg.width,
                              derive_seed(seed, 0xe75), cfg.leak);
    if (cfg.method == Method::LinearBayes) {
      Rng rng(derive_seed(seed, 0xba7e5));
      bayes_.emplace(known_fm_.feature_count(), cfg.particles, cfg.bayes_beta, rng);
    }
  }

  // Pool index of the next query; `used` marks answered candidates.
  std::size_t choose_query(const QueryPool& pool, const std::vector<char>& used, bool active, Rng& rng) const {
    if (active && cfg_.method == Method::Ours) return select_query_index(ensemble_, pool, &net_fm_, used);
    if (active && cfg_.method == Method::LinearBayes) {
      std::size_t best = pool.candidates.size();
      double best_gain = -1.0;
      for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
        if (used[i]) continue;
        const double g = bayes_->info_gain(feature_sums(known_fm_, pool.candidates[i].a),
                                           feature_sums(known_fm_, pool.candidates[i].b));
        if (g > best_gain) {
          best_gain = g;
          best = i;
        }
      }
      if (best == pool.candidates.size()) throw std::invalid_argument("query pool exhausted");
      return best;
    }
    // passive, or a learner without an uncertainty model
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < used.size(); ++i)
      if (!used[i]) free.push_back(i);
    if (free.empty()) throw std::invalid_argument("query pool exhausted");
    return free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
  }

  void observe_demo(const Demonstration& d, const Trajectory& current, Rng& rng) {
    if (cfg_.method == Method::Coactive) coactive_.update(feature_sums(known_fm_, d.xi), feature_sums(known_fm_, current));
    if (cfg_.method == Method::LinearBayes) {
      const DeformationConfig dc{cfg_.train.sigma > 0.0 ? cfg_.train.sigma : default_sigma(d.xi), true};
      const Eigen::VectorXd phi = feature_sums(known_fm_, d.xi);
      for (const auto& alt : sample_alternatives(d.xi, cfg_.bayes_demo_alternatives, dc, rng))
        bayes_->observe(phi, feature_sums(known_fm_, alt));
    }
  }

  void observe_correction(const Correction& c, const Trajectory& current) {
    if (cfg_.method == Method::Coactive)
      coactive_.update(feature_sums(known_fm_, c.corrected()), feature_sums(known_fm_, current));
    if (cfg_.method == Method::LinearBayes)
      bayes_->observe(feature_sums(known_fm_, c.snippet), feature_sums(known_fm_, c.replaced()));
  }

  void observe_preference(const PreferenceQuery& q) {
    for (std::size_t i = 0; i + 1 < q.ranking.size(); ++i) {
      const Eigen::VectorXd w = feature_sums(known_fm_, q.ranking[i]);
      const Eigen::VectorXd l = feature_sums(known_fm_, q.ranking[i + 1]);
      if (cfg_.method == Method::Coactive) coactive_.update(w, l);
      if (cfg_.method == Method::LinearBayes) bayes_->observe(w, l);
    }
  }

  Trajectory replan(const FeedbackStore& store, const Trajectory& current, int interaction) {
    OptConfig oc = cfg_.opt;
    oc.goal_constrained = task_.goal.has_value();
    std::vector<Trajectory> seeds = default_seeds(store, task_.start, task_.goal, task_.horizon);
    seeds.push_back(current);
    const std::uint64_t opt_seed = derive_seed(seed_, 0x0b71, interaction);
    switch (cfg_.method) {
      case Method::Ours: {
        if (store.empty()) return current;
        TrainConfig tc = cfg_.train;
        tc.seed = derive_seed(seed_, 0x7a1, interaction);
        ensemble_ = train_ensemble(ensemble_, store, tc, &net_fm_).ensemble;
        const EnsembleObjective obj(ensemble_, &net_fm_);
        return optimize(obj, task_.env->box, task_.start, task_.goal, task_.horizon, oc, opt_seed, seeds).trajectory;
      }
      case Method::Coactive:
        return plan_linear(known_fm_, coactive_.theta(), task_.env->box, task_.start, task_.goal, task_.horizon, oc,
                           opt_seed, seeds);
      case Method::LinearBayes:
        return plan_linear(known_fm_, bayes_->mean(), task_.env->box, task_.start, task_.goal, task_.horizon, oc,
                           opt_seed, seeds);
    }
    return current;
  }

 private:
  const StudyConfig& cfg_;
  const Task& task_;
  std::uint64_t seed_;
  EnvFeatureMap net_fm_;
  EnvFeatureMap known_fm_;
  RewardEnsemble ensemble_;
  CoactiveLearner coactive_;
  std::optional<LinearBayesLearner> bayes_;
};

bool needs_pool(const Schedule& s) {
  for (auto k : s.kinds)
    if (k == InteractionKind::PreferenceActive || k == InteractionKind::PreferencePassive) return true;
  return false;
}

}  // namespace

SessionResult run_session(const StudyConfig& cfg, std::shared_ptr<const Environment> env, std::uint64_t seed) {
  cfg.validate();
  SessionResult out;
  out.task = make_task(cfg, std::move(env), seed);
  const Task& task = out.task;
  cfg.teacher.validate(task.horizon);

  const Trajectory& best = oracle_optimum(task);
  SessionLearner learner(cfg, task, seed);
  Rng teacher_rng(derive_seed(seed, 0x7eac));
  Rng pick_rng(derive_seed(seed, 0x9a55));
  Rng learner_rng(derive_seed(seed, 0x1ea4));

  QueryPool pool;
  std::vector<char> used;
  if (needs_pool(cfg.schedule)) {
    Rng pool_rng(derive_seed(seed, 0x9001));
    pool = generate_pool(task.env->box, task.start, task.horizon, cfg.pool_size, cfg.pool_sigma, pool_rng);
    used.assign(pool.candidates.size(), 0);
  }

  Trajectory current = Trajectory::straight_line(task.start, task.goal ? *task.goal : task.start, task.horizon);
  RegretCurve& curve = out.curve;
  curve.seed = seed;
  curve.initial_regret = regret(*task.env, task.truth, current, best);

  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const InteractionKind kind = cfg.schedule.kinds[i];
    const auto t0 = Clock::now();
    try {
      bool changed = true;
      switch (kind) {
        case InteractionKind::Demo: {
          Demonstration d = teacher_demo(task, cfg.teacher, teacher_rng);
          learner.observe_demo(d, current, learner_rng);
          out.store.demos.push_back(std::move(d));
          break;
        }
        case InteractionKind::Correction: {
          TeacherCorrection tc = teacher_correction(task, current, cfg.teacher, teacher_rng);
          if (tc.declined) {
            ++curve.declined;
            changed = false;
            break;
          }
          learner.observe_correction(tc.correction, current);
          out.store.corrections.push_back(std::move(tc.correction));
          break;
        }
        case InteractionKind::PreferenceActive:
        case InteractionKind::PreferencePassive: {
          const std::size_t idx =
              learner.choose_query(pool, used, kind == InteractionKind::PreferenceActive, pick_rng);
          used[idx] = 1;
          PreferenceQuery q = teacher_preference(task, pool.candidates[idx], cfg.teacher, teacher_rng);
          learner.observe_preference(q);
          out.store.prefs.push_back(std::move(q));
          break;
        }
      }
      if (changed) current = learner.replan(out.store, current, static_cast<int>(i));
    } catch (const std::exception& e) {
      throw SessionError(seed, static_cast<int>(i) + 1, e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    curve.kinds.push_back(kind);
    curve.regret.push_back(regret(*task.env, task.truth, current, best));
    curve.wall_ms.push_back(cfg.record_wall_time ? ms : 0.0);
  }
  out.final_trajectory = current;
  return out;
}

SessionResult run_session(const StudyConfig& cfg, std::uint64_t seed) {
  return run_session(cfg, std::make_shared<const Environment>(resolve_environment(cfg.env)), seed);
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto env = std::make_shared<const Environment>(resolve_environment(cfg.env));
  const std::vector<std::uint64_t> seeds = cfg.seed_values();
  StudyResult result;
  result.curves.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        result.curves[i] = run_session(cfg, env, seeds[i]).curve;
        log::info("study " + cfg.name + ": seed " + std::to_string(seeds[i]) + " done");
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next = seeds.size();
      }
    }
  };
  const int n_threads = std::min<int>(cfg.workers, static_cast<int>(seeds.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

std::vector<SummaryRow> summarize(const StudyResult& r) {
  std::vector<SummaryRow> rows;
  if (r.curves.empty()) return rows;
  const std::size_t len = r.curves.front().regret.size();
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : r.curves)
      if (i < c.regret.size()) {
        sum += c.regret[i];
        ++n;
      }
    SummaryRow row{static_cast<int>(i) + 1, n ? sum / n : 0.0, 0.0, n};
    if (n > 1) {
      double ss = 0.0;
      for (const auto& c : r.curves)
        if (i < c.regret.size()) ss += (c.regret[i] - row.mean) * (c.regret[i] - row.mean);
      row.std_err = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
    rows.push_back(row);
  }
  return rows;
}

SummaryRow final_summary(const StudyResult& r) {
  const auto rows = summarize(r);
  if (rows.empty()) throw std::invalid_argument("final_summary: empty study");
  return rows.back();
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, const StudyResult& r) {
  os << "seed,interaction,kind,regret,wall_ms\n";
  std::vector<const RegretCurve*> sorted;
  for (const auto& c : r.curves) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->seed < b->seed; });
  for (const auto* cp : sorted) {
    const RegretCurve& c = *cp;
    for (std::size_t i = 0; i < c.regret.size(); ++i)
      os << c.seed << ',' << (i + 1) << ',' << to_string(c.kinds[i]) << ',' << fmt_double(c.regret[i]) << ','
         << fmt_double(c.wall_ms[i]) << '\n';
  }
}

void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "interaction,mean_regret,stderr,n\n";
  for (const auto& row : rows)
    os << row.interaction << ',' << fmt_double(row.mean) << ',' << fmt_double(row.std_err) << ',' << row.n << '\n';
}

void write_study_outputs(const std::filesystem::path& dir, const StudyResult& r) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "results.csv");
  std::ofstream summary(dir / "summary.csv");
  if (!csv || !summary) throw std::runtime_error("cannot write study outputs to " + dir.string());
  write_csv(csv, r);
  write_summary(summary, summarize(r));
}

}  // namespace dcp
