#include "dcp/session.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcp/log.hpp"

namespace dcp {

std::string to_string(TrainingStatus s) {
  switch (s) {
    case TrainingStatus::Idle: return "idle";
    case TrainingStatus::Running: return "running";
    case TrainingStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw UnprocessableError(std::string(what) + " must be a non-empty number array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw UnprocessableError(std::string(what) + " must be a number array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  if (!v.allFinite()) throw UnprocessableError(std::string(what) + " must be finite");
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UnprocessableError(std::string("field '") + key + "' has the wrong type");
  }
}

json train_to_json(const TrainConfig& c) {
  return {{"n_demo", c.n_demo},   {"n_correction", c.n_correction}, {"n_preference", c.n_preference},
          {"epochs", c.epochs},   {"batch", c.batch},               {"sigma", c.sigma},
          {"warm_start", c.warm_start}, {"learning_rate", c.learning_rate}};
}

void train_from_json(const json& j, TrainConfig& c) {
  read_opt(j, "n_demo", c.n_demo);
  read_opt(j, "n_correction", c.n_correction);
  read_opt(j, "n_preference", c.n_preference);
  read_opt(j, "epochs", c.epochs);
  read_opt(j, "batch", c.batch);
  read_opt(j, "sigma", c.sigma);
  read_opt(j, "warm_start", c.warm_start);
  read_opt(j, "learning_rate", c.learning_rate);
  if (c.n_demo < 1 || c.n_correction < 1 || c.n_preference < 1 || c.epochs < 1 || c.batch < 1 ||
      !(c.learning_rate > 0.0))
    throw UnprocessableError("invalid training settings");
}

json opt_to_json(const OptConfig& c) {
  return {{"restarts", c.restarts},         {"iters", c.iters}, {"step", c.step},
          {"smooth_weight", c.smooth_weight}, {"tol", c.tol},     {"max_halvings", c.max_halvings},
          {"restart_sigma", c.restart_sigma}};
}

void opt_from_json(const json& j, OptConfig& c) {
  read_opt(j, "restarts", c.restarts);
  read_opt(j, "iters", c.iters);
  read_opt(j, "step", c.step);
  read_opt(j, "smooth_weight", c.smooth_weight);
  read_opt(j, "tol", c.tol);
  read_opt(j, "max_halvings", c.max_halvings);
  read_opt(j, "restart_sigma", c.restart_sigma);
  if (c.restarts < 0 || c.iters < 1 || !(c.tol > 0.0) || c.smooth_weight < 0.0 || c.max_halvings < 0)
    throw UnprocessableError("invalid optimizer settings");
}

// Trajectory from an API payload, checked against the session's shape.
Trajectory trajectory_payload(const json& j, const SessionState& s, int expected_len, const char* what) {
  Trajectory xi;
  try {
    xi = trajectory_from_json(j);
  } catch (const std::exception& e) {
    throw UnprocessableError(std::string(what) + ": " + e.what());
  }
  if (xi.dim() != s.env->dim())
    throw UnprocessableError(std::string(what) + ": state dimension " + std::to_string(xi.dim()) + ", expected " +
                             std::to_string(s.env->dim()));
  if (xi.size() != expected_len)
    throw UnprocessableError(std::string(what) + ": " + std::to_string(xi.size()) + " states, expected " +
                             std::to_string(expected_len));
  if (!xi.coords().allFinite()) throw UnprocessableError(std::string(what) + ": non-finite coordinates");
  for (int t = 0; t < xi.size(); ++t)
    if (!s.env->box.contains(xi.coords().col(t), 1e-9))
      throw UnprocessableError(std::string(what) + ": state " + std::to_string(t) + " outside the workspace");
  return xi;
}

std::vector<std::string> feature_names(const Environment& env) {
  std::vector<std::string> out;
  for (const auto& f : env.features) out.push_back(f.name);
  return out;
}

Trajectory initial_trajectory(const SessionOptions& o) {
  return Trajectory::straight_line(o.start, o.goal ? *o.goal : o.start, o.horizon);
}

void add_log(SessionState& s, std::string kind, std::string detail = {}) {
  const long seq = s.log.empty() ? 1 : s.log.back().seq + 1;
  s.log.push_back({seq, std::move(kind), std::move(detail)});
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SessionOptions SessionOptions::from_json(const json& j, const Environment& env) {
  if (!j.is_object()) throw UnprocessableError("session request must be a JSON object");
  SessionOptions o;
  o.env = env.name;
  o.horizon = env.default_horizon;
  read_opt(j, "H", o.horizon);
  if (o.horizon < 2) throw UnprocessableError("H must be >= 2");
  o.start = j.contains("start") ? vector_from_json(j["start"], "start") : env.start;
  // an explicit null goal makes the task goal-free; omitting it keeps the environment's goal
  if (!j.contains("goal")) o.goal = env.goal;
  else if (!j["goal"].is_null()) o.goal = vector_from_json(j["goal"], "goal");
  if (o.start.size() != env.dim() || !env.box.contains(o.start))
    throw UnprocessableError("start must be a " + std::to_string(env.dim()) + "-vector inside the workspace");
  if (o.goal && (o.goal->size() != env.dim() || !env.box.contains(*o.goal)))
    throw UnprocessableError("goal must be a " + std::to_string(env.dim()) + "-vector inside the workspace");
  read_opt(j, "allow_demos_anytime", o.allow_demos_anytime);
  read_opt(j, "seed", o.seed);
  read_opt(j, "ensemble", o.ensemble_size);
  read_opt(j, "width", o.width);
  read_opt(j, "pool_size", o.pool_size);
  read_opt(j, "pool_sigma", o.pool_sigma);
  if (o.ensemble_size < 1 || o.width < 1 || o.pool_size < 1) throw UnprocessableError("invalid model settings");
  if (j.contains("train")) train_from_json(j["train"], o.train);
  if (j.contains("opt")) opt_from_json(j["opt"], o.opt);
  o.opt.goal_constrained = o.goal.has_value();
  return o;
}

json SessionOptions::to_json() const {
  json j = {{"env", env},
            {"H", horizon},
            {"start", vector_to_json(start)},
            {"goal", goal ? vector_to_json(*goal) : json(nullptr)},
            {"allow_demos_anytime", allow_demos_anytime},
            {"seed", seed},
            {"ensemble", ensemble_size},
            {"width", width},
            {"pool_size", pool_size},
            {"pool_sigma", pool_sigma},
            {"train", train_to_json(train)},
            {"opt", opt_to_json(opt)}};
  return j;
}

SessionManager::SessionManager(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {
  if (data_dir_.empty()) return;
  std::filesystem::create_directories(data_dir_);
  for (const auto& entry : std::filesystem::directory_iterator(data_dir_)) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "session.json")) continue;
    try {
      load(entry.path());
    } catch (const std::exception& e) {
      log::warn("skipping session " + entry.path().string() + ": " + e.what());
    }
  }
}

SessionManager::~SessionManager() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers)
    if (t.joinable()) t.join();
}

std::shared_ptr<SessionState> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

void SessionManager::persist(const SessionState& s) const {
  if (data_dir_.empty()) return;
  save_session(s, data_dir_ / s.id);
}

std::string SessionManager::create(const json& body) {
  if (!body.is_object()) throw UnprocessableError("session request must be a JSON object");
  std::string env_name = "table";
  read_opt(body, "env", env_name);
  std::shared_ptr<const Environment> env;
  try {
    env = std::make_shared<const Environment>(builtin_environment(env_name));
  } catch (const std::invalid_argument& e) {
    throw UnprocessableError(e.what());
  }
  auto s = std::make_shared<SessionState>();
  s->options = SessionOptions::from_json(body, *env);
  s->env = env;
  {
    std::lock_guard lock(mu_);
    char buf[32];
    do {
      std::snprintf(buf, sizeof buf, "s%04ld", next_id_++);
    } while (sessions_.count(buf));
    s->id = buf;
  }
  if (!body.contains("seed")) s->options.seed = derive_seed(0x5e55, std::hash<std::string>{}(s->id));
  const EnvFeatureMap fm(*env);
  s->ensemble = init_ensemble(s->options.ensemble_size, env->dim() + fm.feature_count(), s->options.width,
                              derive_seed(s->options.seed, 0xe75));
  s->trajectory = initial_trajectory(s->options);
  add_log(*s, "create", env->name);
  {
    std::lock_guard lock(s->mu);
    persist(*s);
  }
  std::lock_guard lock(mu_);
  sessions_[s->id] = s;
  return s->id;
}

json SessionManager::snapshot(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json log = json::array();
  for (const auto& e : s->log) log.push_back({{"seq", e.seq}, {"kind", e.kind}, {"detail", e.detail}});
  json landmarks = json::object();
  for (const auto& [name, p] : s->env->landmarks) landmarks[name] = vector_to_json(p);
  return {{"id", s->id},
          {"env", s->env->name},
          {"dim", s->env->dim()},
          {"H", s->options.horizon},
          {"start", vector_to_json(s->options.start)},
          {"goal", s->options.goal ? vector_to_json(*s->options.goal) : json(nullptr)},
          {"workspace", {{"lo", vector_to_json(s->env->box.lo)}, {"hi", vector_to_json(s->env->box.hi)}}},
          {"landmarks", landmarks},
          {"features", feature_names(*s->env)},
          {"allow_demos_anytime", s->options.allow_demos_anytime},
          {"store",
           {{"demonstrations", s->store.demos.size()},
            {"corrections", s->store.corrections.size()},
            {"preferences", s->store.prefs.size()}}},
          {"status", to_string(s->status)},
          {"failure", s->status == TrainingStatus::Failed ? json(s->failure) : json(nullptr)},
          {"last_loss", s->last_loss ? json(*s->last_loss) : json(nullptr)},
          {"retrains", s->retrains},
          {"trajectory", trajectory_to_json(s->trajectory)},
          {"log", log}};
}

json SessionManager::status(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  json j = {{"status", to_string(s->status)},
            {"last_loss", s->last_loss ? json(*s->last_loss) : json(nullptr)},
            {"retrains", s->retrains}};
  if (s->status == TrainingStatus::Failed) j["reason"] = s->failure;
  return j;
}

json SessionManager::trajectory(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return trajectory_to_json(s->trajectory);
}

void SessionManager::add_demonstration(const std::string& id, const json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (!body.is_object() || !body.contains("trajectory")) throw UnprocessableError("body must contain 'trajectory'");
  if (!s->options.allow_demos_anytime && (!s->store.corrections.empty() || !s->store.prefs.empty()))
    throw ConflictError("demonstrations are only accepted before corrections and preferences");
  Trajectory xi = trajectory_payload(body["trajectory"], *s, s->options.horizon + 1, "trajectory");
  s->store.demos.push_back({std::move(xi)});
  add_log(*s, "demonstration");
  persist(*s);
}

void SessionManager::add_correction(const std::string& id, const json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (!body.is_object() || !body.contains("window") || !body.contains("snippet"))
    throw UnprocessableError("body must contain 'window' and 'snippet'");
  const json& w = body["window"];
  Window win;
  if (w.is_array() && w.size() == 2 && w[0].is_number_integer() && w[1].is_number_integer()) {
    win = {w[0].get<int>(), w[1].get<int>()};
  } else if (w.is_object() && w.contains("start") && w.contains("end") && w["start"].is_number_integer() &&
             w["end"].is_number_integer()) {
    win = {w["start"].get<int>(), w["end"].get<int>()};
  } else {
    throw UnprocessableError("window must be [start, end]");
  }
  if (!win.valid_for(s->options.horizon)) throw UnprocessableError("window is not valid for this horizon");
  Trajectory snippet = trajectory_payload(body["snippet"], *s, win.length(), "snippet");
  Correction c{s->trajectory, win, std::move(snippet)};
  s->store.corrections.push_back(std::move(c));
  add_log(*s, "correction", std::to_string(win.start) + "-" + std::to_string(win.end));
  persist(*s);
}

void SessionManager::ensure_pool(SessionState& s) const {
  if (!s.pool.candidates.empty()) return;
  Rng rng(derive_seed(s.options.seed, 0x9001));
  s.pool = generate_pool(s.env->box, s.options.start, s.options.horizon, s.options.pool_size, s.options.pool_sigma, rng);
  if (s.used.size() != s.pool.candidates.size()) s.used.assign(s.pool.candidates.size(), 0);
}

json SessionManager::query(const std::string& id, const std::string& mode) {
  if (mode != "active" && mode != "passive") throw UnprocessableError("mode must be 'active' or 'passive'");
  auto s = find(id);
  std::lock_guard lock(s->mu);
  ensure_pool(*s);
  if (!s->outstanding) {
    std::size_t idx = 0;
    if (mode == "active") {
      const EnvFeatureMap fm(*s->env);
      idx = select_query_index(s->ensemble, s->pool, &fm, s->used);
    } else {
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < s->used.size(); ++i)
        if (!s->used[i]) free.push_back(i);
      if (free.empty()) throw ConflictError("query pool exhausted");
      Rng rng(derive_seed(s->options.seed, 0x9a55, static_cast<std::uint64_t>(s->queries_served)));
      idx = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    ++s->queries_served;
    s->outstanding = ServedQuery{"q" + std::to_string(s->retrains) + "-" + std::to_string(s->queries_served) + "-" +
                                     std::to_string(idx),
                                 idx};
    persist(*s);
  }
  const QueryCandidate& c = s->pool.candidates[s->outstanding->index];
  return {{"a", trajectory_to_json(c.a)},
          {"b", trajectory_to_json(c.b)},
          {"query_token", s->outstanding->token},
          {"index", s->outstanding->index}};
}

void SessionManager::add_preference(const std::string& id, const json& body) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (!body.is_object() || !body.contains("winner") || !body["winner"].is_string() || !body.contains("query_token") ||
      !body["query_token"].is_string())
    throw UnprocessableError("body must contain 'winner' (\"a\" or \"b\") and 'query_token'");
  const std::string winner = body["winner"].get<std::string>();
  if (winner != "a" && winner != "b") throw UnprocessableError("winner must be \"a\" or \"b\"");
  if (!s->outstanding || s->outstanding->token != body["query_token"].get<std::string>())
    throw ConflictError("stale or unknown query token");
  const QueryCandidate& c = s->pool.candidates[s->outstanding->index];
  s->store.prefs.push_back(winner == "a" ? PreferenceQuery{{c.a, c.b}} : PreferenceQuery{{c.b, c.a}});
  s->used[s->outstanding->index] = 1;
  add_log(*s, "preference", s->outstanding->token + ":" + winner);
  s->outstanding.reset();
  persist(*s);
}

void SessionManager::retrain(const std::string& id) {
  auto s = find(id);
  long generation = 0;
  {
    std::lock_guard lock(s->mu);
    if (s->status == TrainingStatus::Running) throw ConflictError("training already running");
    if (s->store.empty()) throw ConflictError("no feedback to train on");
    s->status = TrainingStatus::Running;
    s->failure.clear();
    generation = s->retrains;
    add_log(*s, "retrain");
  }
  std::lock_guard lock(mu_);
  workers_.emplace_back([this, s, generation] { train_job(s, generation); });
}

void SessionManager::train_job(std::shared_ptr<SessionState> s, long generation) {
  FeedbackStore store;
  RewardEnsemble ensemble;
  SessionOptions opts;
  Trajectory current;
  {
    std::lock_guard lock(s->mu);
    store = s->store;
    ensemble = s->ensemble;
    opts = s->options;
    current = s->trajectory;
  }
  try {
    const EnvFeatureMap fm(*s->env);
    TrainConfig tc = opts.train;
    tc.seed = derive_seed(opts.seed, 0x7a1, static_cast<std::uint64_t>(generation));
    TrainResult tr = train_ensemble(ensemble, store, tc, &fm);
    const EnsembleObjective obj(tr.ensemble, &fm);
    std::vector<Trajectory> seeds = default_seeds(store, opts.start, opts.goal, opts.horizon);
    seeds.push_back(current);
    OptResult opt = optimize(obj, s->env->box, opts.start, opts.goal, opts.horizon, opts.opt,
                             derive_seed(opts.seed, 0x0b71, static_cast<std::uint64_t>(generation)), seeds);
    double loss = 0.0;
    for (double l : tr.final_loss) loss += l;
    loss /= static_cast<double>(tr.final_loss.size());

    std::lock_guard lock(s->mu);
    s->ensemble = std::move(tr.ensemble);
    s->trajectory = std::move(opt.trajectory);
    s->last_loss = loss;
    s->retrains = generation + 1;
    // a served query was scored by the old ensemble
    s->outstanding.reset();
    s->status = TrainingStatus::Idle;
    add_log(*s, "trained", format_double(loss));
    persist(*s);
  } catch (const std::exception& e) {
    std::lock_guard lock(s->mu);
    s->status = TrainingStatus::Failed;
    s->failure = e.what();
    add_log(*s, "failed", e.what());
    log::error("session " + s->id + ": training failed: " + e.what());
    try {
      persist(*s);
    } catch (const std::exception& pe) {
      log::error(std::string("session persist failed: ") + pe.what());
    }
  }
  s->idle_cv.notify_all();
}

void SessionManager::wait_idle(const std::string& id) const {
  auto s = find(id);
  std::unique_lock lock(s->mu);
  s->idle_cv.wait(lock, [&] { return s->status != TrainingStatus::Running; });
}

json SessionManager::reward_field(const std::string& id, int grid) const {
  if (grid < 2 || grid > 256) throw UnprocessableError("grid must be in [2, 256]");
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->env->dim() != 2) throw UnprocessableError("reward field is only available for 2D environments");
  const EnvFeatureMap fm(*s->env);
  const WorkspaceBox& box = s->env->box;
  Eigen::MatrixXd pts(2, grid * grid);
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix) {
      pts(0, iy * grid + ix) = box.lo[0] + (box.hi[0] - box.lo[0]) * ix / (grid - 1);
      pts(1, iy * grid + ix) = box.lo[1] + (box.hi[1] - box.lo[1]) * iy / (grid - 1);
    }
  const Eigen::RowVectorXd r = ensemble_state_rewards(s->ensemble, augment(Trajectory(pts), &fm));
  json rows = json::array();
  for (int iy = 0; iy < grid; ++iy) {
    json row = json::array();
    for (int ix = 0; ix < grid; ++ix) row.push_back(r[iy * grid + ix]);
    rows.push_back(std::move(row));
  }
  return {{"grid", grid}, {"lo", vector_to_json(box.lo)}, {"hi", vector_to_json(box.hi)}, {"values", rows}};
}

void SessionManager::save(const std::string& id, const std::filesystem::path& dir) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  save_session(*s, dir);
}

std::string SessionManager::load(const std::filesystem::path& dir) {
  auto s = load_session(dir);
  std::lock_guard lock(mu_);
  sessions_[s->id] = s;
  long n = 0;
  if (std::sscanf(s->id.c_str(), "s%ld", &n) == 1 && n >= next_id_) next_id_ = n + 1;
  return s->id;
}

void save_session(const SessionState& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json log = json::array();
  for (const auto& e : s.log) log.push_back({{"seq", e.seq}, {"kind", e.kind}, {"detail", e.detail}});
  json used = json::array();
  for (std::size_t i = 0; i < s.used.size(); ++i)
    if (s.used[i]) used.push_back(i);
  json j = {{"format", "dcp-session"},
            {"version", kSessionFormatVersion},
            {"id", s.id},
            {"options", s.options.to_json()},
            {"store", store_to_json(s.store)},
            {"trajectory", trajectory_to_json(s.trajectory)},
            {"log", log},
            {"used", used},
            {"outstanding",
             s.outstanding ? json{{"token", s.outstanding->token}, {"index", s.outstanding->index}} : json(nullptr)},
            {"queries_served", s.queries_served},
            {"retrains", s.retrains},
            {"status", s.status == TrainingStatus::Failed ? "failed" : "idle"},
            {"failure", s.failure},
            {"last_loss", s.last_loss ? json(*s.last_loss) : json(nullptr)}};
  // write-then-rename so a crash never leaves a half-written session
  const auto tmp_json = dir / "session.json.tmp";
  const auto tmp_bin = dir / "ensemble.bin.tmp";
  {
    std::ofstream out(tmp_json);
    if (!out) throw PersistenceError("cannot write " + tmp_json.string());
    out << j.dump(1) << '\n';
  }
  save_ensemble(tmp_bin, s.ensemble);
  std::filesystem::rename(tmp_bin, dir / "ensemble.bin");
  std::filesystem::rename(tmp_json, dir / "session.json");
}

std::shared_ptr<SessionState> load_session(const std::filesystem::path& dir) {
  const auto file = dir / "session.json";
  std::ifstream in(file);
  if (!in) throw PersistenceError("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw PersistenceError("corrupted session file " + file.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "dcp-session")
    throw PersistenceError("not a session file: " + file.string());
  const int version = j.value("version", -1);
  if (version != kSessionFormatVersion)
    throw PersistenceError("session version mismatch in " + file.string() + ": found " + std::to_string(version) +
                           ", expected " + std::to_string(kSessionFormatVersion));

  auto s = std::make_shared<SessionState>();
  try {
    s->id = j.at("id").get<std::string>();
    const json& o = j.at("options");
    s->env = std::make_shared<const Environment>(builtin_environment(o.at("env").get<std::string>()));
    s->options = SessionOptions::from_json(o, *s->env);
    s->store = store_from_json(j.at("store"));
    s->trajectory = trajectory_from_json(j.at("trajectory"));
    for (const auto& e : j.at("log")) s->log.push_back({e.at("seq"), e.at("kind"), e.at("detail")});
    s->queries_served = j.at("queries_served").get<long>();
    s->retrains = j.at("retrains").get<long>();
    if (j.at("status") == "failed") {
      s->status = TrainingStatus::Failed;
      s->failure = j.value("failure", "");
    }
    if (!j.at("last_loss").is_null()) s->last_loss = j.at("last_loss").get<double>();
    const json& used = j.at("used");
    const json& outstanding = j.at("outstanding");
    if (!used.empty() || !outstanding.is_null()) {
      Rng rng(derive_seed(s->options.seed, 0x9001));
      s->pool = generate_pool(s->env->box, s->options.start, s->options.horizon, s->options.pool_size,
                              s->options.pool_sigma, rng);
      s->used.assign(s->pool.candidates.size(), 0);
      for (const auto& i : used) s->used.at(i.get<std::size_t>()) = 1;
      if (!outstanding.is_null())
        s->outstanding = ServedQuery{outstanding.at("token").get<std::string>(), outstanding.at("index").get<std::size_t>()};
    }
  } catch (const PersistenceError&) {
    throw;
  } catch (const std::exception& e) {
    throw PersistenceError("corrupted session file " + file.string() + ": " + e.what());
  }
  try {
    s->ensemble = load_ensemble(dir / "ensemble.bin");
  } catch (const std::exception& e) {
    throw PersistenceError(e.what());
  }
  return s;
}

}  // namespace dcp
