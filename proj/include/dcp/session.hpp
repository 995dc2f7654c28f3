#pragma once

// Interactive teaching sessions: feedback intake, background retraining,
// query serving and on-disk persistence. The HTTP layer is a thin mapping
// onto SessionManager.

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dcp/sim_world.hpp"

namespace dcp {

inline constexpr int kSessionFormatVersion = 1;

/// Maps to HTTP 404.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps to HTTP 409.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps to HTTP 422.
class UnprocessableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PersistenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainingStatus { Idle, Running, Failed };
std::string to_string(TrainingStatus s);

struct SessionOptions {
  std::string env = "table";
  int horizon = 20;
  Eigen::VectorXd start;
  std::optional<Eigen::VectorXd> goal;
  bool allow_demos_anytime = false;
  std::uint64_t seed = 0;
  int ensemble_size = 3;
  int width = 64;
  int pool_size = 1000;
  double pool_sigma = 0.0;
  TrainConfig train;
  OptConfig opt;

  /// From the POST /sessions body; throws UnprocessableError on bad input.
  static SessionOptions from_json(const nlohmann::json& j, const Environment& env);
  nlohmann::json to_json() const;
};

struct LogEntry {
  long seq = 0;
  std::string kind;
  std::string detail;
};

struct ServedQuery {
  std::string token;
  std::size_t index = 0;
};

/// One teaching session. All members are guarded by `mu`.
struct SessionState {
  std::string id;
  SessionOptions options;
  std::shared_ptr<const Environment> env;
  FeedbackStore store;
  RewardEnsemble ensemble;
  Trajectory trajectory;
  QueryPool pool;
  std::vector<char> used;
  std::optional<ServedQuery> outstanding;
  std::vector<LogEntry> log;
  long queries_served = 0;
  long retrains = 0;
  TrainingStatus status = TrainingStatus::Idle;
  std::string failure;
  std::optional<double> last_loss;

  mutable std::mutex mu;
  std::condition_variable idle_cv;
};

class SessionManager {
 public:
  /// Sessions found under `data_dir` are loaded; new ones are saved there.
  /// An empty path keeps everything in memory.
  explicit SessionManager(std::filesystem::path data_dir = {});
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Returns the new session id.
  std::string create(const nlohmann::json& body);

  nlohmann::json snapshot(const std::string& id) const;
  nlohmann::json status(const std::string& id) const;
  nlohmann::json trajectory(const std::string& id) const;

  void add_demonstration(const std::string& id, const nlohmann::json& body);
  void add_correction(const std::string& id, const nlohmann::json& body);
  /// mode is "active" or "passive". Returns {a, b, query_token, index}.
  nlohmann::json query(const std::string& id, const std::string& mode);
  void add_preference(const std::string& id, const nlohmann::json& body);

  /// Starts a background retrain; throws ConflictError when one is running.
  void retrain(const std::string& id);
  /// Blocks until the session's training is no longer running.
  void wait_idle(const std::string& id) const;

  nlohmann::json reward_field(const std::string& id, int grid) const;

  void save(const std::string& id, const std::filesystem::path& dir) const;
  /// Loads a saved session and registers it; returns its id.
  std::string load(const std::filesystem::path& dir);

  std::vector<std::string> ids() const;

 private:
  std::shared_ptr<SessionState> find(const std::string& id) const;
  void persist(const SessionState& s) const;
  void ensure_pool(SessionState& s) const;
  void train_job(std::shared_ptr<SessionState> s, long generation);

  std::filesystem::path data_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SessionState>> sessions_;
  long next_id_ = 1;
  std::vector<std::thread> workers_;
};

/// Session directory I/O, usable without a manager.
void save_session(const SessionState& s, const std::filesystem::path& dir);
std::shared_ptr<SessionState> load_session(const std::filesystem::path& dir);

}  // namespace dcp
