#pragma once

// Simulated teaching studies: run a feedback schedule against a simulated
// teacher, retrain and re-plan after every interaction, and record regret.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcp/sim_world.hpp"

namespace dcp {

enum class InteractionKind { Demo, Correction, PreferenceActive, PreferencePassive };

std::string to_string(InteractionKind k);
/// Accepts demo, correction, preference_active, preference_passive.
InteractionKind parse_interaction_kind(const std::string& s);

struct Schedule {
  std::vector<InteractionKind> kinds;

  std::size_t size() const { return kinds.size(); }
  /// Nonempty, and demonstrations (if any) form a prefix.
  void validate() const;
};

enum class Method { Ours, Coactive, LinearBayes };

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct StudyConfig {
  std::string name = "study";
  /// Builtin environment name or path to an environment TOML file.
  std::string env = "table";
  Schedule schedule;
  int seeds = 1;
  std::uint64_t seed_base = 0;
  /// Explicit seeds; overrides seeds/seed_base when nonempty.
  std::vector<std::uint64_t> seed_list;
  Method method = Method::Ours;

  TeacherConfig teacher;
  TrainConfig train;
  OptConfig opt;

  int ensemble_size = 3;
  int width = 64;
  double leak = 0.01;
  /// Features appended to the network input; empty means all of the environment's.
  std::optional<std::vector<std::string>> net_features;
  /// Features visible to the linear baselines; empty means all.
  std::vector<std::string> known_features;
  /// Fixed true weights (normalized); otherwise sampled per seed.
  std::optional<Eigen::VectorXd> theta_star;
  /// 0 selects the environment's default horizon.
  int horizon = 0;

  int pool_size = 1000;
  /// <= 0 selects default_sigma() of each pool line.
  double pool_sigma = 0.0;

  double coactive_rate = 0.1;
  int particles = 1000;
  double bayes_beta = 1.0;
  /// Deformations a demonstration is compared against in the linear-Bayes update.
  int bayes_demo_alternatives = 10;

  /// When off, wall_ms is written as 0 so reruns are byte-identical.
  bool record_wall_time = false;
  int workers = 1;

  std::vector<std::uint64_t> seed_values() const;
  void validate() const;
};

/// Regret after every interaction of one session.
struct RegretCurve {
  std::uint64_t seed = 0;
  std::vector<InteractionKind> kinds;
  std::vector<double> regret;
  std::vector<double> wall_ms;
  /// Regret of the trajectory before any feedback.
  double initial_regret = 0.0;
  /// Corrections the teacher declined.
  int declined = 0;
};

struct SessionResult {
  RegretCurve curve;
  Trajectory final_trajectory;
  Task task;
  FeedbackStore store;
};

class SessionError : public std::runtime_error {
 public:
  SessionError(std::uint64_t seed, int interaction, const std::string& what)
      : std::runtime_error("seed " + std::to_string(seed) + ", interaction " + std::to_string(interaction) + ": " +
                           what),
        seed_(seed),
        interaction_(interaction) {}
  std::uint64_t seed() const { return seed_; }
  int interaction() const { return interaction_; }

 private:
  std::uint64_t seed_;
  int interaction_;
};

/// The task a study runs for one seed.
Task make_task(const StudyConfig& cfg, std::shared_ptr<const Environment> env, std::uint64_t seed);

SessionResult run_session(const StudyConfig& cfg, std::uint64_t seed);
/// Same, reusing an already resolved environment.
SessionResult run_session(const StudyConfig& cfg, std::shared_ptr<const Environment> env, std::uint64_t seed);

struct StudyResult {
  /// One curve per seed, in seed_values() order.
  std::vector<RegretCurve> curves;
};

/// Runs every seed on a pool of cfg.workers threads.
StudyResult run_study(const StudyConfig& cfg);

struct SummaryRow {
  int interaction = 0;
  double mean = 0.0;
  double std_err = 0.0;
  int n = 0;
};

/// Mean and standard error (n - 1 denominator) of regret per interaction.
std::vector<SummaryRow> summarize(const StudyResult& r);

/// Mean final regret and its standard error across seeds.
SummaryRow final_summary(const StudyResult& r);

void write_csv(std::ostream& os, const StudyResult& r);
void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows);

/// Writes results.csv and summary.csv into `dir` (created if needed).
void write_study_outputs(const std::filesystem::path& dir, const StudyResult& r);

StudyConfig parse_study_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});
StudyConfig load_study_config(const std::filesystem::path& file);

}  // namespace dcp
