// dcp: run simulated teaching studies or serve interactive sessions.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "dcp/experiments.hpp"
#include "dcp/http_api.hpp"
#include "dcp/log.hpp"
#include "dcp/session.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

int run_experiment(const std::filesystem::path& config, const std::filesystem::path& out, int seeds, int workers) {
  if (!std::filesystem::is_regular_file(config)) {
    std::cerr << "error: config file not found: " << config.string() << '\n';
    return kExitUsage;
  }
  dcp::StudyConfig cfg;
  try {
    cfg = dcp::load_study_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (seeds > 0) {
    cfg.seeds = seeds;
    cfg.seed_list.clear();
  }
  if (workers > 0) cfg.workers = workers;
  try {
    const dcp::StudyResult result = dcp::run_study(cfg);
    dcp::write_study_outputs(out, result);
    const auto last = dcp::final_summary(result);
    std::cout << cfg.name << ": " << result.curves.size() << " seeds, final mean regret " << last.mean << " (stderr "
              << last.std_err << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward learning from demonstrations, corrections and preferences"};
  app.require_subcommand(1);

  auto* experiment = app.add_subcommand("experiment", "Simulated teaching studies");
  experiment->require_subcommand(1);
  auto* run = experiment->add_subcommand("run", "Run a study and write results.csv and summary.csv");
  std::string config, out;
  int seeds = 0, workers = 0;
  run->add_option("--config", config, "Study TOML file")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--seeds", seeds, "Override the number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--workers", workers, "Parallel sessions")->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "HTTP service for interactive sessions");
  int port = 8080;
  std::string data = "sessions", host = "127.0.0.1", ui;
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--data", data, "Session directory");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--ui", ui, "Static UI directory served under /ui");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 uses 0 for --help; every real parse error becomes a usage error
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (run->parsed()) return run_experiment(config, out, seeds, workers);

  if (serve->parsed()) {
    try {
      dcp::SessionManager sessions(data);
      std::cerr << "serving on http://" << host << ':' << port << " (data: " << data << ")\n";
      if (!dcp::serve(sessions, host, port, ui)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return kExitFailure;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return 0;
}
