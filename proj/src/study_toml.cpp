#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "dcp/experiments.hpp"

namespace dcp {

namespace {

template <typename T>
void read_num(const toml::node_view<const toml::node>& node, T& out) {
  if (!node) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value<bool>()) out = *v;
    else throw std::invalid_argument("study config: expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node.value<int64_t>()) out = static_cast<T>(*v);
    else throw std::invalid_argument("study config: expected an integer");
  } else {
    if (auto v = node.value<double>()) out = *v;
    else throw std::invalid_argument("study config: expected a number");
  }
}

std::vector<std::string> read_strings(const toml::node_view<const toml::node>& node, const char* what) {
  const auto* arr = node.as_array();
  if (!arr) throw std::invalid_argument(std::string("study config: '") + what + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& n : *arr) {
    auto s = n.value<std::string>();
    if (!s) throw std::invalid_argument(std::string("study config: '") + what + "' must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

StudyConfig parse_study_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument(std::string("study config: TOML parse error: ") + std::string(e.description()));
  }
  const toml::table& t = tbl;

  StudyConfig cfg;
  cfg.name = t["name"].value_or(cfg.name);
  if (auto env = t["env"].value<std::string>()) {
    cfg.env = *env;
    // relative paths resolve against the config file's directory
    if (cfg.env.find(".toml") != std::string::npos && !base_dir.empty() &&
        std::filesystem::path(cfg.env).is_relative())
      cfg.env = (base_dir / cfg.env).string();
  }
  if (auto m = t["method"].value<std::string>()) cfg.method = parse_method(*m);
  if (t["schedule"])
    for (const auto& k : read_strings(t["schedule"], "schedule")) cfg.schedule.kinds.push_back(parse_interaction_kind(k));
  read_num(t["seeds"], cfg.seeds);
  read_num(t["seed_base"], cfg.seed_base);
  if (const auto* arr = t["seed_list"].as_array())
    for (const auto& n : *arr) {
      auto v = n.value<int64_t>();
      if (!v || *v < 0) throw std::invalid_argument("study config: seed_list entries must be non-negative integers");
      cfg.seed_list.push_back(static_cast<std::uint64_t>(*v));
    }
  read_num(t["ensemble"], cfg.ensemble_size);
  read_num(t["width"], cfg.width);
  read_num(t["leak"], cfg.leak);
  read_num(t["horizon"], cfg.horizon);
  read_num(t["pool_size"], cfg.pool_size);
  read_num(t["pool_sigma"], cfg.pool_sigma);
  read_num(t["record_wall_time"], cfg.record_wall_time);
  read_num(t["workers"], cfg.workers);
  if (t["net_features"]) cfg.net_features = read_strings(t["net_features"], "net_features");
  if (t["known_features"]) cfg.known_features = read_strings(t["known_features"], "known_features");
  if (const auto* arr = t["theta_star"].as_array()) {
    Eigen::VectorXd v(arr->size());
    for (std::size_t i = 0; i < arr->size(); ++i) {
      auto x = (*arr)[i].value<double>();
      if (!x) throw std::invalid_argument("study config: theta_star must be numeric");
      v[static_cast<Eigen::Index>(i)] = *x;
    }
    cfg.theta_star = v;
  }

  const auto teacher = t["teacher"];
  read_num(teacher["demo_noise"], cfg.teacher.demo_noise);
  read_num(teacher["pref_beta"], cfg.teacher.pref_beta);
  read_num(teacher["correction_window"], cfg.teacher.correction_window);
  read_num(teacher["correction_steps"], cfg.teacher.correction_steps);

  const auto train = t["train"];
  read_num(train["n_demo"], cfg.train.n_demo);
  read_num(train["n_correction"], cfg.train.n_correction);
  read_num(train["n_preference"], cfg.train.n_preference);
  read_num(train["epochs"], cfg.train.epochs);
  read_num(train["batch"], cfg.train.batch);
  read_num(train["sigma"], cfg.train.sigma);
  read_num(train["preserve_endpoints"], cfg.train.preserve_endpoints);
  read_num(train["warm_start"], cfg.train.warm_start);
  read_num(train["learning_rate"], cfg.train.learning_rate);

  const auto opt = t["opt"];
  read_num(opt["restarts"], cfg.opt.restarts);
  read_num(opt["iters"], cfg.opt.iters);
  read_num(opt["step"], cfg.opt.step);
  read_num(opt["smooth_weight"], cfg.opt.smooth_weight);
  read_num(opt["tol"], cfg.opt.tol);
  read_num(opt["max_halvings"], cfg.opt.max_halvings);
  read_num(opt["restart_sigma"], cfg.opt.restart_sigma);

  const auto baseline = t["baseline"];
  read_num(baseline["coactive_rate"], cfg.coactive_rate);
  read_num(baseline["particles"], cfg.particles);
  read_num(baseline["beta"], cfg.bayes_beta);
  read_num(baseline["demo_alternatives"], cfg.bayes_demo_alternatives);

  cfg.validate();
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open study config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str(), file.parent_path());
}

}  // namespace dcp
