#include <fstream>
#include <sstream>
#include <stdexcept>

#include <toml.hpp>

#include "dcp/sim_world.hpp"

namespace dcp {

namespace {

Eigen::VectorXd read_vector(const toml::node* node, const std::string& what) {
  const auto* arr = node ? node->as_array() : nullptr;
  if (!arr || arr->empty()) throw std::invalid_argument("environment: '" + what + "' must be a non-empty number array");
  Eigen::VectorXd v(arr->size());
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto x = (*arr)[i].value<double>();
    if (!x) throw std::invalid_argument("environment: '" + what + "' has a non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = *x;
  }
  return v;
}

FeatureKind parse_kind(const std::string& s) {
  if (s == "dist_to") return FeatureKind::DistTo;
  if (s == "height") return FeatureKind::Height;
  if (s == "tilt") return FeatureKind::Tilt;
  throw std::invalid_argument("environment: unknown feature kind '" + s + "'");
}

}  // namespace

Environment parse_environment(const std::string& toml_text) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw std::invalid_argument(std::string("environment: TOML parse error: ") + std::string(e.description()));
  }

  Environment env;
  env.name = tbl["name"].value_or(std::string("custom"));
  env.default_horizon = static_cast<int>(tbl["horizon"].value_or(int64_t{20}));
  env.table_height = tbl["table_height"].value_or(0.0);
  env.box.lo = read_vector(tbl["workspace"]["lo"].node(), "workspace.lo");
  env.box.hi = read_vector(tbl["workspace"]["hi"].node(), "workspace.hi");
  if (env.box.dim() != 2 && env.box.dim() != 3) throw std::invalid_argument("environment: workspace must be 2D or 3D");
  env.box.validate();

  if (const auto* lm = tbl["landmarks"].as_table())
    for (const auto& [key, node] : *lm) env.landmarks[std::string(key.str())] = read_vector(&node, "landmarks." + std::string(key.str()));

  env.start = read_vector(tbl["start"].node(), "start");
  if (tbl.contains("goal")) {
    env.goal = read_vector(tbl["goal"].node(), "goal");
    env.landmarks.emplace("goal", *env.goal);
  }

  const auto* feats = tbl["features"].as_array();
  if (!feats || feats->empty()) throw std::invalid_argument("environment: at least one [[features]] entry is required");
  for (const auto& node : *feats) {
    const auto* ft = node.as_table();
    if (!ft) throw std::invalid_argument("environment: each feature must be a table");
    FeatureDef f;
    f.name = (*ft)["name"].value_or(std::string());
    if (f.name.empty()) throw std::invalid_argument("environment: feature without a name");
    f.kind = parse_kind((*ft)["kind"].value_or(std::string()));
    f.sign = static_cast<int>((*ft)["sign"].value_or(int64_t{0}));
    if (f.kind == FeatureKind::DistTo) {
      const auto pt = (*ft)["point"];
      if (auto lname = pt.value<std::string>()) {
        auto it = env.landmarks.find(*lname);
        if (it == env.landmarks.end())
          throw std::invalid_argument("environment: feature '" + f.name + "' names unknown landmark '" + *lname + "'");
        f.point = it->second;
      } else {
        f.point = read_vector(pt.node(), "features." + f.name + ".point");
      }
    }
    for (const auto& other : env.features)
      if (other.name == f.name) throw std::invalid_argument("environment: duplicate feature '" + f.name + "'");
    env.features.push_back(std::move(f));
  }
  env.validate();
  return env;
}

Environment load_environment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open environment file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_environment(ss.str());
}

}  // namespace dcp
