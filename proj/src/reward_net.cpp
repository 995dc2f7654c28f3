#include "dcp/reward_net.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dcp {

NetParams::NetParams(int d_aug, int width, double leak) : d_aug_(d_aug), width_(width), leak_(leak) {
  if (d_aug < 1 || width < 1) throw std::invalid_argument("NetParams: input and hidden widths must be >= 1");
  data_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(d_aug, width)));
}

std::size_t NetParams::parameter_count(int d_aug, int width) {
  const auto d = static_cast<std::size_t>(d_aug);
  const auto w = static_cast<std::size_t>(width);
  return d * w + w + w * w + w + w + 1;
}

std::size_t NetParams::off_b1() const { return static_cast<std::size_t>(d_aug_) * width_; }
std::size_t NetParams::off_w2() const { return off_b1() + width_; }
std::size_t NetParams::off_b2() const { return off_w2() + static_cast<std::size_t>(width_) * width_; }
std::size_t NetParams::off_w3() const { return off_b2() + width_; }

Eigen::Map<Eigen::MatrixXd> NetParams::w1() { return {data_.data(), width_, d_aug_}; }
Eigen::Map<const Eigen::MatrixXd> NetParams::w1() const { return {data_.data(), width_, d_aug_}; }
Eigen::Map<Eigen::VectorXd> NetParams::b1() { return {data_.data() + off_b1(), width_}; }
Eigen::Map<const Eigen::VectorXd> NetParams::b1() const { return {data_.data() + off_b1(), width_}; }
Eigen::Map<Eigen::MatrixXd> NetParams::w2() { return {data_.data() + off_w2(), width_, width_}; }
Eigen::Map<const Eigen::MatrixXd> NetParams::w2() const { return {data_.data() + off_w2(), width_, width_}; }
Eigen::Map<Eigen::VectorXd> NetParams::b2() { return {data_.data() + off_b2(), width_}; }
Eigen::Map<const Eigen::VectorXd> NetParams::b2() const { return {data_.data() + off_b2(), width_}; }
Eigen::Map<Eigen::RowVectorXd> NetParams::w3() { return {data_.data() + off_w3(), width_}; }
Eigen::Map<const Eigen::RowVectorXd> NetParams::w3() const { return {data_.data() + off_w3(), width_}; }

NetParams NetParams::zeros_like() const { return NetParams(d_aug_, width_, leak_); }

NetParams init_net(int d_aug, int width, std::uint64_t seed, double leak) {
  NetParams p(d_aug, width, leak);
  Rng rng(seed);
  auto fill = [&rng](auto&& block, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = u(rng);
  };
  fill(p.w1(), d_aug, width);
  fill(p.w2(), width, width);
  fill(p.w3(), width, 1);
  return p;
}

RewardEnsemble init_ensemble(int members, int d_aug, int width, std::uint64_t seed, double leak) {
  if (members < 1) throw std::invalid_argument("ensemble needs at least one member");
  RewardEnsemble e;
  for (int j = 0; j < members; ++j) e.members.push_back(init_net(d_aug, width, derive_seed(seed, 0x1e17, j), leak));
  return e;
}

namespace {

struct Activations {
  Eigen::MatrixXd z1, a1, z2, a2;
  Eigen::RowVectorXd r;
};

void check_width(const NetParams& theta, Eigen::Index rows) {
  if (rows != theta.input_width())
    throw std::invalid_argument("reward net: input width " + std::to_string(rows) + " != network width " +
                                std::to_string(theta.input_width()));
}

Eigen::MatrixXd leaky(const Eigen::MatrixXd& z, double leak) {
  return z.unaryExpr([leak](double v) { return v > 0.0 ? v : leak * v; });
}

Eigen::MatrixXd leaky_slope(const Eigen::MatrixXd& z, double leak) {
  return z.unaryExpr([leak](double v) { return v > 0.0 ? 1.0 : leak; });
}

Activations forward(const NetParams& theta, const Eigen::MatrixXd& x) {
  check_width(theta, x.rows());
  Activations a;
  a.z1 = theta.w1() * x;
  a.z1.colwise() += theta.b1();
  a.a1 = leaky(a.z1, theta.leak());
  a.z2 = theta.w2() * a.a1;
  a.z2.colwise() += theta.b2();
  a.a2 = leaky(a.z2, theta.leak());
  Eigen::RowVectorXd z3 = theta.w3() * a.a2;
  z3.array() += theta.b3();
  a.r = z3.array().tanh();
  return a;
}

// Backpropagates per-column adjoints of r through the network. Fills the
// parameter gradient when `grad` is non-null and returns dLoss/dx.
Eigen::MatrixXd backward(const NetParams& theta, const Eigen::MatrixXd& x, const Activations& a,
                         const Eigen::RowVectorXd& adjoints, NetParams* grad) {
  const Eigen::RowVectorXd dz3 = adjoints.array() * (1.0 - a.r.array().square());
  const Eigen::MatrixXd dz2 = (theta.w3().transpose() * dz3).cwiseProduct(leaky_slope(a.z2, theta.leak()));
  const Eigen::MatrixXd dz1 = (theta.w2().transpose() * dz2).cwiseProduct(leaky_slope(a.z1, theta.leak()));
  if (grad) {
    grad->w3().noalias() = dz3 * a.a2.transpose();
    grad->b3() = dz3.sum();
    grad->w2().noalias() = dz2 * a.a1.transpose();
    grad->b2() = dz2.rowwise().sum();
    grad->w1().noalias() = dz1 * x.transpose();
    grad->b1() = dz1.rowwise().sum();
  }
  return theta.w1().transpose() * dz1;
}

}  // namespace

Eigen::RowVectorXd state_rewards(const NetParams& theta, const Eigen::MatrixXd& aug_states) {
  return forward(theta, aug_states).r;
}

double state_reward(const NetParams& theta, const Eigen::VectorXd& aug_state) {
  return state_rewards(theta, aug_state)(0);
}

double state_reward(const NetParams& theta, const State& s) { return state_reward(theta, s.augmented()); }

double traj_reward(const NetParams& theta, const Eigen::MatrixXd& aug_states) {
  return state_rewards(theta, aug_states).sum();
}

double traj_reward(const NetParams& theta, const Trajectory& xi, const FeatureMap* fm) {
  return traj_reward(theta, augment(xi, fm));
}

Eigen::RowVectorXd ensemble_state_rewards(const RewardEnsemble& e, const Eigen::MatrixXd& aug_states) {
  if (e.members.empty()) throw std::invalid_argument("empty ensemble");
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(aug_states.cols());
  for (const auto& m : e.members) total += state_rewards(m, aug_states);
  return total / static_cast<double>(e.size());
}

double ensemble_state_reward(const RewardEnsemble& e, const State& s) {
  return ensemble_state_rewards(e, s.augmented())(0);
}

NetParams grad_params(const NetParams& theta, const Eigen::MatrixXd& aug_states, const Eigen::RowVectorXd& adjoints) {
  if (adjoints.size() != aug_states.cols()) throw std::invalid_argument("grad_params: adjoint count mismatch");
  NetParams grad = theta.zeros_like();
  if (aug_states.cols() == 0) return grad;
  const Activations a = forward(theta, aug_states);
  backward(theta, aug_states, a, adjoints, &grad);
  return grad;
}

NetParams grad_params_fused(const NetParams& theta, const Eigen::MatrixXd& aug_states,
                            const std::function<Eigen::RowVectorXd(const Eigen::RowVectorXd&)>& adjoint_of) {
  NetParams grad = theta.zeros_like();
  if (aug_states.cols() == 0) return grad;
  const Activations a = forward(theta, aug_states);
  const Eigen::RowVectorXd adjoints = adjoint_of(a.r);
  if (adjoints.size() != aug_states.cols()) throw std::invalid_argument("grad_params: adjoint count mismatch");
  backward(theta, aug_states, a, adjoints, &grad);
  return grad;
}

NetParams grad_params(const NetParams& theta, std::span<const TrajectoryAdjoint> terms) {
  Eigen::Index cols = 0;
  for (const auto& t : terms) cols += t.aug_states->cols();
  Eigen::MatrixXd x(theta.input_width(), cols);
  Eigen::RowVectorXd adj(cols);
  Eigen::Index at = 0;
  for (const auto& t : terms) {
    check_width(theta, t.aug_states->rows());
    x.middleCols(at, t.aug_states->cols()) = *t.aug_states;
    adj.segment(at, t.aug_states->cols()).setConstant(t.adjoint);
    at += t.aug_states->cols();
  }
  return grad_params(theta, x, adj);
}

Eigen::MatrixXd grad_aug_input(const NetParams& theta, const Eigen::MatrixXd& aug_states) {
  const Activations a = forward(theta, aug_states);
  return backward(theta, aug_states, a, Eigen::RowVectorXd::Ones(aug_states.cols()), nullptr);
}

Eigen::VectorXd grad_input(const RewardEnsemble& e, const State& s, const FeatureMap* fm) {
  const Eigen::VectorXd x = s.augmented();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& m : e.members) g += grad_aug_input(m, x).col(0);
  g /= static_cast<double>(e.size());
  const Trajectory single(s.coords);
  return coords_gradient(single, g, fm).col(0);
}

void adam_step(NetParams& theta, const NetParams& grad, AdamState& st) {
  const auto n = static_cast<Eigen::Index>(theta.size());
  if (static_cast<Eigen::Index>(grad.size()) != n) throw std::invalid_argument("adam_step: gradient shape mismatch");
  if (st.m.size() != n) {
    st.m = Eigen::VectorXd::Zero(n);
    st.v = Eigen::VectorXd::Zero(n);
  }
  ++st.step;
  const auto& g = grad.data();
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * g;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  theta.data().array() -= st.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + st.eps);
}

namespace {

std::uint64_t fnv1a(const char* bytes, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string payload_bytes(const Eigen::VectorXd& v) {
  static_assert(std::endian::native == std::endian::little, "serialization assumes a little-endian host");
  std::string out(static_cast<std::size_t>(v.size()) * sizeof(double), '\0');
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

}  // namespace

void write_params(std::ostream& os, const NetParams& theta) {
  const std::string payload = payload_bytes(theta.data());
  nlohmann::json header = {{"d_aug", theta.input_width()},
                           {"W", theta.hidden_width()},
                           {"layers", 3},
                           {"leak", theta.leak()},
                           {"count", theta.size()},
                           {"checksum", fnv1a(payload.data(), payload.size())}};
  os << header.dump() << '\n';
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

NetParams read_params(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing parameter header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("unreadable parameter header: ") + e.what());
  }
  try {
    const int d_aug = header.at("d_aug").get<int>();
    const int width = header.at("W").get<int>();
    if (header.at("layers").get<int>() != 3) throw std::runtime_error("unsupported layer count");
    NetParams p(d_aug, width, header.at("leak").get<double>());
    if (header.at("count").get<std::size_t>() != p.size()) throw std::runtime_error("parameter count mismatch");
    std::string payload(p.size() * sizeof(double), '\0');
    is.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (is.gcount() != static_cast<std::streamsize>(payload.size())) throw std::runtime_error("truncated parameters");
    if (fnv1a(payload.data(), payload.size()) != header.at("checksum").get<std::uint64_t>())
      throw std::runtime_error("parameter checksum mismatch");
    std::memcpy(p.data().data(), payload.data(), payload.size());
    if (!p.all_finite()) throw std::runtime_error("non-finite parameters");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad parameter header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("bad parameter header: ") + e.what());
  }
}

void save_ensemble(const std::filesystem::path& file, const RewardEnsemble& e) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os << nlohmann::json{{"format", "dcp-ensemble"}, {"members", e.size()}}.dump() << '\n';
  for (const auto& m : e.members) write_params(os, m);
  if (!os) throw std::runtime_error("write failed for " + file.string());
}

RewardEnsemble load_ensemble(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open ensemble file " + file.string());
  try {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty file");
    const auto header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "dcp-ensemble" || !header.contains("members"))
      throw std::runtime_error("not an ensemble file");
    const int members = header["members"].get<int>();
    if (members < 1) throw std::runtime_error("ensemble has no members");
    RewardEnsemble e;
    for (int j = 0; j < members; ++j) e.members.push_back(read_params(is));
    for (const auto& m : e.members)
      if (m.input_width() != e.members.front().input_width()) throw std::runtime_error("member widths differ");
    return e;
  } catch (const std::exception& ex) {
    throw std::runtime_error("corrupted ensemble file " + file.string() + ": " + ex.what());
  }
}

}  // namespace dcp
