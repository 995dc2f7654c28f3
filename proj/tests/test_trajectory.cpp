#include <doctest.h>

#include <thread>

#include "dcp/trajectory.hpp"
#include "oracles.hpp"

using namespace dcp;

namespace {

Trajectory random_traj(int H, int d, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd c(d, H + 1);
  for (int i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  return Trajectory(c);
}

Eigen::MatrixXd stencil_matrix(int L) { return oracle::to_eigen(oracle::stencil(L)); }

}  // namespace

TEST_CASE("accel norm matrix for one interior point is 1/6") {
  const Eigen::MatrixXd M = build_accel_norm_matrix(1);
  REQUIRE(M.rows() == 1);
  CHECK(M(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("accel norm matrix matches a Gauss-Jordan inverse entrywise") {
  for (int L : {2, 3, 7, 19}) {
    const auto inv = oracle::to_eigen(oracle::gauss_jordan_inverse(oracle::gram(oracle::stencil(L))));
    const Eigen::MatrixXd M = build_accel_norm_matrix(L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) CHECK(oracle::close(M(i, j), inv(i, j), 1e-10, 0.0));
  }
}

TEST_CASE("accel norm matrix is symmetric positive definite and inverts the Gram matrix") {
  for (int L = 1; L <= 200; L += (L < 20 ? 1 : 17)) {
    const Eigen::MatrixXd M = build_accel_norm_matrix(L);
    CHECK(M == M.transpose());
    const Eigen::MatrixXd A = stencil_matrix(L);
    const Eigen::MatrixXd residual = A.transpose() * A * M - Eigen::MatrixXd::Identity(L, L);
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("non-positive interior count is rejected") {
  CHECK_THROWS_AS(build_accel_norm_matrix(0), std::invalid_argument);
  CHECK_THROWS_AS(build_accel_norm_matrix(-3), std::invalid_argument);
}

TEST_CASE("cached matrix is shared and safe under concurrent first use") {
  std::vector<const Eigen::MatrixXd*> seen(8, nullptr);
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) ts.emplace_back([&, i] { seen[i] = &accel_norm_matrix(37); });
  for (auto& t : ts) t.join();
  for (auto* p : seen) CHECK(p == seen[0]);
  CHECK(*seen[0] == build_accel_norm_matrix(37));
}

TEST_CASE("deform with zero lambda is the identity") {
  Rng rng(1);
  const Trajectory xi = random_traj(10, 2, rng);
  const DeformationConfig cfg;
  CHECK(deform(xi, Eigen::MatrixXd::Zero(9, 2), cfg) == xi);
}

TEST_CASE("deform is linear in lambda") {
  Rng rng(2);
  const Trajectory xi = random_traj(12, 3, rng);
  for (bool keep : {true, false}) {
    const DeformationConfig cfg{0.1, keep};
    const int L = deformable_points(12, keep);
    const Eigen::MatrixXd l1 = Eigen::MatrixXd::Random(L, 3), l2 = Eigen::MatrixXd::Random(L, 3);
    const double a = 0.7, b = -1.3;
    const Eigen::MatrixXd lhs = deform(xi, a * l1 + b * l2, cfg).coords();
    const Eigen::MatrixXd rhs = xi.coords() + a * (deform(xi, l1, cfg).coords() - xi.coords()) +
                                b * (deform(xi, l2, cfg).coords() - xi.coords());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd once = deform(xi, l1, cfg).coords() - xi.coords();
    const Eigen::MatrixXd twice = deform(xi, 2.0 * l1, cfg).coords() - xi.coords();
    CHECK((twice - 2.0 * once).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("unit impulse displaces interior waypoints by a column of M") {
  const Trajectory xi = Trajectory::straight_line(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 4);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(3, 1);
  lambda(1, 0) = 1.0;
  const Trajectory out = deform(xi, lambda, {0.1, true});
  const Eigen::MatrixXd M = build_accel_norm_matrix(3);
  for (int k = 0; k < 3; ++k) CHECK(out.coords()(0, k + 1) - xi.coords()(0, k + 1) == doctest::Approx(M(k, 1)));
  CHECK(out.coords()(0, 0) == xi.coords()(0, 0));
  CHECK(out.coords()(0, 4) == xi.coords()(0, 4));
}

TEST_CASE("deform rejects a lambda of the wrong shape") {
  Rng rng(3);
  const Trajectory xi = random_traj(6, 2, rng);
  CHECK_THROWS_AS(deform(xi, Eigen::MatrixXd::Zero(6, 2), {0.1, true}), std::invalid_argument);
  CHECK_THROWS_AS(deform(xi, Eigen::MatrixXd::Zero(5, 3), {0.1, true}), std::invalid_argument);
  CHECK_NOTHROW(deform(xi, Eigen::MatrixXd::Zero(7, 2), {0.1, false}));
}

TEST_CASE("sampled alternatives keep endpoints bitwise") {
  Rng rng(4);
  const Trajectory xi = random_traj(20, 2, rng);
  for (const auto& alt : sample_alternatives(xi, 50, {0.3, true}, rng)) {
    CHECK(alt.coords().col(0) == xi.coords().col(0));
    CHECK(alt.coords().col(20) == xi.coords().col(20));
    CHECK(alt.horizon() == 20);
  }
}

TEST_CASE("vanishing sigma leaves alternatives on the source") {
  Rng rng(5);
  const Trajectory xi = random_traj(20, 2, rng);
  for (const auto& alt : sample_alternatives(xi, 10, {1e-12, true}, rng))
    CHECK((alt.coords() - xi.coords()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("sampling is deterministic per seed") {
  Rng r0(6);
  const Trajectory xi = random_traj(15, 3, r0);
  Rng a(42), b(42);
  const auto x = sample_alternatives(xi, 5, {0.2, true}, a);
  const auto y = sample_alternatives(xi, 5, {0.2, true}, b);
  for (int i = 0; i < 5; ++i) CHECK(x[i] == y[i]);
}

TEST_CASE("invalid sigma is rejected") {
  Rng rng(7);
  const Trajectory xi = random_traj(10, 2, rng);
  CHECK_THROWS_AS(sample_alternatives(xi, 3, {0.0, true}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_alternatives(xi, 3, {std::nan(""), true}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_alternatives(xi, 0, {0.1, true}, rng), std::invalid_argument);
}

TEST_CASE("empirical displacement covariance is proportional to sigma^2 M M^T") {
  // N = 100 draws, H = 20, sigma = 0.5; compare the normalized covariance with
  // the closed form Var(M lambda).
  const int H = 20, N = 100, L = H - 1;
  const double sigma = 0.5;
  const Trajectory xi = Trajectory::straight_line(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), H);
  Rng rng(2024);
  Eigen::MatrixXd disp(L, N);
  const auto alts = sample_alternatives(xi, N, {sigma, true}, rng);
  for (int n = 0; n < N; ++n) disp.col(n) = (alts[n].coords() - xi.coords()).row(0).segment(1, L).transpose();
  const Eigen::MatrixXd emp = disp * disp.transpose() / N;

  const auto inv = oracle::to_eigen(oracle::gauss_jordan_inverse(oracle::gram(oracle::stencil(L))));
  const Eigen::MatrixXd shape = inv * inv.transpose();
  // best scalar fit, then the relative Frobenius error of the fit
  const double c = (emp.cwiseProduct(shape)).sum() / shape.squaredNorm();
  const double rel = (emp - c * shape).norm() / (c * shape).norm();
  CHECK(rel < 0.2);
  // the scale is set so the peak displacement std equals sigma
  CHECK(std::sqrt(c * shape.diagonal().maxCoeff()) == doctest::Approx(sigma).epsilon(0.2));
}

TEST_CASE("deformation is smoother than a raw impulse of equal displacement") {
  const int H = 20;
  const Trajectory xi = Trajectory::straight_line(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), H);
  for (int k = 0; k < H - 1; k += 3) {
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(H - 1, 1);
    lambda(k, 0) = 1.0;
    const Trajectory smooth = deform(xi, lambda, {0.1, true});
    const double disp = smooth.coords()(0, k + 1) - xi.coords()(0, k + 1);
    Trajectory raw = xi;
    raw.coords()(0, k + 1) += disp;
    CHECK(squared_second_differences(smooth) < squared_second_differences(raw));
  }
}

TEST_CASE("slice and splice") {
  Rng rng(8);
  const Trajectory xi = random_traj(10, 2, rng);
  CHECK(slice(xi, {0, 10}) == xi);
  CHECK(slice(xi, {3, 6}).size() == 4);
  const Trajectory snippet = random_traj(3, 2, rng);
  const Window w{3, 6};
  CHECK(slice(splice(xi, w, snippet), w) == snippet);
  CHECK(splice(xi, w, slice(xi, w)) == xi);
  CHECK_THROWS_AS(splice(xi, w, random_traj(4, 2, rng)), std::invalid_argument);
  CHECK_THROWS_AS(slice(xi, {3, 4}), std::invalid_argument);
  CHECK_THROWS_AS(slice(xi, {8, 11}), std::invalid_argument);
}

TEST_CASE("trajectory JSON round trip and validation") {
  Rng rng(9);
  const Trajectory xi = random_traj(7, 3, rng);
  const auto j = trajectory_to_json(xi);
  CHECK(j["horizon"] == 7);
  CHECK(j["states"].size() == 8);
  CHECK(trajectory_from_json(nlohmann::json::parse(j.dump())) == xi);

  CHECK_THROWS_AS(trajectory_from_json(nlohmann::json::parse(R"({"states": []})")), std::invalid_argument);
  CHECK_THROWS_AS(trajectory_from_json(nlohmann::json::parse(R"({"states": [[0,1],[0]]})")), std::invalid_argument);
  CHECK_THROWS_AS(trajectory_from_json(nlohmann::json::parse(R"({"horizon": 3, "states": [[0],[1]]})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(trajectory_from_json(nlohmann::json::parse(R"({"states": [[0],["x"]]})")), std::invalid_argument);
}

TEST_CASE("default sigma is a tenth of the bounding-box diagonal") {
  Eigen::VectorXd a(2), b(2);
  a << 0, 0;
  b << 3, 4;
  CHECK(default_sigma(Trajectory::straight_line(a, b, 5)) == doctest::Approx(0.5));
  CHECK(default_sigma(Trajectory::straight_line(a, a, 5)) == doctest::Approx(1e-3));
}
