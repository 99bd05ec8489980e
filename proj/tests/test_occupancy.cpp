#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cca/occupancy.hpp"
#include "cca/selftest.hpp"
#include "cca/two_rooms.hpp"

using namespace cca;

TEST_CASE("leaky model: single update arithmetic", "[occupancy]") {
  auto m = LeakyCountModel::uniform(18, 0.005);
  m.update(5);
  REQUIRE(m.probs()[4] == Catch::Approx(0.995 / 18.0 + 0.005).epsilon(1e-12));
  for (int s = 1; s <= 18; ++s) {
    if (s == 5) continue;
    REQUIRE(m.probs()[s - 1] == Catch::Approx(0.995 / 18.0).epsilon(1e-12));
  }
  REQUIRE(m.log_density(5) == Catch::Approx(std::log(0.995 / 18.0 + 0.005)).epsilon(1e-12));
}

TEST_CASE("leaky model: eta = 0 leaves the model unchanged", "[occupancy]") {
  auto m = LeakyCountModel(Eigen::VectorXd::Constant(4, 0.25), 0.0);
  m.update(2);
  for (int i = 0; i < 4; ++i) REQUIRE(m.probs()[i] == 0.25);
}

TEST_CASE("leaky model: repeated observation converges to a point mass", "[occupancy]") {
  auto m = LeakyCountModel::uniform(18, 0.05);
  for (int k = 0; k < 2000; ++k) m.update(5);
  REQUIRE(m.probs()[4] > 1.0 - 1e-12);
}

TEST_CASE("leaky model: simplex preserved for random inputs", "[occupancy]") {
  RngStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(20));
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = -std::log(1.0 - rng.uniform());
    p /= p.sum();
    LeakyCountModel m(p, rng.uniform(0.0, 1.0) * 0.99 + 0.001);
    m.update(1 + static_cast<int>(rng.uniform_int(n)));
    REQUIRE(m.probs().sum() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(m.probs().minCoeff() >= 0.0);
  }
}

TEST_CASE("leaky model: log density floored for vanished mass", "[occupancy]") {
  Eigen::VectorXd p(3);
  p << 1.0, 0.0, 0.0;
  LeakyCountModel m(p, 0.005);
  REQUIRE(m.log_density(2) == Catch::Approx(std::log(1e-8)));
  REQUIRE(std::isfinite(m.log_density(2)));
}

TEST_CASE("uniform prior values", "[occupancy]") {
  REQUIRE(UniformPrior::over_states(18).log_value ==
          Catch::Approx(-2.8903717578961645).epsilon(1e-12));
  Eigen::VectorXd lo(2), hi(2);
  lo << -1.2, -0.07;
  hi << 0.6, 0.07;
  REQUIRE(UniformPrior::over_box(lo, hi).log_value ==
          Catch::Approx(-std::log(1.8 * 0.14)).epsilon(1e-12));
}

TEST_CASE("exact occupancy: absorbing single state", "[occupancy]") {
  std::vector<Eigen::MatrixXd> p{Eigen::MatrixXd::Ones(1, 1)};
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Ones(1, 1);
  const Eigen::VectorXd p0 = Eigen::VectorXd::Ones(1);
  const auto occ = exact_occupancy(p, pi, 0.9, p0);
  REQUIRE(occ.rho[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("exact occupancy: two-state chain solved by hand", "[occupancy]") {
  // s0 -> s1 deterministically, s1 absorbing, start at s0: rho = [1-g, g]
  std::vector<Eigen::MatrixXd> p{(Eigen::MatrixXd(2, 2) << 0, 1, 0, 1).finished()};
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Ones(2, 1);
  Eigen::VectorXd p0(2);
  p0 << 1.0, 0.0;
  for (double gamma : {0.5, 0.9, 0.99}) {
    const auto occ = exact_occupancy(p, pi, gamma, p0);
    REQUIRE(occ.rho[0] == Catch::Approx(1.0 - gamma).margin(1e-12));
    REQUIRE(occ.rho[1] == Catch::Approx(gamma).margin(1e-12));
  }
}

TEST_CASE("exact occupancy: fixed-point residual and normalization", "[occupancy]") {
  RngStream rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomMdp mdp = make_random_mdp(5, 3, rng);
    const double gamma = 0.95;
    const auto occ = exact_occupancy(mdp.transitions, mdp.policy, gamma, mdp.p0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
    for (int a = 0; a < 3; ++a) {
      m += mdp.policy.col(a).asDiagonal() * mdp.transitions[a];
    }
    const Eigen::VectorXd residual =
        occ.rho - ((1.0 - gamma) * mdp.p0 + gamma * m.transpose() * occ.rho);
    REQUIRE(residual.lpNorm<Eigen::Infinity>() < 1e-10);
    REQUIRE(occ.rho.sum() == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("exact occupancy: rejects bad inputs", "[occupancy]") {
  std::vector<Eigen::MatrixXd> p{(Eigen::MatrixXd(2, 2) << 0.5, 0.4, 0, 1).finished()};
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Ones(2, 1);
  Eigen::VectorXd p0(2);
  p0 << 1.0, 0.0;
  REQUIRE_THROWS_AS(exact_occupancy(p, pi, 0.9, p0), std::invalid_argument);
  std::vector<Eigen::MatrixXd> good{(Eigen::MatrixXd(2, 2) << 0, 1, 0, 1).finished()};
  REQUIRE_THROWS_AS(exact_occupancy(good, pi, 1.0, p0), std::invalid_argument);
}

TEST_CASE("conditional occupancy: deterministic chain", "[occupancy]") {
  // condition on (s0, a): lands in s1 which absorbs -> rho = [0, 1]
  std::vector<Eigen::MatrixXd> p{(Eigen::MatrixXd(2, 2) << 0, 1, 0, 1).finished()};
  const Eigen::MatrixXd pi = Eigen::MatrixXd::Ones(2, 1);
  const auto occ = exact_conditional_occupancy(p, pi, 0.9, 0, 0);
  REQUIRE(occ.rho[0] == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(occ.rho[1] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("conditional occupancy: equals plain occupancy when p(.|s,a) = p0",
          "[occupancy]") {
  RngStream rng(7);
  const RandomMdp mdp = make_random_mdp(4, 2, rng);
  const double gamma = 0.9;
  // build p0 equal to the one-step distribution of (s=1, a=0)
  const Eigen::VectorXd p0 = mdp.transitions[0].row(1).transpose();
  const auto a = exact_occupancy(mdp.transitions, mdp.policy, gamma, p0);
  const auto b = exact_conditional_occupancy(mdp.transitions, mdp.policy, gamma, 1, 0);
  REQUIRE((a.rho - b.rho).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("occupancy: matches Monte-Carlo simulation on random MDPs", "[occupancy][oracle]") {
  RngStream rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const int ns = 2 + static_cast<int>(rng.uniform_int(5));
    const int na = 1 + static_cast<int>(rng.uniform_int(3));
    const RandomMdp mdp = make_random_mdp(ns, na, rng);
    const double gamma = 0.9;
    const auto occ = exact_occupancy(mdp.transitions, mdp.policy, gamma, mdp.p0);
    const Eigen::VectorXd mc = monte_carlo_occupancy(mdp, gamma, mdp.p0, 400000, rng);
    REQUIRE(total_variation(occ.rho, mc) < 0.012);
  }
}

TEST_CASE("occupancy: two-rooms uniform policy vs Monte-Carlo", "[occupancy][oracle]") {
  // Build the exact grid MDP from the environment's transition function.
  const int ns = TwoRoomsEnv::kNumStates;
  const int na = TwoRoomsEnv::kNumActions;
  RandomMdp mdp;
  mdp.num_states = ns;
  mdp.num_actions = na;
  for (int a = 0; a < na; ++a) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(ns, ns);
    for (int s = 1; s <= ns; ++s) p(s - 1, TwoRoomsEnv::transition(s, a) - 1) = 1.0;
    mdp.transitions.push_back(std::move(p));
  }
  mdp.policy = Eigen::MatrixXd::Constant(ns, na, 0.25);
  mdp.p0 = Eigen::VectorXd::Zero(ns);
  mdp.p0[0] = 1.0;
  mdp.rewards = Eigen::MatrixXd::Zero(ns, na);

  const double gamma = 0.99;
  const auto occ = exact_occupancy(mdp.transitions, mdp.policy, gamma, mdp.p0);
  RngStream rng(5);
  const Eigen::VectorXd mc = monte_carlo_occupancy(mdp, gamma, mdp.p0, 1000000, rng);
  REQUIRE(total_variation(occ.rho, mc) < 0.01);

  // conditional version from (s=1, a=E)
  const auto cond = exact_conditional_occupancy(mdp.transitions, mdp.policy, gamma, 0,
                                                TwoRoomsEnv::kEast);
  const Eigen::VectorXd seed = mdp.transitions[TwoRoomsEnv::kEast].row(0).transpose();
  const Eigen::VectorXd mc_cond = monte_carlo_occupancy(mdp, gamma, seed, 1000000, rng);
  REQUIRE(total_variation(cond.rho, mc_cond) < 0.01);
}

TEST_CASE("return estimator", "[occupancy]") {
  REQUIRE(return_estimator(1.0, 0.99) == Catch::Approx(100.0).epsilon(1e-12));
  REQUIRE(return_estimator(0.0, 0.5) == 0.0);
  REQUIRE(return_estimator(-0.025, 0.99) == Catch::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("return chain: conditional occupancy reproduces policy evaluation",
          "[occupancy][oracle]") {
  RngStream rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int ns = 2 + static_cast<int>(rng.uniform_int(5));
    const int na = 1 + static_cast<int>(rng.uniform_int(3));
    const RandomMdp mdp = make_random_mdp(ns, na, rng);
    const double gammas[3] = {0.5, 0.9, 0.99};
    const double gamma = gammas[rng.uniform_int(3)];
    const int s = static_cast<int>(rng.uniform_int(ns));
    const int a = static_cast<int>(rng.uniform_int(na));
    const auto cond =
        exact_conditional_occupancy(mdp.transitions, mdp.policy, gamma, s, a);
    Eigen::VectorXd rbar(ns);
    for (int x = 0; x < ns; ++x) rbar[x] = mdp.policy.row(x).dot(mdp.rewards.row(x));
    double chain = 0.0;
    for (int x = 0; x < ns; ++x) chain += cond.rho[x] * return_estimator(rbar[x], gamma);
    REQUIRE(chain == Catch::Approx(policy_evaluation_q(mdp, gamma, s, a)).margin(1e-8));
  }
}
