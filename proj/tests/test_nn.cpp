#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "cca/adam.hpp"
#include "cca/mlp.hpp"
#include "cca/selftest.hpp"
#include "cca/squashed_gaussian.hpp"

using namespace cca;

TEST_CASE("mlp: zero weights give zero output", "[nn]") {
  RngStream rng(1);
  Mlp net = Mlp::make({3, 4, 2}, Activation::kRelu, rng);
  for (auto& w : net.w) w.setZero();
  for (auto& b : net.b) b.setZero();
  const Eigen::MatrixXd y = mlp_forward(net, Eigen::VectorXd::Constant(3, 1.7));
  REQUIRE(y.norm() == 0.0);
}

TEST_CASE("mlp: identity single layer passes input through", "[nn]") {
  RngStream rng(1);
  Mlp net = Mlp::make({3, 3}, Activation::kRelu, rng);
  net.w[0] = Eigen::MatrixXd::Identity(3, 3);
  net.b[0].setZero();
  Eigen::VectorXd x(3);
  x << -1.0, 0.5, 2.0;
  const Eigen::MatrixXd y = mlp_forward(net, x);
  REQUIRE((y.col(0) - x).norm() == 0.0);  // output layer is linear
}

TEST_CASE("mlp: forward is pure", "[nn]") {
  RngStream rng(2);
  Mlp net = Mlp::make({4, 8, 8, 3}, Activation::kTanh, rng);
  Eigen::VectorXd x(4);
  x << 0.3, -0.2, 1.0, 0.1;
  const Eigen::MatrixXd y1 = mlp_forward(net, x);
  const Eigen::MatrixXd y2 = mlp_forward(net, x);
  REQUIRE((y1 - y2).norm() == 0.0);
}

TEST_CASE("mlp: dimension mismatch throws", "[nn]") {
  RngStream rng(3);
  Mlp net = Mlp::make({4, 2}, Activation::kRelu, rng);
  REQUIRE_THROWS(mlp_forward(net, Eigen::VectorXd::Zero(3)));
  MlpCache empty;
  MlpGrads grads;
  REQUIRE_THROWS(mlp_backward(net, empty, Eigen::MatrixXd::Zero(2, 1), grads));
}

TEST_CASE("mlp: linear net weight gradient is the input outer product", "[nn]") {
  RngStream rng(4);
  Mlp net = Mlp::make({3, 1}, Activation::kRelu, rng);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  MlpCache cache;
  mlp_forward(net, x, &cache);
  MlpGrads grads;
  mlp_backward(net, cache, Eigen::MatrixXd::Ones(1, 1), grads);
  REQUIRE((grads.dw[0] - x.transpose()).norm() < 1e-15);
  REQUIRE(grads.db[0][0] == 1.0);
}

TEST_CASE("mlp: zero upstream gradient gives zero parameter gradients", "[nn]") {
  RngStream rng(5);
  Mlp net = Mlp::make({3, 6, 2}, Activation::kRelu, rng);
  MlpCache cache;
  mlp_forward(net, Eigen::VectorXd::Constant(3, 0.4), &cache);
  MlpGrads grads;
  mlp_backward(net, cache, Eigen::MatrixXd::Zero(2, 1), grads);
  REQUIRE(mlp_flatten_grads(grads).norm() == 0.0);
}

TEST_CASE("mlp: gradients match finite differences on random nets", "[nn][oracle]") {
  RngStream rng(6);
  for (Activation act : {Activation::kRelu, Activation::kTanh}) {
    for (int draw = 0; draw < 10; ++draw) {
      Mlp net = Mlp::make({3, 8, 8, 2}, act, rng);
      Eigen::VectorXd x(3);
      MlpCache cache;
      int attempts = 0;
      do {
        for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
        mlp_forward(net, x, &cache);
      } while (mlp_has_kink_near_zero(net, cache, 1e-3) && ++attempts < 200);
      Eigen::MatrixXd upstream(2, 1);
      upstream << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
      MlpGrads grads;
      mlp_backward(net, cache, upstream, grads);
      const Eigen::VectorXd analytic = mlp_flatten_grads(grads);
      Mlp probe = net;
      const auto f = [&](const Eigen::VectorXd& p) {
        mlp_unflatten(probe, p);
        return (upstream.transpose() * mlp_forward(probe, x))(0, 0);
      };
      const Eigen::VectorXd numeric = finite_difference_gradient(f, mlp_flatten(net));
      REQUIRE(relative_gradient_error(analytic, numeric) <= 1e-4);
    }
  }
}

TEST_CASE("mlp: batched forward/backward agrees with per-sample passes", "[nn]") {
  RngStream rng(7);
  Mlp net = Mlp::make({2, 5, 1}, Activation::kRelu, rng);
  Eigen::MatrixXd x(2, 3);
  x << 0.1, -0.4, 0.9, 0.7, 0.2, -0.3;
  MlpCache cache;
  const Eigen::MatrixXd y = mlp_forward(net, x, &cache);
  MlpGrads batched;
  mlp_backward(net, cache, Eigen::MatrixXd::Ones(1, 3), batched);

  MlpGrads accum = MlpGrads::zeros_like(net);
  for (int j = 0; j < 3; ++j) {
    MlpCache c;
    const Eigen::MatrixXd yj = mlp_forward(net, x.col(j), &c);
    REQUIRE((yj - y.col(j)).norm() < 1e-14);
    MlpGrads g;
    mlp_backward(net, c, Eigen::MatrixXd::Ones(1, 1), g);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      accum.dw[l] += g.dw[l];
      accum.db[l] += g.db[l];
    }
  }
  REQUIRE((mlp_flatten_grads(batched) - mlp_flatten_grads(accum)).norm() < 1e-12);
}

TEST_CASE("mlp: save/load round trip", "[nn]") {
  RngStream rng(8);
  Mlp net = Mlp::make({3, 6, 2}, Activation::kTanh, rng);
  std::stringstream ss;
  mlp_save(net, ss);
  const Mlp loaded = mlp_load(ss);
  REQUIRE(loaded.hidden == Activation::kTanh);
  REQUIRE((mlp_flatten(loaded) - mlp_flatten(net)).norm() == 0.0);
}

TEST_CASE("adam: first step closed form", "[nn]") {
  RngStream rng(9);
  Mlp net = Mlp::make({1, 1}, Activation::kRelu, rng);
  net.w[0](0, 0) = 0.5;
  net.b[0][0] = 0.0;
  AdamState opt = AdamState::for_net(net, 0.01);
  MlpGrads g = MlpGrads::zeros_like(net);
  g.dw[0](0, 0) = 3.0;
  opt.apply(net, g);
  // bias-corrected first step: -lr * g / (|g| + eps)
  REQUIRE(net.w[0](0, 0) == Catch::Approx(0.5 - 0.01 * 3.0 / (3.0 + 1e-8)).epsilon(1e-12));
  REQUIRE(net.b[0][0] == 0.0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged", "[nn]") {
  RngStream rng(10);
  Mlp net = Mlp::make({2, 4, 1}, Activation::kRelu, rng);
  const Eigen::VectorXd before = mlp_flatten(net);
  AdamState opt = AdamState::for_net(net, 0.1);
  MlpGrads g = MlpGrads::zeros_like(net);
  for (int i = 0; i < 10; ++i) opt.apply(net, g);
  REQUIRE((mlp_flatten(net) - before).norm() == 0.0);
}

TEST_CASE("adam: identical runs give identical parameter trajectories", "[nn]") {
  auto run = []() {
    RngStream rng(11);
    Mlp net = Mlp::make({2, 4, 1}, Activation::kRelu, rng);
    AdamState opt = AdamState::for_net(net, 0.05);
    RngStream grad_rng(12);
    for (int i = 0; i < 20; ++i) {
      MlpGrads g = MlpGrads::zeros_like(net);
      for (auto& m : g.dw) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
          for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = grad_rng.normal();
        }
      }
      opt.apply(net, g);
    }
    return mlp_flatten(net);
  };
  REQUIRE((run() - run()).norm() == 0.0);
}

TEST_CASE("squashed head: log-prob at the center of a [-1,1] box", "[nn]") {
  BoxBounds box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  const auto s = squashed_sample(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
                                 box, Eigen::MatrixXd::Zero(1, 1));
  REQUIRE(s.action(0, 0) == 0.0);
  REQUIRE(s.log_prob[0] == Catch::Approx(-0.9189385332046727).epsilon(1e-10));
}

TEST_CASE("squashed head: deterministic mode squashes the mean into the box", "[nn]") {
  BoxBounds box{Eigen::VectorXd::Constant(2, -2.0), Eigen::VectorXd::Constant(2, 4.0)};
  Eigen::MatrixXd mean(2, 1);
  mean << 0.7, -1.3;
  const auto s = squashed_mode(mean, Eigen::MatrixXd::Zero(2, 1), box);
  for (int i = 0; i < 2; ++i) {
    const double expect = -2.0 + 6.0 * (std::tanh(mean(i, 0)) + 1.0) / 2.0;
    REQUIRE(s.action(i, 0) == Catch::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("squashed head: samples stay strictly inside the box", "[nn]") {
  RngStream rng(13);
  BoxBounds box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  for (int i = 0; i < 2000; ++i) {
    Eigen::MatrixXd mean(1, 1), log_std(1, 1);
    mean << rng.uniform(-3.0, 3.0);
    log_std << rng.uniform(-2.0, 1.0);
    const auto s = squashed_sample(mean, log_std, box, rng);
    REQUIRE(s.action(0, 0) > -1.0);
    REQUIRE(s.action(0, 0) < 1.0);
  }
}

TEST_CASE("squashed head: stable tanh correction", "[nn]") {
  for (double u = -5.0; u <= 5.0; u += 0.25) {
    const double naive = std::log(1.0 - std::tanh(u) * std::tanh(u));
    REQUIRE(log_one_minus_tanh_sq(u) == Catch::Approx(naive).margin(1e-10));
  }
  REQUIRE(std::isfinite(log_one_minus_tanh_sq(50.0)));
  REQUIRE(std::isfinite(log_one_minus_tanh_sq(-50.0)));
  REQUIRE(log_one_minus_tanh_sq(50.0) == Catch::Approx(2.0 * std::log(2.0) - 100.0).epsilon(1e-12));
}

TEST_CASE("squashed head: gradients match finite differences", "[nn][oracle]") {
  RngStream rng(14);
  BoxBounds box{Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0)};
  for (int draw = 0; draw < 25; ++draw) {
    Eigen::MatrixXd mean(2, 1), log_std(2, 1), noise(2, 1);
    for (int i = 0; i < 2; ++i) {
      mean(i, 0) = rng.uniform(-1.0, 1.0);
      log_std(i, 0) = rng.uniform(-1.5, 0.5);
      noise(i, 0) = rng.normal();
    }
    Eigen::VectorXd c_action(2);
    c_action << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    const double c_logp = rng.uniform(-1.0, 1.0);

    // scalar objective: c_action . action + c_logp * log_prob, noise fixed
    const auto objective = [&](const Eigen::VectorXd& p) {
      Eigen::MatrixXd m(2, 1), ls(2, 1);
      m << p[0], p[1];
      ls << p[2], p[3];
      const auto s = squashed_sample(m, ls, box, noise);
      return c_action.dot(s.action.col(0)) + c_logp * s.log_prob[0];
    };
    Eigen::VectorXd at(4);
    at << mean(0, 0), mean(1, 0), log_std(0, 0), log_std(1, 0);
    const Eigen::VectorXd numeric = finite_difference_gradient(objective, at);

    const auto s = squashed_sample(mean, log_std, box, noise);
    Eigen::MatrixXd d_mean, d_log_std;
    squashed_backward(s, mean, log_std, box, c_action,
                      Eigen::RowVectorXd::Constant(1, c_logp), d_mean, d_log_std);
    Eigen::VectorXd analytic(4);
    analytic << d_mean(0, 0), d_mean(1, 0), d_log_std(0, 0), d_log_std(1, 0);
    REQUIRE(relative_gradient_error(analytic, numeric) <= 1e-4);
  }
}
