#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "cca/kde.hpp"
#include "cca/mlp.hpp"
#include "cca/occupancy.hpp"
#include "cca/replay_buffer.hpp"
#include "cca/rng.hpp"
#include "cca/squashed_gaussian.hpp"
#include "cca/tabular.hpp"
#include "cca/two_rooms.hpp"

// Independent oracles for the linear-solve, gradient and density code paths.
// Everything here recomputes its answer by a different route (simulation,
// finite differences, quadrature) and never calls the implementation it is
// checking.

namespace cca {

struct RandomMdp {
  std::vector<Eigen::MatrixXd> transitions;  // [a](s, s') row-stochastic
  Eigen::MatrixXd policy;                    // (s, a) row-stochastic
  Eigen::VectorXd p0;
  Eigen::MatrixXd rewards;  // r(s, a)
  int num_states = 0;
  int num_actions = 0;
};

inline RandomMdp make_random_mdp(int num_states, int num_actions, RngStream& rng) {
  auto random_simplex = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
    return (v / v.sum()).eval();
  };
  RandomMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  for (int a = 0; a < num_actions; ++a) {
    Eigen::MatrixXd p(num_states, num_states);
    for (int s = 0; s < num_states; ++s) p.row(s) = random_simplex(num_states).transpose();
    mdp.transitions.push_back(std::move(p));
  }
  mdp.policy.resize(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    mdp.policy.row(s) = random_simplex(num_actions).transpose();
  }
  mdp.p0 = random_simplex(num_states);
  mdp.rewards.resize(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) mdp.rewards(s, a) = rng.uniform(-1.0, 1.0);
  }
  return mdp;
}

inline int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

// Monte-Carlo estimate of the gamma-absorbing occupancy: each sample walks
// the chain and, with probability (1-gamma) per step, records where it
// stopped. This is the direct simulation of the discounted visit frequency.
inline Eigen::VectorXd monte_carlo_occupancy(const RandomMdp& mdp, double gamma,
                                             const Eigen::VectorXd& seed_dist,
                                             long num_samples, RngStream& rng) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(mdp.num_states);
  for (long i = 0; i < num_samples; ++i) {
    int s = sample_categorical(seed_dist, rng);
    while (rng.uniform() < gamma) {
      const int a = sample_categorical(mdp.policy.row(s).transpose(), rng);
      s = sample_categorical(mdp.transitions[a].row(s).transpose(), rng);
    }
    counts[s] += 1.0;
  }
  return counts / counts.sum();
}

inline double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

// Policy evaluation by linear solve, with rewards credited on arrival:
//   Q(s,a) = sum_x p(x|s,a) [ rbar(x) + gamma V(x) ],  V = (I - gamma M)^-1 M rbar,
// where rbar(x) = sum_a pi(a|x) r(x,a). This matches the estimator chain
// E_{s'~cond. occupancy}[rbar(s')/(1-gamma)] and shares no code with the
// occupancy solver (different linear system).
inline double policy_evaluation_q(const RandomMdp& mdp, double gamma, int s, int a) {
  const int n = mdp.num_states;
  Eigen::VectorXd rbar(n);
  for (int x = 0; x < n; ++x) {
    rbar[x] = mdp.policy.row(x).dot(mdp.rewards.row(x));
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int aa = 0; aa < mdp.num_actions; ++aa) {
    m += mdp.policy.col(aa).asDiagonal() * mdp.transitions[aa];
  }
  const Eigen::VectorXd v =
      (Eigen::MatrixXd::Identity(n, n) - gamma * m).partialPivLu().solve(m * rbar);
  return mdp.transitions[a].row(s).dot((rbar + gamma * v));
}

// Central finite differences of a scalar function of the flattened
// parameters.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& at,
    double h = 1e-5) {
  Eigen::VectorXd grad(at.size());
  Eigen::VectorXd x = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double relative_gradient_error(const Eigen::VectorXd& analytic,
                                      const Eigen::VectorXd& numeric) {
  const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / denom;
}

// Grid integration of exp(log_density) over a box covering the centers plus a
// wide tail margin; midpoint rule.
inline double kde_grid_integral(const GaussianKde& kde, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, int points_per_dim) {
  const int d = static_cast<int>(lo.size());
  double cell = 1.0;
  std::vector<double> step(d);
  for (int j = 0; j < d; ++j) {
    step[j] = (hi[j] - lo[j]) / points_per_dim;
    cell *= step[j];
  }
  long total = 1;
  for (int j = 0; j < d; ++j) total *= points_per_dim;
  double sum = 0.0;
  const long chunk = 8192;
  Eigen::MatrixXd queries(chunk, d);
  long filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    const Eigen::VectorXd ld = kde.log_density_batch(queries.topRows(filled));
    sum += ld.array().exp().sum();
    filled = 0;
  };
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int j = 0; j < d; ++j) {
      const long q = rem % points_per_dim;
      rem /= points_per_dim;
      queries(filled, j) = lo[j] + (q + 0.5) * step[j];
    }
    if (++filled == chunk) flush();
  }
  flush();
  return sum * cell;
}

// Redraws any configuration whose hidden pre-activations sit within `margin`
// of a relu kink; finite differences are only a valid oracle away from the
// non-differentiable points.
inline bool mlp_has_kink_near_zero(const Mlp& net, const MlpCache& cache,
                                   double margin) {
  if (net.hidden != Activation::kRelu) return false;
  for (std::size_t l = 0; l + 1 < net.num_layers(); ++l) {
    if ((cache.pre[l].array().abs() < margin).any()) return true;
  }
  return false;
}

// ---- smoke battery behind the CLI ----

struct SelftestResult {
  int passed = 0;
  int failed = 0;
};

inline void report_check(SelftestResult& r, const std::string& name, bool ok,
                         std::ostream& os) {
  os << (ok ? "PASS " : "FAIL ") << name << "\n";
  if (ok) {
    ++r.passed;
  } else {
    ++r.failed;
  }
}

inline SelftestResult run_selftest(std::ostream& os) {
  SelftestResult result;
  RngStream rng(20250809);

  {  // exact occupancy vs simulation, and the return-estimator chain
    bool tv_ok = true, chain_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const int ns = 2 + static_cast<int>(rng.uniform_int(5));
      const int na = 1 + static_cast<int>(rng.uniform_int(3));
      const double gammas[3] = {0.5, 0.9, 0.99};
      const double gamma = gammas[rng.uniform_int(3)];
      const RandomMdp mdp = make_random_mdp(ns, na, rng);
      const Eigen::VectorXd rho =
          exact_occupancy(mdp.transitions, mdp.policy, gamma, mdp.p0).rho;
      const Eigen::VectorXd mc =
          monte_carlo_occupancy(mdp, gamma, mdp.p0, 1000000, rng);
      if (total_variation(rho, mc) > 0.01) tv_ok = false;
      const int s = static_cast<int>(rng.uniform_int(ns));
      const int a = static_cast<int>(rng.uniform_int(na));
      const Eigen::VectorXd cond =
          exact_conditional_occupancy(mdp.transitions, mdp.policy, gamma, s, a).rho;
      Eigen::VectorXd rbar(ns);
      for (int x = 0; x < ns; ++x) rbar[x] = mdp.policy.row(x).dot(mdp.rewards.row(x));
      double chain = 0.0;
      for (int x = 0; x < ns; ++x) chain += cond[x] * return_estimator(rbar[x], gamma);
      if (std::abs(chain - policy_evaluation_q(mdp, gamma, s, a)) > 1e-8) {
        chain_ok = false;
      }
    }
    report_check(result, "occupancy solve matches 1e6-sample simulation (TV < 0.01)",
                 tv_ok, os);
    report_check(result, "conditional-occupancy return chain matches policy evaluation",
                 chain_ok, os);
  }

  {  // reverse-mode gradients vs finite differences
    bool ok = true;
    for (int draw = 0; draw < 20 && ok; ++draw) {
      Mlp net = Mlp::make({3, 8, 8, 1}, Activation::kRelu, rng);
      Eigen::VectorXd x(3);
      MlpCache cache;
      int attempts = 0;
      do {
        for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
        mlp_forward(net, x, &cache);
      } while (mlp_has_kink_near_zero(net, cache, 1e-3) && ++attempts < 100);
      MlpGrads grads;
      mlp_backward(net, cache, Eigen::MatrixXd::Ones(1, 1), grads);
      const Eigen::VectorXd analytic = mlp_flatten_grads(grads);
      Mlp probe = net;
      const auto f = [&](const Eigen::VectorXd& p) {
        mlp_unflatten(probe, p);
        return mlp_forward(probe, x)(0, 0);
      };
      const Eigen::VectorXd numeric = finite_difference_gradient(f, mlp_flatten(net));
      if (relative_gradient_error(analytic, numeric) > 1e-4) ok = false;
    }
    report_check(result, "mlp gradients match central finite differences (<= 1e-4)",
                 ok, os);
  }

  {  // KDE normalization by grid quadrature
    bool ok = true;
    for (int d = 1; d <= 2 && ok; ++d) {
      std::vector<ContinuousState> pts;
      for (int i = 0; i < 500; ++i) {
        Eigen::VectorXd p(d);
        for (int j = 0; j < d; ++j) p[j] = rng.normal(0.0, 2.0);
        pts.push_back(p);
      }
      const GaussianKde kde = GaussianKde::fit(pts);
      Eigen::VectorXd lo(d), hi(d);
      for (int j = 0; j < d; ++j) {
        lo[j] = kde.shift()[j] - 10.0 * kde.scale()[j];
        hi[j] = kde.shift()[j] + 10.0 * kde.scale()[j];
      }
      const double z = kde_grid_integral(kde, lo, hi, d == 1 ? 4000 : 400);
      if (std::abs(z - 1.0) > 1e-2) ok = false;
    }
    report_check(result, "kde density integrates to 1 +/- 1e-2 (d=1, d=2)", ok, os);
  }

  {  // replay sampling uniformity, chi-squared over 1e5 draws, p > 0.01
    ReplayBuffer<int, int> buffer(100);
    for (int i = 0; i < 100; ++i) buffer.push({i, 0, 0.0, i, false});
    std::vector<long> counts(100, 0);
    const long draws = 100000;
    for (long i = 0; i < draws / 100; ++i) {
      for (const auto& t : buffer.sample_batch(100, rng)) ++counts[t.s];
    }
    const double expected = static_cast<double>(draws) / 100.0;
    double stat = 0.0;
    for (long c : counts) {
      stat += (c - expected) * (c - expected) / expected;
    }
    // 0.99 quantile of chi-squared with 99 dof
    report_check(result, "replay batch sampling is uniform (chi-squared, p > 0.01)",
                 stat < 134.64161685578915, os);
  }

  {  // determinism of a seeded discrete run
    const Hyperparams hp = [] {
      Hyperparams h;
      h.alpha = 0.3;
      h.beta = 1.0;
      h.lambda = 0.0;
      h.eta = 0.005;
      return h;
    }();
    TwoRoomsEnv env1, env2;
    RngStream r1(7), r2(7);
    const auto rec1 = run_discrete_experiment(env1, DiscreteMethod::kCca, hp, 200, r1);
    const auto rec2 = run_discrete_experiment(env2, DiscreteMethod::kCca, hp, 200, r2);
    bool same = rec1.size() == rec2.size();
    for (std::size_t i = 0; same && i < rec1.size(); ++i) {
      same = rec1[i].final_state == rec2[i].final_state &&
             rec1[i].cumulative_reward == rec2[i].cumulative_reward &&
             rec1[i].occupancy_entropy == rec2[i].occupancy_entropy;
    }
    report_check(result, "identical seeds reproduce identical discrete runs", same, os);
  }

  return result;
}

}  // namespace cca
