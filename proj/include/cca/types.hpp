#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cca {

// Discrete states are 1-based labels (1..|S|), matching the grid-world cell
// numbering; continuous states are fixed-dimension real vectors.
using DiscreteState = int;
using ContinuousState = Eigen::VectorXd;

template <class S, class A>
struct Transition {
  S s;
  A a;
  double r = 0.0;
  S s_next;
  bool done = false;
};

template <class S, class A>
using Trajectory = std::vector<Transition<S, A>>;

namespace detail {
inline bool states_equal(int a, int b) { return a == b; }
inline bool states_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && a == b;
}
}  // namespace detail

// Chain consistency: each transition starts where the previous one ended.
template <class S, class A>
bool chain_consistent(const Trajectory<S, A>& tau) {
  for (std::size_t i = 0; i + 1 < tau.size(); ++i) {
    if (!detail::states_equal(tau[i].s_next, tau[i + 1].s)) return false;
  }
  return true;
}

// Every knob a run can turn, with the defaults used when a config omits them.
// Tabular fields: alpha, beta, gamma, lambda, eta, epsilon.
// Actor-critic extras: learning rate, batch/buffer sizes, polyak coefficient,
// network shape, KDE settings, warm-up and update cadence.
struct Hyperparams {
  double alpha = 0.1;    // tabular learning rate
  double beta = 1.0;     // inverse temperature
  double gamma = 0.99;   // discount, must stay < 1
  double lambda = 0.0;   // precision weight on the reward-likelihood term
  double eta = 0.005;    // occupancy leak rate
  double epsilon = 0.1;  // epsilon-greedy exploration rate

  double lr = 3e-4;
  int batch_size = 256;
  std::size_t buffer_capacity = 1000000;
  double polyak = 0.995;
  int hidden_layers = 2;
  int hidden_width = 32;
  double kde_bandwidth = 0.0;  // 0 selects Scott's rule
  int kde_samples = 1000;
  int updates_per_epoch = 0;  // 0 = one update per env step since last epoch
  long warmup_steps = 10000;
  bool elbo_sign_paper = false;  // verbatim ELBO target sign (default negated)

  void validate() const {
    auto fail = [](const std::string& msg) {
      throw std::invalid_argument("hyperparams: " + msg);
    };
    if (!(alpha > 0.0)) fail("alpha must be > 0");
    if (!(beta > 0.0)) fail("beta must be > 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be < 1");
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(eta > 0.0 && eta < 1.0)) fail("eta must be in (0,1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must be in [0,1]");
    if (!(lr >= 0.0)) fail("lr must be >= 0");
    if (batch_size <= 0) fail("batch_size must be > 0");
    if (buffer_capacity == 0) fail("buffer_capacity must be > 0");
    if (!(polyak >= 0.0 && polyak < 1.0)) fail("polyak must be in [0,1)");
    if (hidden_layers <= 0) fail("hidden_layers must be > 0");
    if (hidden_width <= 0) fail("hidden_width must be > 0");
    if (kde_bandwidth < 0.0) fail("kde_bandwidth must be >= 0");
    if (kde_samples < 2) fail("kde_samples must be >= 2");
    if (updates_per_epoch < 0) fail("updates_per_epoch must be >= 0");
    if (warmup_steps < 0) fail("warmup_steps must be >= 0");
  }
};

}  // namespace cca
