#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cca/types.hpp"

namespace cca {

// Empirical state distribution with exponential forgetting:
//   probs <- (1-eta)*probs + eta*indicator(s).
// Stays on the simplex for any eta in [0,1].
class LeakyCountModel {
 public:
  LeakyCountModel(Eigen::VectorXd probs, double eta)
      : probs_(std::move(probs)), eta_(eta) {}

  static LeakyCountModel uniform(int num_states, double eta) {
    return LeakyCountModel(
        Eigen::VectorXd::Constant(num_states, 1.0 / num_states), eta);
  }

  // s is a 1-based state label.
  void update(DiscreteState s) {
    probs_ *= (1.0 - eta_);
    probs_[s - 1] += eta_;
  }

  // log of the stored mass, floored at log(1e-8) so unvisited states stay finite.
  double log_density(DiscreteState s) const {
    return std::log(std::max(probs_[s - 1], 1e-8));
  }

  double entropy() const {
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
      if (probs_[i] > 0.0) h -= probs_[i] * std::log(probs_[i]);
    }
    return h;
  }

  const Eigen::VectorXd& probs() const { return probs_; }
  double eta() const { return eta_; }

 private:
  Eigen::VectorXd probs_;
  double eta_;
};

// Constant log-prior over states: -log|S| in the discrete case, -log(volume)
// over a box in the continuous case.
struct UniformPrior {
  double log_value;

  static UniformPrior over_states(int num_states) {
    return {-std::log(static_cast<double>(num_states))};
  }
  static UniformPrior over_box(const Eigen::VectorXd& low,
                               const Eigen::VectorXd& high) {
    double log_vol = 0.0;
    for (Eigen::Index i = 0; i < low.size(); ++i) {
      log_vol += std::log(high[i] - low[i]);
    }
    return {-log_vol};
  }
};

struct ExactOccupancy {
  Eigen::VectorXd rho;
};

namespace detail {

inline void check_stochastic(const Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (std::abs(m.row(r).sum() - 1.0) > 1e-9 || m.row(r).minCoeff() < -1e-12) {
      throw std::invalid_argument(std::string(what) + " is not row-stochastic");
    }
  }
}

// Policy-averaged transition matrix M(s,s') = sum_a pi(s,a) P[a](s,s').
inline Eigen::MatrixXd policy_transition_matrix(
    const std::vector<Eigen::MatrixXd>& transitions, const Eigen::MatrixXd& policy) {
  const Eigen::Index n = policy.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t a = 0; a < transitions.size(); ++a) {
    m += policy.col(static_cast<Eigen::Index>(a)).asDiagonal() * transitions[a];
  }
  return m;
}

// Solves (I - gamma*M^T) rho = (1-gamma) seed; unique for gamma < 1.
inline Eigen::VectorXd solve_occupancy(const Eigen::MatrixXd& m, double gamma,
                                       const Eigen::VectorXd& seed) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - gamma * m.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  return lu.solve((1.0 - gamma) * seed);
}

}  // namespace detail

// Discounted (gamma-absorbing) state occupancy of the MDP under the given
// policy, seeded from the initial distribution:
//   rho(s) = (1-gamma) p0(s) + gamma sum_{s',a'} p(s|s',a') pi(a'|s') rho(s').
// transitions[a](s, s') = p(s'|s, a); policy(s, a) = pi(a|s); everything
// 0-indexed here.
inline ExactOccupancy exact_occupancy(const std::vector<Eigen::MatrixXd>& transitions,
                                      const Eigen::MatrixXd& policy, double gamma,
                                      const Eigen::VectorXd& p0) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("exact_occupancy: gamma must be in [0,1)");
  }
  for (const auto& p : transitions) detail::check_stochastic(p, "transition tensor");
  detail::check_stochastic(policy, "policy");
  if (std::abs(p0.sum() - 1.0) > 1e-9 || p0.minCoeff() < -1e-12) {
    throw std::invalid_argument("exact_occupancy: p0 is not a distribution");
  }
  const Eigen::MatrixXd m = detail::policy_transition_matrix(transitions, policy);
  return {detail::solve_occupancy(m, gamma, p0)};
}

// Same solve seeded from the one-step distribution p(.|s,a): the occupancy of
// the states that follow (s, a). s is 0-indexed here.
inline ExactOccupancy exact_conditional_occupancy(
    const std::vector<Eigen::MatrixXd>& transitions, const Eigen::MatrixXd& policy,
    double gamma, Eigen::Index s, Eigen::Index a) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("exact_conditional_occupancy: gamma must be in [0,1)");
  }
  for (const auto& p : transitions) detail::check_stochastic(p, "transition tensor");
  detail::check_stochastic(policy, "policy");
  const Eigen::MatrixXd m = detail::policy_transition_matrix(transitions, policy);
  const Eigen::VectorXd seed = transitions[a].row(s).transpose();
  return {detail::solve_occupancy(m, gamma, seed)};
}

// Single-sample estimator of the total discounted return from one state's
// reward: r / (1 - gamma).
inline double return_estimator(double r, double gamma) {
  if (!(gamma < 1.0)) throw std::invalid_argument("return_estimator: gamma must be < 1");
  return r / (1.0 - gamma);
}

}  // namespace cca
