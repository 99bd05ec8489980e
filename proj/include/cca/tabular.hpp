#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cca/occupancy.hpp"
#include "cca/rng.hpp"
#include "cca/two_rooms.hpp"
#include "cca/types.hpp"

namespace cca {

// The three look-up tables of the discrete learner: Q holds the policy
// logits, Q_R the Monte-Carlo return estimate, Q_S the occupancy-entropy
// estimate. Rows are states (1-based labels, row s-1), columns actions.
struct QTables {
  Eigen::MatrixXd q, q_r, q_s;

  static QTables zeros(int num_states, int num_actions) {
    return {Eigen::MatrixXd::Zero(num_states, num_actions),
            Eigen::MatrixXd::Zero(num_states, num_actions),
            Eigen::MatrixXd::Zero(num_states, num_actions)};
  }
};

// pi(a|s) proportional to exp(beta * q[a]), max-shifted for stability.
// Accepts row or column expressions; returns a column vector.
template <class Derived>
Eigen::VectorXd softmax_policy(const Eigen::MatrixBase<Derived>& q_row, double beta) {
  Eigen::ArrayXd values(q_row.size());
  for (Eigen::Index i = 0; i < q_row.size(); ++i) values[i] = q_row(i);
  const Eigen::ArrayXd weights = (beta * (values - values.maxCoeff())).exp();
  return (weights / weights.sum()).matrix();
}

// Per-sample ELBO from the current table entries:
//   -(lambda/2) (Q - Q_R)^2 + Q_S.
inline double elbo_sample(const QTables& tables, DiscreteState s, int a,
                          double lambda) {
  const double diff = tables.q(s - 1, a) - tables.q_r(s - 1, a);
  return -0.5 * lambda * diff * diff + tables.q_s(s - 1, a);
}

// One state-action update of the discrete CCA inner loop, given the trial's
// final reward and intrinsic reward R_S = -log rho(s_n):
//   Q_R <- (1-a) Q_R + a R        Q_S <- (1-a) Q_S + a R_S
//   Q   <- (1-a*l) Q + a*l Q_R
//   e = elbo(s,a);  Q(s,a) += (a/b) e;  Q(s,.) -= (a/b) pi(.|s) e
// with pi taken from the Q row as it stands before the two ELBO lines.
inline void cca_pair_update(QTables& tables, DiscreteState s, int a, double reward,
                            double r_s, const Hyperparams& hp) {
  const Eigen::Index row = s - 1;
  tables.q_r(row, a) = (1.0 - hp.alpha) * tables.q_r(row, a) + hp.alpha * reward;
  tables.q_s(row, a) = (1.0 - hp.alpha) * tables.q_s(row, a) + hp.alpha * r_s;
  tables.q(row, a) = (1.0 - hp.alpha * hp.lambda) * tables.q(row, a) +
                     hp.alpha * hp.lambda * tables.q_r(row, a);
  const Eigen::VectorXd pi = softmax_policy(tables.q.row(row), hp.beta);
  const double e = elbo_sample(tables, s, a, hp.lambda);
  const double step = hp.alpha / hp.beta * e;
  tables.q(row, a) += step;
  tables.q.row(row) -= step * pi.transpose();
}

// Full trial update. The intrinsic reward pairs the occupancy model with the
// uniform prior, R_S = log p*(s_n) - log rho(s_n): zero when the model is
// already uniform, negative for over-visited finals, positive for rare ones.
// Every (s, a) pair of the trajectory receives the update; leaving out either
// end pair freezes that state's policy (its pair is never trained otherwise)
// and measurably breaks either the exploration or the reward task.
inline void cca_trial_update(QTables& tables, const Trajectory<int, int>& tau,
                             LeakyCountModel& rho, const Hyperparams& hp) {
  if (tau.empty()) return;
  const int s_final = tau.back().s_next;
  const double reward = tau.back().r;
  const double log_prior =
      UniformPrior::over_states(static_cast<int>(rho.probs().size())).log_value;
  const double r_s = log_prior - rho.log_density(s_final);
  rho.update(s_final);
  for (const auto& step : tau) {
    cca_pair_update(tables, step.s, step.a, reward, r_s, hp);
  }
}

// One-step Q-learning backup along the trajectory, bootstrap zeroed at done.
inline void qlearning_trial_update(Eigen::MatrixXd& q, const Trajectory<int, int>& tau,
                                   const Hyperparams& hp) {
  for (const auto& t : tau) {
    const double bootstrap = t.done ? 0.0 : q.row(t.s_next - 1).maxCoeff();
    q(t.s - 1, t.a) +=
        hp.alpha * (t.r + hp.gamma * bootstrap - q(t.s - 1, t.a));
  }
}

inline int sample_from_distribution(const Eigen::VectorXd& probs, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

// Epsilon-greedy with uniform tie-break among the maximizers. Always consumes
// exactly two draws so the stream stays aligned across branches.
template <class Derived>
int epsilon_greedy(const Eigen::MatrixBase<Derived>& q_row, double epsilon,
                   RngStream& rng) {
  const bool explore = rng.uniform() < epsilon;
  if (explore) return static_cast<int>(rng.uniform_int(q_row.size()));
  const double best = q_row.maxCoeff();
  std::vector<int> argmax;
  for (Eigen::Index i = 0; i < q_row.size(); ++i) {
    if (q_row(i) == best) argmax.push_back(static_cast<int>(i));
  }
  return argmax[rng.uniform_int(argmax.size())];
}

enum class DiscreteMethod { kCca, kQlearning };

struct TrialRecord {
  int trial = 0;
  long env_steps = 0;
  double episode_return = 0.0;
  double average_reward = 0.0;
  double cumulative_reward = 0.0;
  int final_state = 0;
  double occupancy_entropy = 0.0;
};

// Runs `trials` episodes on the two-rooms task with the chosen per-trial
// update and records metrics after each trial. The leaky occupancy model is
// the CCA learner's model; for Q-learning it is tracked passively so the
// entropy column stays comparable across methods.
inline std::vector<TrialRecord> run_discrete_experiment(TwoRoomsEnv& env,
                                                        DiscreteMethod method,
                                                        const Hyperparams& hp,
                                                        int trials, RngStream& rng) {
  QTables tables = QTables::zeros(TwoRoomsEnv::kNumStates, TwoRoomsEnv::kNumActions);
  LeakyCountModel rho = LeakyCountModel::uniform(TwoRoomsEnv::kNumStates, hp.eta);
  std::vector<TrialRecord> records;
  records.reserve(trials);
  double cumulative = 0.0;
  long env_steps = 0;
  for (int trial = 0; trial < trials; ++trial) {
    int s = env.reset(rng);
    Trajectory<int, int> tau;
    tau.reserve(TwoRoomsEnv::kEpisodeLen);
    double episode_return = 0.0;
    while (!env.done()) {
      int a;
      if (method == DiscreteMethod::kCca) {
        a = sample_from_distribution(softmax_policy(tables.q.row(s - 1), hp.beta), rng);
      } else {
        a = epsilon_greedy(tables.q.row(s - 1), hp.epsilon, rng);
      }
      const auto [s_next, r, done] = env.step(a);
      tau.push_back({s, a, r, s_next, done});
      episode_return += r;
      s = s_next;
      ++env_steps;
    }
    if (method == DiscreteMethod::kCca) {
      cca_trial_update(tables, tau, rho, hp);
    } else {
      qlearning_trial_update(tables.q, tau, hp);
      rho.update(tau.back().s_next);
    }
    cumulative += episode_return;
    records.push_back({trial, env_steps, episode_return,
                       episode_return / TwoRoomsEnv::kEpisodeLen, cumulative,
                       tau.back().s_next, rho.entropy()});
  }
  return records;
}

}  // namespace cca
