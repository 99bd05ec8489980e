#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cca/adam.hpp"
#include "cca/kde.hpp"
#include "cca/mlp.hpp"
#include "cca/mountain_car.hpp"
#include "cca/replay_buffer.hpp"
#include "cca/rng.hpp"
#include "cca/squashed_gaussian.hpp"
#include "cca/types.hpp"

namespace cca {

using AcTransition = Transition<Eigen::VectorXd, Eigen::VectorXd>;
using AcBuffer = ReplayBuffer<Eigen::VectorXd, Eigen::VectorXd>;

// ---- per-sample losses ----

// Reward-critic mean-square Bellman error with precision weight lambda:
//   (lambda/2) (Q_R(s,a) - r - gamma*Qbar_R(s',a'))^2,
// bootstrap zeroed at done.
inline double loss_r(double q_r, double r, double gamma, double q_r_target_next,
                     bool done, double lambda) {
  const double target = r + (done ? 0.0 : gamma * q_r_target_next);
  const double diff = q_r - target;
  return 0.5 * lambda * diff * diff;
}

// Instantaneous term of the ELBO-critic target. The default sign negates the
// verbatim form so that novel (low log-density) states and a well-fit reward
// critic raise Q_ELBO; paper_sign restores the literal expression.
inline double elbo_instant_term(double l_r_sample, double log_rho_next, double gamma,
                                double beta, bool paper_sign) {
  const double term = (1.0 - gamma) / beta * (l_r_sample + log_rho_next);
  return paper_sign ? term : -term;
}

// ELBO-critic loss:
//   (1/2)(Q_ELBO(s,a) - instant - gamma*Qbar_ELBO(s',a'))^2.
inline double loss_elbo(double q_e, double l_r_sample, double log_rho_next,
                        double q_e_target_next, bool done, double gamma, double beta,
                        bool paper_sign) {
  const double target = elbo_instant_term(l_r_sample, log_rho_next, gamma, beta, paper_sign) +
                        (done ? 0.0 : gamma * q_e_target_next);
  const double diff = q_e - target;
  return 0.5 * diff * diff;
}

// Actor loss on a fresh reparameterized action:
//   -Q_R(s,a) + (1/beta) log pi(a|s) - Q_ELBO(s,a),
// with Q values already reduced over the twin critics (elementwise min).
inline double loss_actor(double q_r_min, double log_prob, double beta, double q_e_min) {
  return -q_r_min + log_prob / beta - q_e_min;
}

inline double loss_actor_saclite(double q_r_min, double log_prob, double beta) {
  return -q_r_min + log_prob / beta;
}

// ---- shared plumbing ----

namespace detail {

inline void polyak_update(Mlp& target, const Mlp& online, double tau) {
  for (std::size_t l = 0; l < online.num_layers(); ++l) {
    target.w[l] = tau * target.w[l] + (1.0 - tau) * online.w[l];
    target.b[l] = tau * target.b[l] + (1.0 - tau) * online.b[l];
  }
}

struct BatchMatrices {
  Eigen::MatrixXd s, a, s2;
  Eigen::ArrayXd r, done;
};

inline BatchMatrices to_matrices(const std::vector<AcTransition>& batch) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index ds = batch.front().s.size();
  const Eigen::Index da = batch.front().a.size();
  BatchMatrices m;
  m.s.resize(ds, n);
  m.a.resize(da, n);
  m.s2.resize(ds, n);
  m.r.resize(n);
  m.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.s.col(j) = batch[j].s;
    m.a.col(j) = batch[j].a;
    m.s2.col(j) = batch[j].s_next;
    m.r[j] = batch[j].r;
    m.done[j] = batch[j].done ? 1.0 : 0.0;
  }
  return m;
}

inline Eigen::MatrixXd vstack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

// First output row of a (1 x n) forward result as a column array.
inline Eigen::ArrayXd first_row(const Eigen::MatrixXd& m) {
  return m.row(0).transpose().array();
}

struct ActorHeadOutput {
  Eigen::MatrixXd mean, log_std;
  Eigen::ArrayXXd clamp_mask;  // 1 where the raw log-std was inside the clamp range
};

inline ActorHeadOutput split_actor_output(const Eigen::MatrixXd& trunk_out) {
  const Eigen::Index k = trunk_out.rows() / 2;
  ActorHeadOutput out;
  out.mean = trunk_out.topRows(k);
  const Eigen::MatrixXd raw = trunk_out.bottomRows(k);
  out.log_std = raw.array().max(kLogStdMin).min(kLogStdMax).matrix();
  out.clamp_mask =
      ((raw.array() > kLogStdMin) && (raw.array() < kLogStdMax)).cast<double>();
  return out;
}

struct ActorPhaseResult {
  double mean_loss = 0.0;
  MlpGrads grads;
};

// Full actor objective and its gradient on a fixed noise draw:
//   mean over the batch of  -min(Q_R1,Q_R2)(s, a) + (1/beta) log pi(a|s)
//                           [- min(Q_E1,Q_E2)(s, a) when the pair is given],
// with a the reparameterized squashed sample. Gradients flow through the
// action into the winning critic of each elementwise min and through the
// log-probability; critic parameters receive nothing.
inline ActorPhaseResult actor_phase(const Mlp& actor, const Eigen::MatrixXd& s_batch,
                                    const Eigen::MatrixXd& noise, const BoxBounds& box,
                                    double beta, const Mlp& q_r1, const Mlp& q_r2,
                                    const Mlp* q_e1, const Mlp* q_e2) {
  const Eigen::Index n = s_batch.cols();
  const Eigen::Index k = box.dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  MlpCache c_actor;
  const Eigen::MatrixXd trunk_out = mlp_forward(actor, s_batch, &c_actor);
  const auto head = split_actor_output(trunk_out);
  const auto fresh = squashed_sample(head.mean, head.log_std, box, noise);
  const Eigen::MatrixXd xf = vstack(s_batch, fresh.action);

  MlpCache cf_r1, cf_r2, cf_e1, cf_e2;
  const Eigen::ArrayXd f_r1 = first_row(mlp_forward(q_r1, xf, &cf_r1));
  const Eigen::ArrayXd f_r2 = first_row(mlp_forward(q_r2, xf, &cf_r2));
  Eigen::ArrayXd q_min_total = f_r1.min(f_r2);
  Eigen::ArrayXd f_e1, f_e2;
  if (q_e1 != nullptr) {
    f_e1 = first_row(mlp_forward(*q_e1, xf, &cf_e1));
    f_e2 = first_row(mlp_forward(*q_e2, xf, &cf_e2));
    q_min_total += f_e1.min(f_e2);
  }

  ActorPhaseResult result;
  result.mean_loss =
      (-q_min_total + fresh.log_prob.transpose().array() / beta).mean();

  Eigen::MatrixXd d_action = Eigen::MatrixXd::Zero(k, n);
  MlpGrads scratch;
  Eigen::RowVectorXd up1(n), up2(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool first = f_r1[j] <= f_r2[j];
    up1[j] = first ? -inv_n : 0.0;
    up2[j] = first ? 0.0 : -inv_n;
  }
  d_action += mlp_backward(q_r1, cf_r1, up1, scratch).bottomRows(k);
  d_action += mlp_backward(q_r2, cf_r2, up2, scratch).bottomRows(k);
  if (q_e1 != nullptr) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool first = f_e1[j] <= f_e2[j];
      up1[j] = first ? -inv_n : 0.0;
      up2[j] = first ? 0.0 : -inv_n;
    }
    d_action += mlp_backward(*q_e1, cf_e1, up1, scratch).bottomRows(k);
    d_action += mlp_backward(*q_e2, cf_e2, up2, scratch).bottomRows(k);
  }
  const Eigen::RowVectorXd d_log_prob = Eigen::RowVectorXd::Constant(n, inv_n / beta);
  Eigen::MatrixXd d_mean, d_log_std;
  squashed_backward(fresh, head.mean, head.log_std, box, d_action, d_log_prob, d_mean,
                    d_log_std);
  d_log_std.array() *= head.clamp_mask;
  mlp_backward(actor, c_actor, vstack(d_mean, d_log_std), result.grads);
  return result;
}

}  // namespace detail

struct EpochDiagnostics {
  double mean_loss_r = 0.0;
  double mean_loss_elbo = 0.0;
  double mean_loss_actor = 0.0;
  int updates = 0;
};

// Off-policy concurrent-credit-assignment agent: squashed-Gaussian actor,
// twin reward critics and twin ELBO critics with polyak-averaged targets, and
// a KDE occupancy model refit from a fresh state sample at each epoch.
//
// elbo_enabled=false ablates the occupancy/ELBO machinery entirely, leaving
// the plain soft actor-critic update path (used by the ablation tests).
class CcaAgent {
 public:
  CcaAgent(int obs_dim, BoxBounds action_box, const Hyperparams& hp, RngStream& init_rng,
           bool elbo_enabled = true)
      : box_(std::move(action_box)), hp_(hp), elbo_enabled_(elbo_enabled) {
    hp_.validate();
    const int k = static_cast<int>(box_.dim());
    std::vector<int> actor_sizes{obs_dim};
    std::vector<int> critic_sizes{obs_dim + k};
    for (int l = 0; l < hp_.hidden_layers; ++l) {
      actor_sizes.push_back(hp_.hidden_width);
      critic_sizes.push_back(hp_.hidden_width);
    }
    actor_sizes.push_back(2 * k);
    critic_sizes.push_back(1);
    actor = Mlp::make(actor_sizes, Activation::kRelu, init_rng);
    q_r1 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
    q_r2 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
    if (elbo_enabled_) {
      q_e1 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
      q_e2 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
      q_e1_target = q_e1;
      q_e2_target = q_e2;
      q_e1_opt = AdamState::for_net(q_e1, hp_.lr);
      q_e2_opt = AdamState::for_net(q_e2, hp_.lr);
    }
    q_r1_target = q_r1;
    q_r2_target = q_r2;
    actor_opt = AdamState::for_net(actor, hp_.lr);
    q_r1_opt = AdamState::for_net(q_r1, hp_.lr);
    q_r2_opt = AdamState::for_net(q_r2, hp_.lr);
  }

  Eigen::VectorXd act(const Eigen::VectorXd& obs, RngStream& rng) const {
    const auto head = detail::split_actor_output(mlp_forward(actor, obs));
    return squashed_sample(head.mean, head.log_std, box_, rng).action.col(0);
  }

  Eigen::VectorXd act_mode(const Eigen::VectorXd& obs) const {
    const auto head = detail::split_actor_output(mlp_forward(actor, obs));
    return squashed_mode(head.mean, head.log_std, box_).action.col(0);
  }

  // One update epoch: refit the KDE occupancy model from a fresh state
  // sample, then run `num_updates` batch updates (critics, actor, polyak).
  EpochDiagnostics update_epoch(const AcBuffer& buffer, int num_updates, RngStream& rng) {
    if (buffer.size() < static_cast<std::size_t>(hp_.batch_size)) {
      throw std::runtime_error("update_epoch: buffer smaller than one batch");
    }
    if (elbo_enabled_) {
      const auto states = buffer.sample_states(hp_.kde_samples, rng);
      kde_.emplace(GaussianKde::fit(states, hp_.kde_bandwidth));
    }
    EpochDiagnostics diag;
    for (int u = 0; u < num_updates; ++u) {
      run_one_update(buffer, rng, diag);
    }
    diag.updates = num_updates;
    if (num_updates > 0) {
      diag.mean_loss_r /= num_updates;
      diag.mean_loss_elbo /= num_updates;
      diag.mean_loss_actor /= num_updates;
    }
    return diag;
  }

  const GaussianKde* kde() const { return kde_ ? &*kde_ : nullptr; }
  const BoxBounds& action_box() const { return box_; }
  const Hyperparams& hyperparams() const { return hp_; }
  bool elbo_enabled() const { return elbo_enabled_; }

  Mlp actor, q_r1, q_r2, q_e1, q_e2;
  Mlp q_r1_target, q_r2_target, q_e1_target, q_e2_target;
  AdamState actor_opt, q_r1_opt, q_r2_opt, q_e1_opt, q_e2_opt;

 private:
  void run_one_update(const AcBuffer& buffer, RngStream& rng, EpochDiagnostics& diag) {
    const auto batch = buffer.sample_batch(hp_.batch_size, rng);
    const auto m = detail::to_matrices(batch);
    const Eigen::Index n = m.r.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Fresh next actions and clipped-double targets.
    const auto head2 = detail::split_actor_output(mlp_forward(actor, m.s2));
    const auto next_sample = squashed_sample(head2.mean, head2.log_std, box_, rng);
    const Eigen::MatrixXd x2 = detail::vstack(m.s2, next_sample.action);
    const Eigen::ArrayXd qr_next =
        detail::first_row(mlp_forward(q_r1_target, x2))
            .min(detail::first_row(mlp_forward(q_r2_target, x2)));

    MlpCache c_r1, c_r2;
    const Eigen::MatrixXd x = detail::vstack(m.s, m.a);
    const Eigen::ArrayXd y_r1 = detail::first_row(mlp_forward(q_r1, x, &c_r1));
    const Eigen::ArrayXd y_r2 = detail::first_row(mlp_forward(q_r2, x, &c_r2));
    const Eigen::ArrayXd target_r = m.r + hp_.gamma * (1.0 - m.done) * qr_next;

    // Per-sample reward loss feeding the ELBO target: mean over the twin pair.
    const Eigen::ArrayXd l_r_sample =
        0.25 * hp_.lambda *
        ((y_r1 - target_r).square() + (y_r2 - target_r).square());
    diag.mean_loss_r += l_r_sample.mean();

    MlpGrads g_r1, g_r2;
    mlp_backward(q_r1, c_r1, (hp_.lambda * (y_r1 - target_r) * inv_n).matrix().transpose(), g_r1);
    mlp_backward(q_r2, c_r2, (hp_.lambda * (y_r2 - target_r) * inv_n).matrix().transpose(), g_r2);
    q_r1_opt.apply(q_r1, g_r1);
    q_r2_opt.apply(q_r2, g_r2);

    if (elbo_enabled_) {
      const Eigen::ArrayXd qe_next =
          detail::first_row(mlp_forward(q_e1_target, x2))
              .min(detail::first_row(mlp_forward(q_e2_target, x2)));
      const Eigen::ArrayXd log_rho2 = kde_->log_density_batch(m.s2.transpose()).array();
      Eigen::ArrayXd target_e(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        target_e[j] = elbo_instant_term(l_r_sample[j], log_rho2[j], hp_.gamma, hp_.beta,
                                        hp_.elbo_sign_paper) +
                      hp_.gamma * (1.0 - m.done[j]) * qe_next[j];
      }
      MlpCache c_e1, c_e2;
      const Eigen::ArrayXd y_e1 = detail::first_row(mlp_forward(q_e1, x, &c_e1));
      const Eigen::ArrayXd y_e2 = detail::first_row(mlp_forward(q_e2, x, &c_e2));
      diag.mean_loss_elbo +=
          0.25 * ((y_e1 - target_e).square() + (y_e2 - target_e).square()).mean();
      MlpGrads g_e1, g_e2;
      mlp_backward(q_e1, c_e1, ((y_e1 - target_e) * inv_n).matrix().transpose(), g_e1);
      mlp_backward(q_e2, c_e2, ((y_e2 - target_e) * inv_n).matrix().transpose(), g_e2);
      q_e1_opt.apply(q_e1, g_e1);
      q_e2_opt.apply(q_e2, g_e2);
    }

    // Actor step on fresh actions; critic parameters receive no update here.
    Eigen::MatrixXd noise(box_.dim(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = rng.normal();
    }
    const auto actor_result = detail::actor_phase(
        actor, m.s, noise, box_, hp_.beta, q_r1, q_r2,
        elbo_enabled_ ? &q_e1 : nullptr, elbo_enabled_ ? &q_e2 : nullptr);
    diag.mean_loss_actor += actor_result.mean_loss;
    actor_opt.apply(actor, actor_result.grads);

    detail::polyak_update(q_r1_target, q_r1, hp_.polyak);
    detail::polyak_update(q_r2_target, q_r2, hp_.polyak);
    if (elbo_enabled_) {
      detail::polyak_update(q_e1_target, q_e1, hp_.polyak);
      detail::polyak_update(q_e2_target, q_e2, hp_.polyak);
    }
  }

  BoxBounds box_;
  Hyperparams hp_;
  bool elbo_enabled_;
  std::optional<GaussianKde> kde_;
};

// Soft actor-critic baseline: the same actor/twin-critic/target plumbing with
// entropy coefficient 1/beta, and no occupancy model or ELBO critic. Kept as
// its own update path so the ablation identity is a real cross-check.
class SacLiteAgent {
 public:
  SacLiteAgent(int obs_dim, BoxBounds action_box, const Hyperparams& hp,
               RngStream& init_rng)
      : box_(std::move(action_box)), hp_(hp) {
    hp_.validate();
    const int k = static_cast<int>(box_.dim());
    std::vector<int> actor_sizes{obs_dim};
    std::vector<int> critic_sizes{obs_dim + k};
    for (int l = 0; l < hp_.hidden_layers; ++l) {
      actor_sizes.push_back(hp_.hidden_width);
      critic_sizes.push_back(hp_.hidden_width);
    }
    actor_sizes.push_back(2 * k);
    critic_sizes.push_back(1);
    actor = Mlp::make(actor_sizes, Activation::kRelu, init_rng);
    q1 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
    q2 = Mlp::make(critic_sizes, Activation::kRelu, init_rng);
    q1_target = q1;
    q2_target = q2;
    actor_opt = AdamState::for_net(actor, hp_.lr);
    q1_opt = AdamState::for_net(q1, hp_.lr);
    q2_opt = AdamState::for_net(q2, hp_.lr);
  }

  Eigen::VectorXd act(const Eigen::VectorXd& obs, RngStream& rng) const {
    const auto head = detail::split_actor_output(mlp_forward(actor, obs));
    return squashed_sample(head.mean, head.log_std, box_, rng).action.col(0);
  }

  Eigen::VectorXd act_mode(const Eigen::VectorXd& obs) const {
    const auto head = detail::split_actor_output(mlp_forward(actor, obs));
    return squashed_mode(head.mean, head.log_std, box_).action.col(0);
  }

  EpochDiagnostics update_epoch(const AcBuffer& buffer, int num_updates, RngStream& rng) {
    if (buffer.size() < static_cast<std::size_t>(hp_.batch_size)) {
      throw std::runtime_error("update_epoch: buffer smaller than one batch");
    }
    EpochDiagnostics diag;
    for (int u = 0; u < num_updates; ++u) {
      const auto batch = buffer.sample_batch(hp_.batch_size, rng);
      const auto m = detail::to_matrices(batch);
      const Eigen::Index n = m.r.size();
      const double inv_n = 1.0 / static_cast<double>(n);

      const auto head2 = detail::split_actor_output(mlp_forward(actor, m.s2));
      const auto next_sample = squashed_sample(head2.mean, head2.log_std, box_, rng);
      const Eigen::MatrixXd x2 = detail::vstack(m.s2, next_sample.action);
      const Eigen::ArrayXd q_next =
          detail::first_row(mlp_forward(q1_target, x2))
              .min(detail::first_row(mlp_forward(q2_target, x2)));

      MlpCache c1, c2;
      const Eigen::MatrixXd x = detail::vstack(m.s, m.a);
      const Eigen::ArrayXd y1 = detail::first_row(mlp_forward(q1, x, &c1));
      const Eigen::ArrayXd y2 = detail::first_row(mlp_forward(q2, x, &c2));
      const Eigen::ArrayXd target = m.r + hp_.gamma * (1.0 - m.done) * q_next;
      diag.mean_loss_r +=
          0.25 * hp_.lambda * ((y1 - target).square() + (y2 - target).square()).mean();
      MlpGrads g1, g2;
      mlp_backward(q1, c1, (hp_.lambda * (y1 - target) * inv_n).matrix().transpose(), g1);
      mlp_backward(q2, c2, (hp_.lambda * (y2 - target) * inv_n).matrix().transpose(), g2);
      q1_opt.apply(q1, g1);
      q2_opt.apply(q2, g2);

      Eigen::MatrixXd noise(box_.dim(), n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = rng.normal();
      }
      const auto actor_result = detail::actor_phase(actor, m.s, noise, box_, hp_.beta,
                                                    q1, q2, nullptr, nullptr);
      diag.mean_loss_actor += actor_result.mean_loss;
      actor_opt.apply(actor, actor_result.grads);

      detail::polyak_update(q1_target, q1, hp_.polyak);
      detail::polyak_update(q2_target, q2, hp_.polyak);
    }
    diag.updates = num_updates;
    if (num_updates > 0) {
      diag.mean_loss_r /= num_updates;
      diag.mean_loss_actor /= num_updates;
    }
    return diag;
  }

  const BoxBounds& action_box() const { return box_; }
  const Hyperparams& hyperparams() const { return hp_; }

  Mlp actor, q1, q2, q1_target, q2_target;
  AdamState actor_opt, q1_opt, q2_opt;

 private:
  BoxBounds box_;
  Hyperparams hp_;
};

// ---- training loop ----

struct EpisodeRecord {
  int episode = 0;
  long env_steps = 0;
  double episode_return = 0.0;
  double average_reward = 0.0;
  double cumulative_reward = 0.0;
  int episode_len = 0;
  double eval_return = 0.0;
};

using StopPredicate = std::function<bool(const std::vector<EpisodeRecord>&)>;

namespace detail {

template <class Agent>
double eval_episode(const Agent& agent, RngStream& eval_rng) {
  MountainCarEnv env;
  Eigen::VectorXd obs = env.reset(eval_rng);
  double ret = 0.0;
  while (!env.done()) {
    const Eigen::VectorXd a = agent.act_mode(obs);
    auto [obs2, r, done] = env.step(a[0]);
    obs = obs2;
    ret += r;
  }
  return ret;
}

}  // namespace detail

// Interleaves environment rollouts with one update epoch per episode boundary
// (one batch update per env step collected since the previous epoch, once the
// warm-up threshold is reached). Actions are uniform random during warm-up.
// After each episode one deterministic-policy evaluation episode is run on a
// separate stream; its return lands in EpisodeRecord::eval_return.
//
// Timeout terminations are stored with done=false so the critics bootstrap
// through the step cap; only reaching the goal is a true absorbing state.
template <class Agent>
std::vector<EpisodeRecord> train_agent(Agent& agent, MountainCarEnv& env,
                                       AcBuffer& buffer, const Hyperparams& hp,
                                       long total_steps, RngStream& rng,
                                       const StopPredicate& stop = {}) {
  RngStream env_rng = rng.split(0);
  RngStream action_rng = rng.split(1);
  RngStream update_rng = rng.split(2);
  RngStream eval_rng = rng.split(3);

  std::vector<EpisodeRecord> records;
  long steps = 0;
  long steps_at_update = hp.warmup_steps;
  double cumulative = 0.0;
  int episode = 0;
  const auto& box = agent.action_box();

  while (steps < total_steps) {
    Eigen::VectorXd obs = env.reset(env_rng);
    double ep_return = 0.0;
    int ep_len = 0;
    while (!env.done()) {
      Eigen::VectorXd a(box.dim());
      if (steps < hp.warmup_steps) {
        for (Eigen::Index i = 0; i < box.dim(); ++i) {
          a[i] = action_rng.uniform(box.low[i], box.high[i]);
        }
      } else {
        a = agent.act(obs, action_rng);
      }
      auto [obs2, r, done] = env.step(a[0]);
      const bool absorbing = done && env.at_goal();
      buffer.push({obs, a, r, obs2, absorbing});
      obs = obs2;
      ep_return += r;
      ++ep_len;
      ++steps;
    }
    if (steps >= hp.warmup_steps) {
      const int n_updates = hp.updates_per_epoch > 0
                                ? hp.updates_per_epoch
                                : static_cast<int>(steps - steps_at_update);
      if (n_updates > 0) agent.update_epoch(buffer, n_updates, update_rng);
      steps_at_update = steps;
    }
    const double eval_return = detail::eval_episode(agent, eval_rng);
    cumulative += ep_return;
    records.push_back({episode, steps, ep_return, ep_return / ep_len, cumulative,
                       ep_len, eval_return});
    ++episode;
    if (stop && stop(records)) break;
  }
  return records;
}

}  // namespace cca
