#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "cca/rng.hpp"

namespace cca {

struct BoxBounds {
  Eigen::VectorXd low, high;
  Eigen::Index dim() const { return low.size(); }
};

// log(1 - tanh(u)^2) in the numerically stable form
// 2*(log 2 - u - softplus(-2u)); finite for large |u| where the naive form
// underflows.
inline double log_one_minus_tanh_sq(double u) {
  const double sp = u > -20.0 ? std::log1p(std::exp(-2.0 * u)) : -2.0 * u;
  return 2.0 * (std::log(2.0) - u - sp);
}

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)

inline double clamp_log_std(double raw) {
  return raw < kLogStdMin ? kLogStdMin : (raw > kLogStdMax ? kLogStdMax : raw);
}

// One reparameterized draw through the tanh squash:
//   u = mean + exp(log_std) * noise
//   action = low + (high - low) * (tanh(u) + 1) / 2
//   log_prob = N(u | mean, std^2) - sum log(1 - tanh(u)^2) - sum log((high-low)/2)
// mean/log_std are column matrices (dim x batch) so whole batches squash at
// once; log_std is the already-clamped value.
struct SquashedBatch {
  Eigen::MatrixXd noise;    // the fixed standard-normal draws
  Eigen::MatrixXd u;        // pre-squash samples
  Eigen::MatrixXd action;   // in-box actions
  Eigen::RowVectorXd log_prob;
};

inline SquashedBatch squashed_sample(const Eigen::MatrixXd& mean,
                                     const Eigen::MatrixXd& log_std,
                                     const BoxBounds& box,
                                     const Eigen::MatrixXd& noise) {
  const Eigen::Index k = mean.rows();
  const Eigen::Index n = mean.cols();
  if (box.dim() != k) throw std::invalid_argument("squashed sample: box dimension mismatch");
  SquashedBatch out;
  out.noise = noise;
  out.u = (mean.array() + log_std.array().exp() * noise.array()).matrix();
  out.action.resize(k, n);
  out.log_prob = Eigen::RowVectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double half_span = 0.5 * (box.high[i] - box.low[i]);
      const double t = std::tanh(out.u(i, j));
      out.action(i, j) = box.low[i] + half_span * (t + 1.0);
      const double z = noise(i, j);
      lp += -0.5 * z * z - log_std(i, j) - kHalfLog2Pi;
      lp -= log_one_minus_tanh_sq(out.u(i, j));
      lp -= std::log(half_span);
    }
    out.log_prob[j] = lp;
  }
  return out;
}

// Draws the noise from the stream (column-major element order) and samples.
inline SquashedBatch squashed_sample(const Eigen::MatrixXd& mean,
                                     const Eigen::MatrixXd& log_std,
                                     const BoxBounds& box, RngStream& rng) {
  Eigen::MatrixXd noise(mean.rows(), mean.cols());
  for (Eigen::Index j = 0; j < noise.cols(); ++j) {
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = rng.normal();
  }
  return squashed_sample(mean, log_std, box, noise);
}

// Deterministic mode: u = mean.
inline SquashedBatch squashed_mode(const Eigen::MatrixXd& mean,
                                   const Eigen::MatrixXd& log_std,
                                   const BoxBounds& box) {
  return squashed_sample(mean, log_std, box,
                         Eigen::MatrixXd::Zero(mean.rows(), mean.cols()));
}

// Reverse-mode through the reparameterized sample with the noise held fixed.
// d_action is dL/daction (dim x batch), d_log_prob is dL/dlog_prob (1 x batch).
// Outputs accumulate nothing; they are overwritten.
inline void squashed_backward(const SquashedBatch& sample, const Eigen::MatrixXd& mean,
                              const Eigen::MatrixXd& log_std, const BoxBounds& box,
                              const Eigen::MatrixXd& d_action,
                              const Eigen::RowVectorXd& d_log_prob,
                              Eigen::MatrixXd& d_mean, Eigen::MatrixXd& d_log_std) {
  const Eigen::Index k = mean.rows();
  const Eigen::Index n = mean.cols();
  d_mean.resize(k, n);
  d_log_std.resize(k, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double half_span = 0.5 * (box.high[i] - box.low[i]);
      const double u = sample.u(i, j);
      const double one_minus_t2 = std::exp(log_one_minus_tanh_sq(u));
      // dlog_prob/du: only the tanh correction depends on u with noise fixed.
      const double g_u = d_action(i, j) * half_span * one_minus_t2 +
                         d_log_prob[j] * 2.0 * std::tanh(u);
      d_mean(i, j) = g_u;
      d_log_std(i, j) =
          g_u * (u - mean(i, j)) + d_log_prob[j] * (-1.0);
    }
  }
}

}  // namespace cca
