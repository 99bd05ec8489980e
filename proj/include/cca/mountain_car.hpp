#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "cca/rng.hpp"
#include "cca/types.hpp"

namespace cca {

// Continuous-action mountain car. State is (position, velocity); the force
// action lives in [-1, 1]. Each step costs -0.1*f^2 and reaching the goal
// position pays +100; episodes cap at 999 steps.
class MountainCarEnv {
 public:
  static constexpr int kObsDim = 2;
  static constexpr int kActDim = 1;
  static constexpr double kMinPos = -1.2;
  static constexpr double kMaxPos = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kPower = 0.0015;
  static constexpr double kGravity = 0.0025;
  static constexpr double kGoalPos = 0.45;
  static constexpr double kGoalBonus = 100.0;
  static constexpr double kActionCost = 0.1;
  static constexpr int kMaxSteps = 999;

  Eigen::Vector2d reset(RngStream& rng) {
    pos_ = rng.uniform(-0.6, -0.4);
    vel_ = 0.0;
    steps_ = 0;
    done_ = false;
    return observation();
  }

  std::tuple<Eigen::Vector2d, double, bool> step(double force) {
    if (done_) throw std::runtime_error("MountainCarEnv: step() on finished episode");
    const double f = std::clamp(force, -1.0, 1.0);
    vel_ = std::clamp(vel_ + kPower * f - kGravity * std::cos(3.0 * pos_),
                      -kMaxSpeed, kMaxSpeed);
    pos_ = pos_ + vel_;
    if (pos_ < kMinPos) {
      pos_ = kMinPos;
      vel_ = 0.0;
    } else if (pos_ > kMaxPos) {
      pos_ = kMaxPos;
    }
    ++steps_;
    double reward = -kActionCost * f * f;
    if (pos_ >= kGoalPos) {
      reward += kGoalBonus;
      done_ = true;
    } else if (steps_ >= kMaxSteps) {
      done_ = true;
    }
    return {observation(), reward, done_};
  }

  Eigen::Vector2d observation() const { return Eigen::Vector2d(pos_, vel_); }
  bool at_goal() const { return pos_ >= kGoalPos; }
  bool done() const { return done_; }
  int steps_taken() const { return steps_; }

 private:
  double pos_ = -0.5;
  double vel_ = 0.0;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace cca
