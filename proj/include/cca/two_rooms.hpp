#pragma once

#include <array>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "cca/rng.hpp"
#include "cca/types.hpp"

namespace cca {

// Two-rooms grid world: 18 cells in 3 rows x 6 columns, row-major labels
// 1..18. Columns 1-3 form room A, columns 4-6 room B, with a single door
// between cells 9 and 10:
//
//    1  2  3 |  4  5  6
//    7  8  9 = 10 11 12
//   13 14 15 | 16 17 18
//
// An episode is exactly 7 actions from cell 1; the reward is 1 iff the state
// after the 7th action is cell 18, 0 at every other step.
class TwoRoomsEnv {
 public:
  static constexpr int kNumStates = 18;
  static constexpr int kNumActions = 4;
  static constexpr int kEpisodeLen = 7;
  static constexpr int kStart = 1;
  static constexpr int kGoal = 18;
  static constexpr int kCols = 6;
  static constexpr int kRows = 3;

  enum Action : int { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };

  int reset(RngStream& /*rng*/) {
    state_ = kStart;
    steps_ = 0;
    done_ = false;
    return state_;
  }

  // Applies one move; reward is emitted only on the 7th action.
  std::tuple<int, double, bool> step(int action) {
    if (done_) throw std::runtime_error("TwoRoomsEnv: step() on finished episode");
    state_ = transition(state_, action);
    ++steps_;
    done_ = steps_ >= kEpisodeLen;
    const double reward = (done_ && state_ == kGoal) ? 1.0 : 0.0;
    return {state_, reward, done_};
  }

  int state() const { return state_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }

  // Pure grid move with wall and door rules. Moves off the grid or across the
  // room divider (other than 9<->10) leave the state unchanged.
  static int transition(int s, int action) {
    const int row = (s - 1) / kCols;
    const int col = (s - 1) % kCols;
    int nrow = row, ncol = col;
    switch (action) {
      case kEast: ncol = col + 1; break;
      case kSouth: nrow = row + 1; break;
      case kWest: ncol = col - 1; break;
      case kNorth: nrow = row - 1; break;
      default: throw std::invalid_argument("TwoRoomsEnv: action out of range");
    }
    if (nrow < 0 || nrow >= kRows || ncol < 0 || ncol >= kCols) return s;
    // Divider sits between columns 3 and 4 (0-based 2 and 3).
    if ((col == 2 && ncol == 3) || (col == 3 && ncol == 2)) {
      const int t = nrow * kCols + ncol + 1;
      const bool through_door = (s == 9 && t == 10) || (s == 10 && t == 9);
      if (!through_door) return s;
    }
    return nrow * kCols + ncol + 1;
  }

  // BFS distance from the start cell under the wall/door rules.
  static int shortest_path_length(int goal) {
    if (goal < 1 || goal > kNumStates) {
      throw std::invalid_argument("TwoRoomsEnv: goal out of range");
    }
    std::array<int, kNumStates + 1> dist{};
    dist.fill(-1);
    dist[kStart] = 0;
    std::queue<int> frontier;
    frontier.push(kStart);
    while (!frontier.empty()) {
      const int s = frontier.front();
      frontier.pop();
      if (s == goal) break;
      for (int a = 0; a < kNumActions; ++a) {
        const int t = transition(s, a);
        if (dist[t] < 0) {
          dist[t] = dist[s] + 1;
          frontier.push(t);
        }
      }
    }
    return dist[goal];
  }

  static bool in_room_a(int s) { return (s - 1) % kCols <= 2; }

 private:
  int state_ = kStart;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace cca
