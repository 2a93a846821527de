#pragma once

#include <vector>

#include "kinoplan/common.hpp"
#include "kinoplan/dynamics.hpp"

namespace kinoplan {

// Ring buffer of the last three lidar scans. Until three scans exist, the
// missing frames read as copies of the earliest available scan.
class FrameStack {
 public:
  void push(std::vector<double> scan);
  void clear() { count_ = 0; }
  bool empty() const { return count_ == 0; }
  int size() const { return count_ < 3 ? count_ : 3; }
  // age 0 = newest, age 2 = oldest.
  const std::vector<double>& frame(int age) const;

 private:
  std::array<std::vector<double>, 3> frames_;
  int count_ = 0;
};

// Policy/estimator input: [scan(t-2), scan(t-1), scan(t), rel_goal(2),
// velocity(2), orientation(1)], 3*n_beams + 5 values in total. rel_goal is
// the goal position in the robot body frame; velocity slots are kind-specific
// (Asteroid velocity is rotated into the body frame).
struct Observation {
  RobotKind kind = RobotKind::DiffDrive;
  int n_beams = 0;
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double rel_goal_x() const { return values[static_cast<size_t>(3 * n_beams)]; }
  double rel_goal_y() const { return values[static_cast<size_t>(3 * n_beams) + 1]; }
  double velocity(int i) const { return values[static_cast<size_t>(3 * n_beams) + 2 + i]; }
  double orientation() const { return values[static_cast<size_t>(3 * n_beams) + 4]; }
  // Beam i of the newest scan.
  double newest_range(int i) const { return values[static_cast<size_t>(2 * n_beams + i)]; }
};

Observation make_observation(const RobotState& state, const GoalSpec& goal,
                             const FrameStack& stack);

struct NormalizationConfig {
  double max_range = 5.0;       // divides lidar returns
  double position_scale = 10.0;  // divides rel_goal
};

std::vector<double> normalize_observation(const Observation& o,
                                          const NormalizationConfig& cfg);
std::vector<double> denormalize_observation(const std::vector<double>& values,
                                            int n_beams, const NormalizationConfig& cfg);

}  // namespace kinoplan
