#include "kinoplan/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace kinoplan {

namespace {

double min_scan(const std::vector<double>& scan) {
  if (scan.empty()) return 0.0;
  return *std::min_element(scan.begin(), scan.end());
}

// Sum of displacements between the current position and 3, 6 and 9 steps ago.
double displacement_sum(const std::vector<RobotState>& prev, const RobotState& state) {
  double sum = 0.0;
  for (int back : {3, 6, 9}) {
    const int idx = static_cast<int>(prev.size()) - back;
    if (idx < 0) continue;
    sum += std::hypot(state.x - prev[static_cast<size_t>(idx)].x,
                      state.y - prev[static_cast<size_t>(idx)].y);
  }
  return sum;
}

}  // namespace

std::vector<std::string> reward_feature_names(RobotKind kind) {
  switch (kind) {
    case RobotKind::DiffDrive:
      return {"goal", "goal_dist", "collision", "clearance", "step", "turning"};
    case RobotKind::Car:
      return {"goal", "goal_prog", "collision", "step", "backward"};
    case RobotKind::Asteroid:
      return {"goal", "goal_dist", "collision", "clearance", "speed", "step", "disp"};
  }
  throw std::invalid_argument("unknown robot kind");
}

RewardWeights make_default_reward_weights(RobotKind kind) {
  switch (kind) {
    case RobotKind::DiffDrive:
      return {kind, {40.0, 0.6, 40.0, 0.05, -0.2, 0.05}};
    case RobotKind::Car:
      return {kind, {40.0, 6.0, 40.0, -0.2, 0.5}};
    case RobotKind::Asteroid:
      return {kind, {40.0, 0.6, 40.0, 0.05, -0.5, -0.2, 0.3}};
  }
  throw std::invalid_argument("unknown robot kind");
}

std::vector<double> reward_features(const std::vector<RobotState>& prev_states,
                                    const RobotState& state, const RobotAction& action,
                                    const std::vector<double>& scan, const GoalSpec& goal,
                                    bool collided) {
  (void)action;
  const double goal_dist = distance(state.position(), goal.position);
  const double r_goal = goal_dist <= goal.radius ? 1.0 : 0.0;
  const double r_collision = collided ? -1.0 : 0.0;
  const double clearance = min_scan(scan);

  switch (state.kind) {
    case RobotKind::DiffDrive:
      return {r_goal, -goal_dist, r_collision, clearance, 1.0, -std::abs(state.vel[1])};
    case RobotKind::Car: {
      double prog = 0.0;
      if (!prev_states.empty()) {
        const RobotState& prev = prev_states.back();
        prog = distance(prev.position(), goal.position) - goal_dist;
      }
      const double backward = state.vel[0] < 0.0 ? state.vel[0] : 0.0;
      return {r_goal, prog, r_collision, 1.0, backward};
    }
    case RobotKind::Asteroid: {
      const double speed = std::hypot(state.vel[0], state.vel[1]);
      const double r_speed = clearance < 0.25 ? speed : 0.0;
      return {r_goal,       -goal_dist, r_collision, clearance,
              r_speed,      1.0,        displacement_sum(prev_states, state)};
    }
  }
  throw std::invalid_argument("unknown robot kind");
}

double compute_reward(const std::vector<RobotState>& prev_states, const RobotState& state,
                      const RobotAction& action, const std::vector<double>& scan,
                      const GoalSpec& goal, bool collided, const RewardWeights& weights) {
  const std::vector<double> f =
      reward_features(prev_states, state, action, scan, goal, collided);
  if (weights.kind != state.kind || weights.theta.size() != f.size())
    throw std::invalid_argument("compute_reward: weight vector does not match robot kind");
  double r = 0.0;
  for (size_t i = 0; i < f.size(); ++i) r += weights.theta[i] * f[i];
  return r;
}

}  // namespace kinoplan
