#pragma once

#include <string>
#include <vector>

#include "kinoplan/common.hpp"
#include "kinoplan/dynamics.hpp"

namespace kinoplan {

// Weight vector over the robot's reward features. Stand-in for a tuned
// search: the values are fixed configuration.
struct RewardWeights {
  RobotKind kind = RobotKind::DiffDrive;
  std::vector<double> theta;
};

std::vector<std::string> reward_feature_names(RobotKind kind);
RewardWeights make_default_reward_weights(RobotKind kind);

// Feature vector for one transition. `prev_states` holds recent states,
// oldest first (used for the displacement and goal-progress terms; missing
// history contributes 0). `state` is the post-step state, `scan` the latest
// lidar sweep, `collided`/`reached` the step outcome.
std::vector<double> reward_features(const std::vector<RobotState>& prev_states,
                                    const RobotState& state, const RobotAction& action,
                                    const std::vector<double>& scan, const GoalSpec& goal,
                                    bool collided);

// theta^T * features.
double compute_reward(const std::vector<RobotState>& prev_states, const RobotState& state,
                      const RobotAction& action, const std::vector<double>& scan,
                      const GoalSpec& goal, bool collided, const RewardWeights& weights);

}  // namespace kinoplan
