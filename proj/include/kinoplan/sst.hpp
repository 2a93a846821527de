#pragma once

#include "kinoplan/planner.hpp"

namespace kinoplan {

// Steering-function-free baseline: random control propagation with best-near
// node selection and witness-based pruning for asymptotic near-optimality.
struct SstConfig {
  double delta_bn = 2.0;    // best-near selection radius, meters
  double delta_s = 0.5;     // witness radius, meters
  double t_prop_min = 0.5;  // random propagation duration bounds, seconds
  double t_prop_max = 3.0;
  double time_budget = 10.0;
  long max_iterations = 0;
  double p_goal_bias = 0.05;
  double goal_radius = 0.5;
  double robot_radius = kRobotRadius;
  double dt_policy = 0.1;   // collision-check and replay resolution
  DynamicsParams dynamics;
};

// Runs until the budget is exhausted and returns the cheapest goal-reaching
// plan found (failure report otherwise). Plans replay through propagate at
// dt_policy resolution exactly like the RRT variants.
PlanResult sst_plan(const OccupancyGrid& grid, const RobotState& root, const GoalSpec& goal,
                    const SstConfig& cfg, Rng& rng, TreeDump* tree_out = nullptr);

}  // namespace kinoplan
