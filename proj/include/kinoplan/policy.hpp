#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kinoplan/common.hpp"
#include "kinoplan/dynamics.hpp"
#include "kinoplan/lidar.hpp"
#include "kinoplan/neuralnet.hpp"
#include "kinoplan/observation.hpp"
#include "kinoplan/occupancy_grid.hpp"
#include "kinoplan/reward.hpp"

namespace kinoplan {

struct EpisodeConfig {
  double dt_policy = 0.1;
  double max_episode_time = 20.0;
  double goal_radius = 0.5;  // d_G
  double goal_sample_radius = 10.0;
  double robot_radius = kRobotRadius;
  DynamicsParams dynamics;
};

// Goal-conditioned point-to-point controller. Implementations must emit
// actions already inside the robot's action box.
class LocalPlannerPolicy {
 public:
  virtual ~LocalPlannerPolicy() = default;
  virtual RobotAction act(const Observation& o) const = 0;
  virtual RobotKind robot_kind() const = 0;
  virtual std::string kind_tag() const = 0;  // "learned" | "dwa" | "dwa_no_clearance"
  virtual const LidarConfig& lidar_config() const = 0;
};

struct DwaConfig {
  double sim_time = 1.5;
  double dt = 0.1;
  double min_speed = -0.4;  // small reverse band to back out of dead ends
  int n_speed = 8;
  int n_turn = 11;
  double w_heading = 1.0;
  double w_velocity = 0.4;
  double w_clearance = 0.6;
  double clearance_cap = 2.0;
  double robot_radius = kRobotRadius;
  double safety_margin = 0.05;
};

struct DwaCandidate {
  RobotAction action;
  double heading_score = 0.0;
  double velocity_score = 0.0;
  double clearance_score = 0.0;
  double total = 0.0;
  bool admissible = false;
};

// Scores the sampled (v, omega) window against body-frame obstacle points.
// Exposed for tests; dwa_act returns the argmax (ties: first candidate).
std::vector<DwaCandidate> dwa_score_window(const Vec2& goal_body,
                                           const std::vector<Vec2>& obstacles_body,
                                           const DwaConfig& cfg, bool enable_clearance);

// Body-frame obstacle points reconstructed from a scan (beam 0 along the
// heading, counterclockwise; returns at max range carry no obstacle).
std::vector<Vec2> scan_to_points(const std::vector<double>& scan, const LidarConfig& cfg);

// Differential-drive only. Samples admissible (v, omega) pairs over one
// window, scores heading + velocity (+ clearance when enabled) and returns
// the best action; windows with no admissible candidate return zero velocity.
RobotAction dwa_act(const RobotState& state, const Vec2& goal,
                    const std::vector<double>& scan, const LidarConfig& lidar,
                    const DwaConfig& cfg, bool enable_clearance);

class DwaPolicy final : public LocalPlannerPolicy {
 public:
  DwaPolicy(LidarConfig lidar, DwaConfig cfg, bool enable_clearance)
      : lidar_(lidar), cfg_(cfg), enable_clearance_(enable_clearance) {}

  RobotAction act(const Observation& o) const override;
  RobotKind robot_kind() const override { return RobotKind::DiffDrive; }
  std::string kind_tag() const override {
    return enable_clearance_ ? "dwa" : "dwa_no_clearance";
  }
  const LidarConfig& lidar_config() const override { return lidar_; }
  const DwaConfig& dwa_config() const { return cfg_; }
  bool clearance_enabled() const { return enable_clearance_; }

 private:
  LidarConfig lidar_;
  DwaConfig cfg_;
  bool enable_clearance_;
};

// Actor(-critic) policy backed by NeuralNets. The actor maps the normalized
// observation to [-1, 1]^2 (tanh), rescaled to the action box.
class LearnedPolicy final : public LocalPlannerPolicy {
 public:
  LearnedPolicy(RobotKind kind, NeuralNet actor, std::optional<NeuralNet> critic,
                LidarConfig lidar, NormalizationConfig norm, uint64_t training_seed = 0);

  RobotAction act(const Observation& o) const override;
  RobotKind robot_kind() const override { return kind_; }
  std::string kind_tag() const override { return "learned"; }
  const LidarConfig& lidar_config() const override { return lidar_; }

  const NeuralNet& actor() const { return actor_; }
  const NeuralNet* critic() const { return critic_ ? &*critic_ : nullptr; }
  const NormalizationConfig& normalization() const { return norm_; }
  uint64_t training_seed() const { return training_seed_; }

  // Critic state value at (o, actor(o)).
  double critic_value(const Observation& o) const;

 private:
  RobotKind kind_;
  NeuralNet actor_;
  std::optional<NeuralNet> critic_;
  LidarConfig lidar_;
  NormalizationConfig norm_;
  uint64_t training_seed_ = 0;
};

// Maps a tanh output in [-1, 1]^2 to the robot's action box.
RobotAction scale_to_action_box(RobotKind kind, const std::array<double, 2>& a);

enum class RolloutOutcome { Reached, Collided, Timeout };
std::string rollout_outcome_name(RolloutOutcome o);

struct TrajectoryStep {
  double t = 0.0;       // time at which the action was issued
  RobotState state;     // state the action was issued from
  Observation observation;
  RobotAction action;
  double reward = 0.0;
};

struct RolloutResult {
  RolloutOutcome outcome = RolloutOutcome::Timeout;
  std::vector<TrajectoryStep> steps;
  RobotState final_state;
  double total_time = 0.0;
};

// Steps the policy at dt_policy until the goal (within d_G), a collision, or
// max_episode_time. Records per-step states, observations and actions; the
// recorded sequence replays exactly through propagate. Rewards are computed
// when weights are given, else logged as 0.
RolloutResult rollout(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                      const RobotState& start, const GoalSpec& goal,
                      const EpisodeConfig& cfg, Rng& rng,
                      const RewardWeights* reward_weights = nullptr);

// CSV log: t, state..., action..., reward.
void write_trajectory_csv(const RolloutResult& result, const std::string& path);

// Policy checkpoint: "<prefix>.actor.wts" (+ ".critic.wts"), "<prefix>.json"
// metadata (robot kind, lidar, normalization, training seed).
void save_policy(const LearnedPolicy& policy, const std::string& prefix);
LearnedPolicy load_policy(const std::string& prefix);

}  // namespace kinoplan
