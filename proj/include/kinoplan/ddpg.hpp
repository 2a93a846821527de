#pragma once

#include <vector>

#include "kinoplan/policy.hpp"
#include "kinoplan/sampling.hpp"

namespace kinoplan {

struct TrainPolicyConfig {
  EpisodeConfig episode;
  LidarConfig lidar;
  NormalizationConfig normalization;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double tau = 0.005;
  int batch_size = 64;
  int replay_capacity = 100000;
  int warmup_steps = 1000;
  int update_every = 1;
  double exploration_sigma = 0.4;
  double exploration_sigma_final = 0.1;
  int episodes = 300;
  uint64_t seed = 1;
};

struct EpisodeStats {
  int episode = 0;
  double episode_return = 0.0;
  bool success = false;
  int steps = 0;
  double mean_critic_loss = 0.0;
};

struct TrainingLog {
  uint64_t seed = 0;
  std::vector<EpisodeStats> episodes;
};

void write_training_log_csv(const TrainingLog& log, const std::string& path);

// Deterministic-policy actor-critic training of a P2P policy with fixed
// reward weights. Start/goal pairs are sampled on `grid` with goals within
// episode.goal_sample_radius. Throws on divergence (non-finite losses).
LearnedPolicy train_actor_critic(RobotKind kind, const OccupancyGrid& grid,
                                 const RewardWeights& weights,
                                 const TrainPolicyConfig& cfg,
                                 TrainingLog* log = nullptr);

// Success rate of `policy` over seeded rollouts with goals at most
// max_goal_distance away. Shared by tests and the CLI report.
double evaluate_policy_success(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                               int trials, double max_goal_distance,
                               const EpisodeConfig& cfg, uint64_t seed);

// Random-action baseline with the same interface as a policy.
class RandomPolicy final : public LocalPlannerPolicy {
 public:
  RandomPolicy(RobotKind kind, LidarConfig lidar, uint64_t seed)
      : kind_(kind), lidar_(lidar), rng_(seed) {}
  RobotAction act(const Observation& o) const override;
  RobotKind robot_kind() const override { return kind_; }
  std::string kind_tag() const override { return "random"; }
  const LidarConfig& lidar_config() const override { return lidar_; }

 private:
  RobotKind kind_;
  LidarConfig lidar_;
  mutable Rng rng_;
};

}  // namespace kinoplan
