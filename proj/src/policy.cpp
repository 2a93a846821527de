#include "kinoplan/policy.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace kinoplan {

using nlohmann::json;

RobotAction scale_to_action_box(RobotKind kind, const std::array<double, 2>& a) {
  const ActionBounds b = action_bounds(kind);
  RobotAction act;
  act.kind = kind;
  for (int i = 0; i < 2; ++i) {
    const double t = clamp(a[static_cast<size_t>(i)], -1.0, 1.0);
    act.u[static_cast<size_t>(i)] =
        b.lo[static_cast<size_t>(i)] +
        0.5 * (t + 1.0) * (b.hi[static_cast<size_t>(i)] - b.lo[static_cast<size_t>(i)]);
  }
  return act;
}

LearnedPolicy::LearnedPolicy(RobotKind kind, NeuralNet actor, std::optional<NeuralNet> critic,
                             LidarConfig lidar, NormalizationConfig norm,
                             uint64_t training_seed)
    : kind_(kind), actor_(std::move(actor)), critic_(std::move(critic)), lidar_(lidar),
      norm_(norm), training_seed_(training_seed) {
  if (actor_.output_dim() != 2)
    throw std::invalid_argument("LearnedPolicy: actor must emit 2 action values");
}

RobotAction LearnedPolicy::act(const Observation& o) const {
  const std::vector<double> x = normalize_observation(o, norm_);
  const std::vector<double> a = actor_.forward(x);
  return scale_to_action_box(kind_, {a[0], a[1]});
}

double LearnedPolicy::critic_value(const Observation& o) const {
  if (!critic_) throw std::runtime_error("LearnedPolicy: no critic net available");
  std::vector<double> x = normalize_observation(o, norm_);
  const std::vector<double> a = actor_.forward(x);
  x.insert(x.end(), a.begin(), a.end());
  return critic_->forward(x)[0];
}

std::string rollout_outcome_name(RolloutOutcome o) {
  switch (o) {
    case RolloutOutcome::Reached: return "reached";
    case RolloutOutcome::Collided: return "collided";
    case RolloutOutcome::Timeout: return "timeout";
  }
  return "unknown";
}

RolloutResult rollout(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                      const RobotState& start, const GoalSpec& goal,
                      const EpisodeConfig& cfg, Rng& rng,
                      const RewardWeights* reward_weights) {
  if (start.kind != policy.robot_kind())
    throw std::invalid_argument("rollout: start state kind does not match policy");
  if (!point_free(grid, start.position(), cfg.robot_radius))
    throw std::invalid_argument("rollout: start state is in collision");

  RolloutResult result;
  result.final_state = start;
  if (distance(start.position(), goal.position) <= goal.radius) {
    result.outcome = RolloutOutcome::Reached;
    return result;
  }

  const auto max_steps =
      static_cast<long>(std::llround(cfg.max_episode_time / cfg.dt_policy));
  FrameStack stack;
  std::vector<RobotState> history;
  RobotState state = start;

  for (long i = 0; i < max_steps; ++i) {
    stack.push(lidar_scan(grid, state.position(), state.theta, policy.lidar_config(), rng));
    Observation obs = make_observation(state, goal, stack);
    const RobotAction action = policy.act(obs);

    const RobotState next = propagate(state, action, cfg.dt_policy, cfg.dynamics);
    const bool collided = !point_free(grid, next.position(), cfg.robot_radius);
    const bool reached =
        !collided && distance(next.position(), goal.position) <= goal.radius;

    history.push_back(state);
    double reward = 0.0;
    if (reward_weights != nullptr)
      reward = compute_reward(history, next, action, stack.frame(0), goal, collided,
                              *reward_weights);

    result.steps.push_back(
        {static_cast<double>(i) * cfg.dt_policy, state, std::move(obs), action, reward});
    state = next;
    result.total_time = static_cast<double>(i + 1) * cfg.dt_policy;
    if (collided) {
      result.outcome = RolloutOutcome::Collided;
      break;
    }
    if (reached) {
      result.outcome = RolloutOutcome::Reached;
      break;
    }
    result.outcome = RolloutOutcome::Timeout;
  }
  result.final_state = state;
  return result;
}

void write_trajectory_csv(const RolloutResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "t,x,y,theta,vel0,vel1,u0,u1,reward\n";
  char buf[256];
  for (const auto& s : result.steps) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n",
                  s.t, s.state.x, s.state.y, s.state.theta, s.state.vel[0], s.state.vel[1],
                  s.action.u[0], s.action.u[1], s.reward);
    out << buf;
  }
}

void save_policy(const LearnedPolicy& policy, const std::string& prefix) {
  save_weights(policy.actor(), prefix + ".actor.wts");
  if (policy.critic() != nullptr) save_weights(*policy.critic(), prefix + ".critic.wts");
  json meta{
      {"robot_kind", robot_kind_name(policy.robot_kind())},
      {"training_seed", policy.training_seed()},
      {"has_critic", policy.critic() != nullptr},
      {"lidar",
       {{"n_beams", policy.lidar_config().n_beams},
        {"max_range", policy.lidar_config().max_range},
        {"noise_sigma", policy.lidar_config().noise_sigma},
        {"field_of_view", policy.lidar_config().field_of_view}}},
      {"normalization",
       {{"max_range", policy.normalization().max_range},
        {"position_scale", policy.normalization().position_scale}}},
  };
  std::ofstream out(prefix + ".json");
  if (!out) throw std::runtime_error(prefix + ".json: cannot open for writing");
  out << meta.dump(2) << "\n";
}

LearnedPolicy load_policy(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw std::runtime_error(prefix + ".json: cannot open policy metadata");
  json meta = json::parse(in);

  const RobotKind kind = robot_kind_from_name(meta.at("robot_kind").get<std::string>());
  LidarConfig lidar;
  lidar.n_beams = meta.at("lidar").at("n_beams").get<int>();
  lidar.max_range = meta.at("lidar").at("max_range").get<double>();
  lidar.noise_sigma = meta.at("lidar").at("noise_sigma").get<double>();
  lidar.field_of_view = meta.at("lidar").at("field_of_view").get<double>();
  NormalizationConfig norm;
  norm.max_range = meta.at("normalization").at("max_range").get<double>();
  norm.position_scale = meta.at("normalization").at("position_scale").get<double>();

  NeuralNet actor = load_weights(prefix + ".actor.wts");
  std::optional<NeuralNet> critic;
  if (meta.value("has_critic", false)) critic = load_weights(prefix + ".critic.wts");
  return LearnedPolicy(kind, std::move(actor), std::move(critic), lidar, norm,
                       meta.value("training_seed", uint64_t{0}));
}

}  // namespace kinoplan
