#include "kinoplan/ddpg.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace kinoplan {

namespace {

struct Transition {
  std::vector<double> s;
  std::array<double, 2> a;  // normalized action in [-1, 1]
  double r = 0.0;
  std::vector<double> s2;
  bool done = false;
};

struct Adam {
  NeuralNet::Gradients m, v;
  long t = 0;

  explicit Adam(const NeuralNet& net) : m(net.zero_gradients()), v(net.zero_gradients()) {}

  void step(NeuralNet& net, const NeuralNet::Gradients& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t l = 0; l < net.n_layers(); ++l) {
      auto upd = [&](std::vector<double>& p, const std::vector<double>& gl,
                     std::vector<double>& ml, std::vector<double>& vl) {
        for (size_t i = 0; i < p.size(); ++i) {
          ml[i] = b1 * ml[i] + (1.0 - b1) * gl[i];
          vl[i] = b2 * vl[i] + (1.0 - b2) * gl[i] * gl[i];
          p[i] -= lr * (ml[i] / c1) / (std::sqrt(vl[i] / c2) + eps);
        }
      };
      upd(net.weights(l), g.w[l], m.w[l], v.w[l]);
      upd(net.biases(l), g.b[l], m.b[l], v.b[l]);
    }
  }
};

void soft_update(NeuralNet& target, const NeuralNet& source, double tau) {
  for (size_t l = 0; l < source.n_layers(); ++l) {
    auto& tw = target.weights(l);
    const auto& sw = source.weights(l);
    for (size_t i = 0; i < tw.size(); ++i) tw[i] = tau * sw[i] + (1.0 - tau) * tw[i];
    auto& tb = target.biases(l);
    const auto& sb = source.biases(l);
    for (size_t i = 0; i < tb.size(); ++i) tb[i] = tau * sb[i] + (1.0 - tau) * tb[i];
  }
}

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

RobotAction RandomPolicy::act(const Observation& o) const {
  (void)o;
  return scale_to_action_box(kind_, {uniform(rng_, -1.0, 1.0), uniform(rng_, -1.0, 1.0)});
}

void write_training_log_csv(const TrainingLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "episode,return,success,steps,mean_critic_loss\n";
  for (const auto& e : log.episodes)
    out << e.episode << "," << e.episode_return << "," << (e.success ? 1 : 0) << ","
        << e.steps << "," << e.mean_critic_loss << "\n";
}

LearnedPolicy train_actor_critic(RobotKind kind, const OccupancyGrid& grid,
                                 const RewardWeights& weights,
                                 const TrainPolicyConfig& cfg, TrainingLog* log) {
  const int obs_dim = 3 * cfg.lidar.n_beams + 5;
  NeuralNet actor(with_ends(obs_dim, cfg.actor_hidden, 2), OutputActivation::Tanh, 0.0,
                  derive_seed(cfg.seed, 10));
  NeuralNet critic(with_ends(obs_dim + 2, cfg.critic_hidden, 1), OutputActivation::Identity,
                   0.0, derive_seed(cfg.seed, 11));
  NeuralNet actor_target = actor;
  NeuralNet critic_target = critic;
  Adam actor_opt(actor);
  Adam critic_opt(critic);

  Rng env_rng(derive_seed(cfg.seed, 12));
  Rng noise_rng(derive_seed(cfg.seed, 13));
  Rng replay_rng(derive_seed(cfg.seed, 14));

  std::vector<Transition> replay;
  replay.reserve(static_cast<size_t>(cfg.replay_capacity));
  size_t replay_next = 0;

  if (log != nullptr) {
    log->seed = cfg.seed;
    log->episodes.clear();
  }

  const auto max_steps =
      static_cast<long>(std::llround(cfg.episode.max_episode_time / cfg.episode.dt_policy));
  long total_steps = 0;

  NeuralNet::Workspace ws;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    // Linear exploration decay over the training run.
    const double frac = cfg.episodes > 1 ? static_cast<double>(ep) / (cfg.episodes - 1) : 1.0;
    const double sigma =
        cfg.exploration_sigma + frac * (cfg.exploration_sigma_final - cfg.exploration_sigma);

    // Start/goal pair for this episode.
    RobotState state = sample_free_state(grid, kind, env_rng, GoalSpec{}, 0.0,
                                         cfg.episode.robot_radius);
    GoalSpec goal;
    goal.radius = cfg.episode.goal_radius;
    for (int tries = 0;; ++tries) {
      const Vec2 g = sample_free_position(grid, env_rng, cfg.episode.robot_radius);
      if (distance(g, state.position()) <= cfg.episode.goal_sample_radius &&
          distance(g, state.position()) > goal.radius) {
        goal.position = g;
        break;
      }
      if (tries > 10000)
        throw std::runtime_error("train_actor_critic: cannot sample a goal near the start");
    }

    FrameStack stack;
    std::vector<RobotState> history;
    double ep_return = 0.0;
    double critic_loss_sum = 0.0;
    long critic_loss_count = 0;
    bool success = false;
    int steps = 0;

    for (long i = 0; i < max_steps; ++i) {
      stack.push(lidar_scan(grid, state.position(), state.theta, cfg.lidar, env_rng));
      const Observation obs = make_observation(state, goal, stack);
      const std::vector<double> s = normalize_observation(obs, cfg.normalization);

      std::vector<double> a = actor.forward(s);
      std::normal_distribution<double> noise(0.0, sigma);
      a[0] = clamp(a[0] + noise(noise_rng), -1.0, 1.0);
      a[1] = clamp(a[1] + noise(noise_rng), -1.0, 1.0);
      const RobotAction action = scale_to_action_box(kind, {a[0], a[1]});

      const RobotState next = propagate(state, action, cfg.episode.dt_policy,
                                        cfg.episode.dynamics);
      const bool collided = !point_free(grid, next.position(), cfg.episode.robot_radius);
      const bool reached =
          !collided && distance(next.position(), goal.position) <= goal.radius;
      history.push_back(state);
      const double reward =
          compute_reward(history, next, action, stack.frame(0), goal, collided, weights);
      ep_return += reward;

      // Next observation (scan reused from the next loop iteration is not
      // available yet, so scan here; terminal states skip it).
      const bool done = collided || reached;
      std::vector<double> s2;
      if (!done) {
        FrameStack peek = stack;
        peek.push(lidar_scan(grid, next.position(), next.theta, cfg.lidar, env_rng));
        s2 = normalize_observation(make_observation(next, goal, peek), cfg.normalization);
      } else {
        s2.assign(s.size(), 0.0);
      }

      if (replay.size() < static_cast<size_t>(cfg.replay_capacity)) {
        replay.push_back({s, {a[0], a[1]}, reward, std::move(s2), done});
      } else {
        replay[replay_next] = {s, {a[0], a[1]}, reward, std::move(s2), done};
        replay_next = (replay_next + 1) % replay.size();
      }

      ++total_steps;
      ++steps;
      state = next;

      // Gradient updates once warm.
      if (static_cast<long>(replay.size()) >= cfg.warmup_steps &&
          total_steps % cfg.update_every == 0) {
        NeuralNet::Gradients critic_grads = critic.zero_gradients();
        NeuralNet::Gradients actor_grads = actor.zero_gradients();
        double critic_loss = 0.0;
        const double inv_b = 1.0 / cfg.batch_size;
        std::uniform_int_distribution<size_t> pick(0, replay.size() - 1);
        for (int b = 0; b < cfg.batch_size; ++b) {
          const Transition& tr = replay[pick(replay_rng)];

          double y = tr.r;
          if (!tr.done) {
            const std::vector<double> a2 = actor_target.forward(tr.s2);
            std::vector<double> q_in = tr.s2;
            q_in.insert(q_in.end(), a2.begin(), a2.end());
            y += cfg.gamma * critic_target.forward(q_in)[0];
          }

          std::vector<double> q_in = tr.s;
          q_in.push_back(tr.a[0]);
          q_in.push_back(tr.a[1]);
          const double q = critic.forward_cached(q_in, false, nullptr, ws)[0];
          const double err = q - y;
          critic_loss += err * err * inv_b;
          critic.backward(ws, {2.0 * err * inv_b}, &critic_grads);

          // Actor ascends Q(s, actor(s)).
          NeuralNet::Workspace actor_ws;
          const std::vector<double> a_pi = actor.forward_cached(tr.s, false, nullptr, actor_ws);
          std::vector<double> q_in_pi = tr.s;
          q_in_pi.insert(q_in_pi.end(), a_pi.begin(), a_pi.end());
          NeuralNet::Workspace critic_ws;
          critic.forward_cached(q_in_pi, false, nullptr, critic_ws);
          std::vector<double> dq_dinput;
          critic.backward(critic_ws, {1.0}, nullptr, &dq_dinput);
          const std::vector<double> da{-inv_b * dq_dinput[dq_dinput.size() - 2],
                                       -inv_b * dq_dinput[dq_dinput.size() - 1]};
          actor.backward(actor_ws, da, &actor_grads);
        }

        if (!std::isfinite(critic_loss))
          throw std::runtime_error("train_actor_critic: critic loss diverged (episode " +
                                   std::to_string(ep) + ", loss " +
                                   std::to_string(critic_loss) + ")");
        critic_opt.step(critic, critic_grads, cfg.critic_lr);
        actor_opt.step(actor, actor_grads, cfg.actor_lr);
        soft_update(critic_target, critic, cfg.tau);
        soft_update(actor_target, actor, cfg.tau);
        critic_loss_sum += critic_loss;
        ++critic_loss_count;
      }

      if (done) {
        success = reached;
        break;
      }
    }

    if (log != nullptr)
      log->episodes.push_back({ep, ep_return, success, steps,
                               critic_loss_count > 0 ? critic_loss_sum / critic_loss_count
                                                     : 0.0});
  }

  return LearnedPolicy(kind, std::move(actor), std::move(critic), cfg.lidar,
                       cfg.normalization, cfg.seed);
}

double evaluate_policy_success(const LocalPlannerPolicy& policy, const OccupancyGrid& grid,
                               int trials, double max_goal_distance,
                               const EpisodeConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  int successes = 0;
  for (int t = 0; t < trials; ++t) {
    RobotState start = sample_free_state(grid, policy.robot_kind(), rng, GoalSpec{}, 0.0,
                                         cfg.robot_radius);
    GoalSpec goal;
    goal.radius = cfg.goal_radius;
    while (true) {
      const Vec2 g = sample_free_position(grid, rng, cfg.robot_radius);
      if (distance(g, start.position()) <= max_goal_distance &&
          distance(g, start.position()) > goal.radius) {
        goal.position = g;
        break;
      }
    }
    if (rollout(policy, grid, start, goal, cfg, rng).outcome == RolloutOutcome::Reached)
      ++successes;
  }
  return static_cast<double>(successes) / trials;
}

}  // namespace kinoplan
