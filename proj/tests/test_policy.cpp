#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "kinoplan/policy.hpp"
#include "test_util.hpp"

using namespace kinoplan;
using namespace kinoplan::testutil;

namespace {

RobotState dd_state(double x, double y, double theta = 0.0) {
  RobotState s;
  s.kind = RobotKind::DiffDrive;
  s.x = x;
  s.y = y;
  s.theta = theta;
  return s;
}

// Constant-action test policy.
class ConstantPolicy final : public LocalPlannerPolicy {
 public:
  ConstantPolicy(RobotKind kind, RobotAction a, LidarConfig lidar)
      : kind_(kind), action_(a), lidar_(lidar) {}
  RobotAction act(const Observation&) const override { return action_; }
  RobotKind robot_kind() const override { return kind_; }
  std::string kind_tag() const override { return "constant"; }
  const LidarConfig& lidar_config() const override { return lidar_; }

 private:
  RobotKind kind_;
  RobotAction action_;
  LidarConfig lidar_;
};

LidarConfig test_lidar() {
  LidarConfig cfg;
  cfg.n_beams = 16;
  cfg.noise_sigma = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("reward features and weights") {
  const GoalSpec goal{{0.0, 0.0}, 0.5};
  const std::vector<double> scan{1.0, 2.0, 0.7};
  const RobotAction a{RobotKind::DiffDrive, {0.5, 0.0}};

  SUBCASE("one-hot goal weight pays 1 at the goal") {
    RewardWeights w{RobotKind::DiffDrive, {1, 0, 0, 0, 0, 0}};
    CHECK(compute_reward({}, dd_state(0.1, 0.0), a, scan, goal, false, w) ==
          doctest::Approx(1.0));
    CHECK(compute_reward({}, dd_state(3.0, 0.0), a, scan, goal, false, w) ==
          doctest::Approx(0.0));
  }
  SUBCASE("collision feature is -1 on collision steps") {
    RewardWeights w{RobotKind::DiffDrive, {0, 0, 1, 0, 0, 0}};
    CHECK(compute_reward({}, dd_state(1, 1), a, scan, goal, true, w) == doctest::Approx(-1.0));
    CHECK(compute_reward({}, dd_state(1, 1), a, scan, goal, false, w) == doctest::Approx(0.0));
  }
  SUBCASE("goal-distance feature is the negative distance") {
    RewardWeights w{RobotKind::DiffDrive, {0, 1, 0, 0, 0, 0}};
    CHECK(compute_reward({}, dd_state(10.0, 0.0), a, scan, goal, false, w) ==
          doctest::Approx(-10.0));
  }
  SUBCASE("clearance is the minimum scan return") {
    RewardWeights w{RobotKind::DiffDrive, {0, 0, 0, 1, 0, 0}};
    CHECK(compute_reward({}, dd_state(5, 5), a, scan, goal, false, w) == doctest::Approx(0.7));
  }
  SUBCASE("asteroid speed feature only fires below 0.25 m clearance") {
    RobotState s;
    s.kind = RobotKind::Asteroid;
    s.x = 5;
    s.vel = {0.6, 0.0};
    RewardWeights w{RobotKind::Asteroid, {0, 0, 0, 0, 1, 0, 0}};
    const RobotAction aa{RobotKind::Asteroid, {0, 0}};
    CHECK(compute_reward({}, s, aa, {0.2}, goal, false, w) == doctest::Approx(0.6));
    CHECK(compute_reward({}, s, aa, {0.3}, goal, false, w) == doctest::Approx(0.0));
  }
  SUBCASE("displacement feature sums 3/6/9-step displacements") {
    RobotState s;
    s.kind = RobotKind::Asteroid;
    s.x = 10.0;
    std::vector<RobotState> history;
    for (int i = 0; i < 9; ++i) {
      RobotState h = s;
      h.kind = RobotKind::Asteroid;
      h.x = static_cast<double>(i);  // positions 0..8, current at 10
      history.push_back(h);
    }
    RewardWeights w{RobotKind::Asteroid, {0, 0, 0, 0, 0, 0, 1}};
    // 3 back -> x=6, 6 back -> x=3, 9 back -> x=0.
    const double expect = (10.0 - 6.0) + (10.0 - 3.0) + (10.0 - 0.0);
    CHECK(compute_reward(history, s, {RobotKind::Asteroid, {0, 0}}, {5.0}, goal, false, w) ==
          doctest::Approx(expect));
    // With < 3 steps of history every term is 0.
    CHECK(compute_reward({}, s, {RobotKind::Asteroid, {0, 0}}, {5.0}, goal, false, w) ==
          doctest::Approx(0.0));
  }
  SUBCASE("car goal progress rewards closing distance") {
    RobotState prev;
    prev.kind = RobotKind::Car;
    prev.x = 5.0;
    RobotState cur = prev;
    cur.x = 4.0;
    RewardWeights w{RobotKind::Car, {0, 1, 0, 0, 0}};
    CHECK(compute_reward({prev}, cur, {RobotKind::Car, {0, 0}}, {5.0}, goal, false, w) ==
          doctest::Approx(1.0));
  }
  SUBCASE("reward is linear in theta") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      RewardWeights w1{RobotKind::DiffDrive, {}};
      RewardWeights w2{RobotKind::DiffDrive, {}};
      RewardWeights sum{RobotKind::DiffDrive, {}};
      for (int i = 0; i < 6; ++i) {
        w1.theta.push_back(uniform(rng, -2, 2));
        w2.theta.push_back(uniform(rng, -2, 2));
        sum.theta.push_back(w1.theta.back() + w2.theta.back());
      }
      const RobotState s = dd_state(uniform(rng, -5, 5), uniform(rng, -5, 5));
      const double r1 = compute_reward({}, s, a, scan, goal, false, w1);
      const double r2 = compute_reward({}, s, a, scan, goal, false, w2);
      const double rs = compute_reward({}, s, a, scan, goal, false, sum);
      CHECK(rs == doctest::Approx(r1 + r2).epsilon(1e-9));
    }
  }
  SUBCASE("mismatched weight vector throws") {
    RewardWeights w{RobotKind::Car, {1, 0, 0, 0, 0}};
    CHECK_THROWS_AS(compute_reward({}, dd_state(0, 0), a, scan, goal, false, w),
                    std::invalid_argument);
  }
}

TEST_CASE("default reward weights match the feature lists") {
  for (RobotKind kind : {RobotKind::DiffDrive, RobotKind::Car, RobotKind::Asteroid}) {
    const RewardWeights w = make_default_reward_weights(kind);
    CHECK(w.theta.size() == reward_feature_names(kind).size());
  }
}

TEST_CASE("dwa_act picks full speed toward an unobstructed goal") {
  const OccupancyGrid g = empty_grid(20.0);
  const RobotState s = dd_state(10, 10);
  Rng rng(1);
  const auto scan = lidar_scan(g, s.position(), s.theta, test_lidar(), rng);
  const RobotAction a = dwa_act(s, {15.0, 10.0}, scan, test_lidar(), DwaConfig{}, true);
  CHECK(a.u[0] == doctest::Approx(kDiffDriveMaxSpeed));
  CHECK(std::abs(a.u[1]) <= 0.01);
}

TEST_CASE("dwa_act turns when the goal is behind") {
  const OccupancyGrid g = empty_grid(20.0);
  const RobotState s = dd_state(10, 10, 0.0);
  Rng rng(1);
  const auto scan = lidar_scan(g, s.position(), s.theta, test_lidar(), rng);
  const RobotAction a = dwa_act(s, {5.0, 10.0}, scan, test_lidar(), DwaConfig{}, true);
  CHECK(std::abs(a.u[1]) > 0.0);
}

TEST_CASE("dwa clearance term prefers wider margins") {
  // Wall dead ahead at x=12; goal beyond the wall's gap on the left.
  auto rows = std::vector<std::string>(200, std::string(200, '.'));
  for (int iy = 0; iy < 90; ++iy) rows[199 - iy][120] = '#';  // wall below y=9 at x=12
  const OccupancyGrid g = grid_from_rows(rows, 0.1);
  const RobotState s = dd_state(10.5, 4.0, 0.0);  // 1.5 m from the wall
  Rng rng(2);
  const auto scan = lidar_scan(g, s.position(), s.theta, test_lidar(), rng);

  const auto window_on =
      dwa_score_window({std::cos(s.theta) * (16.0 - s.x), 5.0 - s.y},
                       scan_to_points(scan, test_lidar()), DwaConfig{}, true);
  const auto window_off =
      dwa_score_window({std::cos(s.theta) * (16.0 - s.x), 5.0 - s.y},
                       scan_to_points(scan, test_lidar()), DwaConfig{}, false);

  auto arc_clearance = [&](const RobotAction& a) {
    // Re-simulate the chosen arc against the scan obstacles.
    const auto pts = scan_to_points(scan, test_lidar());
    double x = 0, y = 0, th = 0, clear = 1e9;
    for (int k = 0; k < 15; ++k) {
      th += a.u[1] * 0.1;
      x += a.u[0] * std::cos(th) * 0.1;
      y += a.u[0] * std::sin(th) * 0.1;
      for (const auto& p : pts) clear = std::min(clear, std::hypot(p.x - x, p.y - y));
    }
    return clear;
  };
  auto best_of = [](const std::vector<DwaCandidate>& w) {
    const DwaCandidate* best = nullptr;
    for (const auto& c : w)
      if (c.admissible && (best == nullptr || c.total > best->total)) best = &c;
    REQUIRE(best != nullptr);
    return best->action;
  };
  CHECK(arc_clearance(best_of(window_on)) >= arc_clearance(best_of(window_off)));
}

TEST_CASE("dwa with clearance disabled never scores clearance") {
  const OccupancyGrid g = load_map("maps/training.map");
  const RobotState s = dd_state(5.0, 5.0, 0.4);
  Rng rng(3);
  const auto scan = lidar_scan(g, s.position(), s.theta, test_lidar(), rng);
  const auto window =
      dwa_score_window({3.0, 1.0}, scan_to_points(scan, test_lidar()), DwaConfig{}, false);
  DwaConfig zero_weight;
  zero_weight.w_clearance = 0.0;
  const auto window_zero =
      dwa_score_window({3.0, 1.0}, scan_to_points(scan, test_lidar()), zero_weight, true);
  REQUIRE(window.size() == window_zero.size());
  for (size_t i = 0; i < window.size(); ++i) {
    CHECK(window[i].clearance_score == 0.0);
    CHECK(window[i].total == doctest::Approx(window_zero[i].total));
  }
}

TEST_CASE("dwa returns zero velocity when every candidate collides") {
  // Robot boxed in by obstacles on all sides at point-blank range.
  std::vector<double> scan(16, 0.25);
  const RobotAction a =
      dwa_act(dd_state(5, 5), {8.0, 5.0}, scan, test_lidar(), DwaConfig{}, true);
  CHECK(a.u[0] == 0.0);
  CHECK(a.u[1] == 0.0);
}

TEST_CASE("dwa_act rejects non-diff-drive robots") {
  RobotState s;
  s.kind = RobotKind::Car;
  CHECK_THROWS_AS(dwa_act(s, {1, 1}, {1.0}, test_lidar(), DwaConfig{}, true),
                  std::invalid_argument);
}

TEST_CASE("rollout basics") {
  const OccupancyGrid g = empty_grid(20.0);
  EpisodeConfig cfg;

  SUBCASE("start inside the goal radius returns immediately") {
    Rng rng(1);
    const ConstantPolicy p(RobotKind::DiffDrive, {RobotKind::DiffDrive, {0, 0}}, test_lidar());
    const RolloutResult r = rollout(p, g, dd_state(10, 10), {{10.2, 10.0}, 0.5}, cfg, rng);
    CHECK(r.outcome == RolloutOutcome::Reached);
    CHECK(r.steps.empty());
    CHECK(r.total_time == 0.0);
  }
  SUBCASE("zero action times out") {
    Rng rng(2);
    const ConstantPolicy p(RobotKind::DiffDrive, {RobotKind::DiffDrive, {0, 0}}, test_lidar());
    const RolloutResult r = rollout(p, g, dd_state(10, 10), {{18.0, 10.0}, 0.5}, cfg, rng);
    CHECK(r.outcome == RolloutOutcome::Timeout);
    CHECK(r.steps.size() == 200);  // 20 s at 0.1 s
    CHECK(r.total_time == doctest::Approx(20.0));
  }
  SUBCASE("fixed seed reproduces the trajectory") {
    DwaPolicy p(test_lidar(), DwaConfig{}, true);
    Rng a(77), b(77);
    const RolloutResult r1 = rollout(p, g, dd_state(4, 4), {{15.0, 15.0}, 0.5}, cfg, a);
    const RolloutResult r2 = rollout(p, g, dd_state(4, 4), {{15.0, 15.0}, 0.5}, cfg, b);
    REQUIRE(r1.steps.size() == r2.steps.size());
    CHECK(r1.outcome == r2.outcome);
    for (size_t i = 0; i < r1.steps.size(); ++i) {
      CHECK(r1.steps[i].state.x == r2.steps[i].state.x);
      CHECK(r1.steps[i].action.u == r2.steps[i].action.u);
    }
  }
  SUBCASE("start in collision throws") {
    Rng rng(3);
    const ConstantPolicy p(RobotKind::DiffDrive, {RobotKind::DiffDrive, {0, 0}}, test_lidar());
    CHECK_THROWS_AS(rollout(p, g, dd_state(0.1, 0.1), {{5, 5}, 0.5}, cfg, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("dwa rollout reaches a goal and replays through propagate") {
  const OccupancyGrid g = load_map("maps/training.map");
  EpisodeConfig cfg;
  DwaPolicy p(test_lidar(), DwaConfig{}, true);
  Rng rng(5);
  const RolloutResult r =
      rollout(p, g, dd_state(9.22, 5.63, 1.43), {{9.79, 9.90}, 0.5}, cfg, rng);
  CHECK(r.outcome == RolloutOutcome::Reached);
  REQUIRE(!r.steps.empty());

  // Replay: recorded actions applied to recorded states give the next state.
  for (size_t i = 0; i + 1 < r.steps.size(); ++i) {
    const RobotState next = propagate(r.steps[i].state, r.steps[i].action, cfg.dt_policy);
    CHECK(next.x == r.steps[i + 1].state.x);
    CHECK(next.y == r.steps[i + 1].state.y);
    CHECK(next.theta == r.steps[i + 1].state.theta);
  }
  const RobotState last =
      propagate(r.steps.back().state, r.steps.back().action, cfg.dt_policy);
  CHECK(last.x == r.final_state.x);
  CHECK(last.y == r.final_state.y);

  // Every emitted action is already clamped.
  for (const auto& step : r.steps) {
    const RobotAction c = clamp_action(step.action);
    CHECK(c.u[0] == step.action.u[0]);
    CHECK(c.u[1] == step.action.u[1]);
  }
}

TEST_CASE("trajectory csv log") {
  const OccupancyGrid g = empty_grid(10.0);
  EpisodeConfig cfg;
  cfg.max_episode_time = 1.0;
  const ConstantPolicy p(RobotKind::DiffDrive, {RobotKind::DiffDrive, {0.5, 0.1}},
                         test_lidar());
  Rng rng(9);
  const RewardWeights w = make_default_reward_weights(RobotKind::DiffDrive);
  const RolloutResult r = rollout(p, g, dd_state(5, 5), {{9.0, 9.0}, 0.5}, cfg, rng, &w);
  const std::string path = temp_path(".csv");
  write_trajectory_csv(r, path);
  const std::string contents = read_file(path);
  CHECK(contents.substr(0, 2) == "t,");
  CHECK(std::count(contents.begin(), contents.end(), '\n') == 11);  // header + 10 steps
  std::filesystem::remove(path);
}

TEST_CASE("learned policy scales tanh outputs into the action box") {
  NeuralNet actor({11, 8, 2}, OutputActivation::Tanh, 0.0, 3);
  LidarConfig lidar;
  lidar.n_beams = 2;
  LearnedPolicy p(RobotKind::Asteroid, std::move(actor), std::nullopt, lidar, {});
  FrameStack st;
  st.push({1.0, 1.0});
  RobotState s;
  s.kind = RobotKind::Asteroid;
  const Observation o = make_observation(s, GoalSpec{}, st);
  const RobotAction a = p.act(o);
  const ActionBounds b = action_bounds(RobotKind::Asteroid);
  CHECK(a.u[0] >= b.lo[0]);
  CHECK(a.u[0] <= b.hi[0]);
  CHECK(a.u[1] >= b.lo[1]);
  CHECK(a.u[1] <= b.hi[1]);
}

TEST_CASE("policy checkpoint round-trips") {
  NeuralNet actor({11, 8, 2}, OutputActivation::Tanh, 0.0, 4);
  NeuralNet critic({13, 8, 1}, OutputActivation::Identity, 0.0, 5);
  LidarConfig lidar;
  lidar.n_beams = 2;
  lidar.max_range = 4.0;
  NormalizationConfig norm{4.0, 12.0};
  LearnedPolicy p(RobotKind::DiffDrive, std::move(actor), critic, lidar, norm, 42);

  const std::string prefix = temp_path("");
  save_policy(p, prefix);
  const LearnedPolicy loaded = load_policy(prefix);
  CHECK(loaded.robot_kind() == RobotKind::DiffDrive);
  CHECK(loaded.lidar_config().n_beams == 2);
  CHECK(loaded.normalization().position_scale == 12.0);
  CHECK(loaded.training_seed() == 42);
  REQUIRE(loaded.critic() != nullptr);

  FrameStack st;
  st.push({1.0, 2.0});
  RobotState s;
  s.kind = RobotKind::DiffDrive;
  const Observation o = make_observation(s, GoalSpec{{3, 1}, 0.5}, st);
  CHECK(loaded.act(o).u == p.act(o).u);
  CHECK(loaded.critic_value(o) == p.critic_value(o));
  for (const char* suffix : {".actor.wts", ".critic.wts", ".json"})
    std::filesystem::remove(prefix + suffix);
}
