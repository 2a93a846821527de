#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "kinoplan/bench.hpp"
#include "kinoplan/svg.hpp"
#include "test_util.hpp"

using namespace kinoplan;
using namespace kinoplan::testutil;

namespace {

LidarConfig test_lidar() {
  LidarConfig cfg;
  cfg.n_beams = 16;
  cfg.noise_sigma = 0.0;
  return cfg;
}

RobotState dd_state(double x, double y) {
  RobotState s;
  s.kind = RobotKind::DiffDrive;
  s.x = x;
  s.y = y;
  return s;
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.kind = RobotKind::DiffDrive;
  cfg.planners = {"rl-rrt-e", "sst"};
  cfg.trials = 3;
  cfg.budgets = {50, 200};
  cfg.budget_mode = BudgetMode::Iterations;
  cfg.start = dd_state(4, 4);
  cfg.goal = {15.0, 15.0};
  cfg.lidar = test_lidar();
  cfg.planner.k_c = 5;
  cfg.planner.ttr_samples = 3;
  cfg.sst.max_iterations = 0;
  return cfg;
}

class ZeroPolicy final : public LocalPlannerPolicy {
 public:
  explicit ZeroPolicy(LidarConfig lidar) : lidar_(lidar) {}
  RobotAction act(const Observation&) const override {
    return {RobotKind::DiffDrive, {0.0, 0.0}};
  }
  RobotKind robot_kind() const override { return RobotKind::DiffDrive; }
  std::string kind_tag() const override { return "zero"; }
  const LidarConfig& lidar_config() const override { return lidar_; }

 private:
  LidarConfig lidar_;
};

}  // namespace

TEST_CASE("run_experiment basics") {
  const OccupancyGrid g = empty_grid(20.0);
  const DwaPolicy policy(test_lidar(), DwaConfig{}, true);

  SUBCASE("trivial start == goal trial") {
    ExperimentConfig cfg = small_experiment();
    cfg.planners = {"rl-rrt-e"};
    cfg.trials = 1;
    cfg.start = dd_state(10, 10);
    cfg.goal = {10.0, 10.0};
    const auto records = run_experiment(cfg, g, &policy, nullptr);
    REQUIRE(records.size() == 1);
    CHECK(records[0].success);
    CHECK(records[0].finish_time == doctest::Approx(0.0));
  }
  SUBCASE("cardinality: trials x planners records") {
    ExperimentConfig cfg = small_experiment();
    const auto records = run_experiment(cfg, g, &policy, nullptr);
    CHECK(records.size() == 6);
  }
  SUBCASE("identical CSV bytes across runs in iteration mode") {
    ExperimentConfig cfg = small_experiment();
    const std::string a = records_to_csv(run_experiment(cfg, g, &policy, nullptr));
    const std::string b = records_to_csv(run_experiment(cfg, g, &policy, nullptr));
    CHECK(a == b);
  }
  SUBCASE("missing artifacts are rejected before running") {
    ExperimentConfig cfg = small_experiment();
    cfg.planners = {"rl-rrt"};
    CHECK_THROWS_AS(run_experiment(cfg, g, &policy, nullptr), std::invalid_argument);
    cfg.planners = {"rl-rrt-e"};
    CHECK_THROWS_AS(run_experiment(cfg, g, nullptr, nullptr), std::invalid_argument);
  }
}

TEST_CASE("trial record CSV round-trips") {
  std::vector<TrialRecord> records;
  TrialRecord a;
  a.planner = "sst";
  a.seed = 7;
  a.success = true;
  a.wall_time_to_first_solution = 1.25;
  a.iters_to_first_solution = 321;
  a.finish_time = 14.5;
  a.tree_size = 1000;
  a.samples_drawn = 2000;
  a.pruned_count = 0;
  records.push_back(a);
  TrialRecord b;
  b.planner = "rl-rrt";
  b.seed = 8;
  b.success = false;
  records.push_back(b);

  const std::string csv = records_to_csv(records);
  const auto parsed = records_from_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == records[0]);
  CHECK(parsed[1] == records[1]);
}

TEST_CASE("success_curve") {
  std::vector<TrialRecord> records;
  auto add = [&records](const std::string& planner, bool success, double t) {
    TrialRecord r;
    r.planner = planner;
    r.success = success;
    if (success) {
      r.wall_time_to_first_solution = t;
      r.finish_time = 1.0;
    }
    records.push_back(r);
  };

  SUBCASE("all successes at t=0 give a constant 1.0 curve") {
    for (int i = 0; i < 4; ++i) add("a", true, 0.0);
    const auto curves = success_curve(records, {0.5, 1.0, 2.0}, BudgetMode::WallTime);
    for (double v : curves.at("a")) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("no successes give a constant 0.0 curve") {
    for (int i = 0; i < 4; ++i) add("a", false, 0.0);
    const auto curves = success_curve(records, {0.5, 1.0}, BudgetMode::WallTime);
    for (double v : curves.at("a")) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("hand-built fixture matches a manual tally") {
    add("a", true, 0.4);
    add("a", true, 1.6);
    add("a", false, 0.0);
    add("a", true, 3.0);
    const auto curve = success_curve(records, {0.5, 2.0, 4.0}, BudgetMode::WallTime).at("a");
    CHECK(curve[0] == doctest::Approx(0.25));
    CHECK(curve[1] == doctest::Approx(0.50));
    CHECK(curve[2] == doctest::Approx(0.75));
    // Monotone non-decreasing and bounded.
    for (size_t i = 0; i + 1 < curve.size(); ++i) CHECK(curve[i] <= curve[i + 1]);
    for (double v : curve) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("p2p_success_by_distance") {
  EpisodeConfig cfg;
  cfg.max_episode_time = 20.0;

  SUBCASE("bins below the goal radius always succeed") {
    const OccupancyGrid tiny = empty_grid(2.0);  // forces short distances
    const ZeroPolicy zero(test_lidar());
    Rng rng(1);
    const auto bins = p2p_success_by_distance(zero, tiny, {0.0, 0.5, 3.0}, 300, cfg, rng);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].trials > 0);
    CHECK(bins[0].rate() == doctest::Approx(1.0));  // start already inside d_G
  }
  SUBCASE("a zero policy fails at far bins; DWA succeeds nearby") {
    const OccupancyGrid g = empty_grid(20.0);
    const ZeroPolicy zero(test_lidar());
    Rng rng(2);
    const auto zero_bins =
        p2p_success_by_distance(zero, g, {1.0, 5.0, 26.0}, 60, cfg, rng);
    CHECK(zero_bins[1].rate() == doctest::Approx(0.0));

    const DwaPolicy dwa(test_lidar(), DwaConfig{}, true);
    Rng rng2(3);
    const auto dwa_bins = p2p_success_by_distance(dwa, g, {1.0, 5.0}, 60, cfg, rng2);
    CHECK(dwa_bins[0].trials > 10);
    CHECK(dwa_bins[0].rate() >= 0.95);
  }
}

TEST_CASE("ttr_contour") {
  // Two rooms: the right one sealed off.
  auto rows = std::vector<std::string>(100, std::string(150, '.'));
  for (int iy = 0; iy < 100; ++iy) rows[static_cast<size_t>(iy)][100] = '#';
  const OccupancyGrid g = grid_from_rows(rows, 0.1);
  const DwaPolicy policy(test_lidar(), DwaConfig{}, true);
  TTRConfig cfg = default_ttr_config(RobotKind::DiffDrive);
  const GoalSpec goal{{4.5, 4.5}, 0.5};  // on the step-1.0 lattice

  SUBCASE("oracle field") {
    Rng rng(4);
    const ContourField field = ttr_contour_oracle(policy, g, goal, 1.0, cfg, rng);
    REQUIRE(!field.points.empty());
    bool checked_goal_cell = false;
    bool sealed_unreachable = true;
    bool near_reachable = false;
    for (size_t i = 0; i < field.points.size(); ++i) {
      if (distance(field.points[i], goal.position) < 0.5) {
        CHECK(field.value[i] <= cfg.dt + 1e-9);  // already at the goal
        checked_goal_cell = true;
      }
      if (field.points[i].x > 10.5 && !field.unreachable[i]) sealed_unreachable = false;
      if (distance(field.points[i], goal.position) < 3.0 && field.points[i].x < 10.0 &&
          !field.unreachable[i])
        near_reachable = true;
    }
    CHECK(checked_goal_cell);
    CHECK(sealed_unreachable);  // the sealed room can never reach the goal
    CHECK(near_reachable);
  }
  SUBCASE("goal in collision throws") {
    Rng rng(5);
    CHECK_THROWS_AS(ttr_contour_oracle(policy, g, {{10.05, 5.0}, 0.5}, 1.0, cfg, rng),
                    std::invalid_argument);
  }
  SUBCASE("csv export") {
    Rng rng(6);
    const ContourField field = ttr_contour_oracle(policy, g, goal, 2.0, cfg, rng);
    const std::string path = temp_path(".csv");
    write_contour_csv(field, path);
    const std::string text = read_file(path);
    CHECK(text.rfind("x,y,ttr,unreachable\n", 0) == 0);
    CHECK(static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) ==
          field.points.size() + 1);
    std::filesystem::remove(path);
  }
}

TEST_CASE("render_svg") {
  const OccupancyGrid g = empty_grid(10.0);

  SUBCASE("map-only render is well-formed") {
    const std::string path = temp_path(".svg");
    render_svg(g, {}, {}, std::nullopt, std::nullopt, path);
    const std::string text = read_file(path);
    CHECK(text.rfind("<?xml", 0) == 0);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("</svg>") != std::string::npos);
    std::filesystem::remove(path);
  }
  SUBCASE("three-node chain renders two tree edges") {
    TreeDump dump;
    dump.name = "t";
    dump.edges.push_back({{1, 1}, {2, 2}});
    dump.edges.push_back({{2, 2}, {3, 1}});
    const std::string path = temp_path(".svg");
    render_svg(g, {dump}, {}, Vec2{1, 1}, GoalSpec{{3, 1}, 0.5}, path);
    const std::string text = read_file(path);
    size_t lines = 0, pos = 0;
    while ((pos = text.find("<line", pos)) != std::string::npos) {
      ++lines;
      pos += 5;
    }
    CHECK(lines == 2);
    std::filesystem::remove(path);
  }
  SUBCASE("deterministic bytes") {
    TreeDump dump;
    dump.name = "t";
    dump.edges.push_back({{1.234567, 2.0}, {3.0, 4.0}});
    MotionPlan plan;
    plan.states = {RobotState{RobotKind::DiffDrive, 1, 1, 0, {0, 0}},
                   RobotState{RobotKind::DiffDrive, 2, 3, 0, {0, 0}}};
    const std::string p1 = temp_path(".svg");
    const std::string p2 = temp_path(".svg");
    render_svg(g, {dump}, {plan}, Vec2{1, 1}, GoalSpec{{2, 3}, 0.5}, p1);
    render_svg(g, {dump}, {plan}, Vec2{1, 1}, GoalSpec{{2, 3}, 0.5}, p2);
    CHECK(read_file(p1) == read_file(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
  }
}

TEST_CASE("critic_vs_ttr_report") {
  LidarConfig lidar = test_lidar();
  lidar.n_beams = 2;
  const int obs_dim = 3 * 2 + 5;

  NeuralNet actor({obs_dim, 4, 2}, OutputActivation::Tanh, 0.0, 1);
  NeuralNet critic({obs_dim + 2, 4, 1}, OutputActivation::Identity, 0.0, 2);
  // Constant critic: zero weights, bias -3 at the head.
  for (size_t l = 0; l < critic.n_layers(); ++l)
    std::fill(critic.weights(l).begin(), critic.weights(l).end(), 0.0);
  critic.biases(critic.n_layers() - 1)[0] = -3.0;

  LearnedPolicy policy(RobotKind::DiffDrive, actor, critic, lidar, {});
  ReachabilityEstimator est;
  est.kind = RobotKind::DiffDrive;
  est.norm = {5.0, 10.0};
  est.lidar = lidar;
  est.net = NeuralNet({obs_dim, 4, 1}, OutputActivation::Identity, 0.0, 3);

  const OccupancyGrid g = empty_grid(10.0);
  EpisodeConfig cfg;
  cfg.max_episode_time = 2.0;
  Rng rng(4);
  RobotState start;
  start.kind = RobotKind::DiffDrive;
  start.x = start.y = 5.0;
  const RolloutResult traj = rollout(policy, g, start, {{9.0, 9.0}, 0.5}, cfg, rng);

  const auto report = critic_vs_ttr_report(policy, est, {traj});
  REQUIRE(report.size() == 1);
  CHECK(report[0].size() == traj.steps.size());
  for (const auto& [ttr, neg_v] : report[0]) {
    CHECK(neg_v == doctest::Approx(3.0));  // constant critic
    CHECK(std::isfinite(ttr));
  }

  // Scripted policies carry no critic.
  const DwaPolicy dwa(lidar, DwaConfig{}, true);
  (void)dwa;
  LearnedPolicy no_critic(RobotKind::DiffDrive, actor, std::nullopt, lidar, {});
  CHECK_THROWS_AS(critic_vs_ttr_report(no_critic, est, {traj}), std::invalid_argument);
}
