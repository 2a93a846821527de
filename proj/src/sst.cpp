#include "kinoplan/sst.hpp"

#include <chrono>
#include <limits>

namespace kinoplan {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Motion {
  RobotState state;
  int parent = -1;
  RobotAction control;
  long steps = 0;      // control duration in dt_policy units
  double cost = 0.0;   // accumulated duration, seconds
  int children = 0;
  bool active = true;  // eligible for selection
  bool alive = true;   // structurally present
};

struct Witness {
  Vec2 position;
  int rep = -1;
};

// Uniform-bucket point index with removal, for motions and witnesses.
class PointIndex {
 public:
  PointIndex(double extent_x, double extent_y, double cell)
      : cell_(cell > 0.0 ? cell : 1.0),
        nx_(std::max(1, static_cast<int>(std::ceil(extent_x / cell_)))),
        ny_(std::max(1, static_cast<int>(std::ceil(extent_y / cell_)))),
        buckets_(static_cast<size_t>(nx_) * ny_) {}

  void add(int id, const Vec2& p) { buckets_[cell_of(p)].push_back(id); }

  void remove(int id, const Vec2& p) {
    auto& b = buckets_[cell_of(p)];
    for (size_t i = 0; i < b.size(); ++i) {
      if (b[i] == id) {
        b[i] = b.back();
        b.pop_back();
        return;
      }
    }
  }

  template <typename Dist>
  int nearest(const Vec2& p, Dist dist) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    const int cx = clampi(static_cast<int>(std::floor(p.x / cell_)), 0, nx_ - 1);
    const int cy = clampi(static_cast<int>(std::floor(p.y / cell_)), 0, ny_ - 1);
    const int max_ring = std::max(nx_, ny_);
    for (int d = 0; d <= max_ring; ++d) {
      if (best >= 0) {
        const double ring_min = (d - 1) * cell_;
        if (ring_min > 0.0 && ring_min > best_d) break;
      }
      for (int iy = cy - d; iy <= cy + d; ++iy) {
        if (iy < 0 || iy >= ny_) continue;
        for (int ix = cx - d; ix <= cx + d; ++ix) {
          if (ix < 0 || ix >= nx_) continue;
          if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != d) continue;
          for (int id : buckets_[static_cast<size_t>(iy) * nx_ + ix]) {
            const double dd = dist(id);
            if (dd < best_d || (dd == best_d && id < best)) {
              best_d = dd;
              best = id;
            }
          }
        }
      }
    }
    return best;
  }

  template <typename Visit>
  void visit_radius(const Vec2& p, double radius, Visit visit) const {
    const int x0 = clampi(static_cast<int>(std::floor((p.x - radius) / cell_)), 0, nx_ - 1);
    const int x1 = clampi(static_cast<int>(std::floor((p.x + radius) / cell_)), 0, nx_ - 1);
    const int y0 = clampi(static_cast<int>(std::floor((p.y - radius) / cell_)), 0, ny_ - 1);
    const int y1 = clampi(static_cast<int>(std::floor((p.y + radius) / cell_)), 0, ny_ - 1);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix)
        for (int id : buckets_[static_cast<size_t>(iy) * nx_ + ix]) visit(id);
  }

 private:
  static int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
  size_t cell_of(const Vec2& p) const {
    const int cx = clampi(static_cast<int>(std::floor(p.x / cell_)), 0, nx_ - 1);
    const int cy = clampi(static_cast<int>(std::floor(p.y / cell_)), 0, ny_ - 1);
    return static_cast<size_t>(cy) * nx_ + cx;
  }

  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> buckets_;
};

RobotAction random_action(RobotKind kind, Rng& rng) {
  const ActionBounds b = action_bounds(kind);
  RobotAction a;
  a.kind = kind;
  a.u[0] = uniform(rng, b.lo[0], b.hi[0]);
  a.u[1] = uniform(rng, b.lo[1], b.hi[1]);
  return a;
}

}  // namespace

PlanResult sst_plan(const OccupancyGrid& grid, const RobotState& root, const GoalSpec& goal,
                    const SstConfig& cfg, Rng& rng, TreeDump* tree_out) {
  if (!point_free(grid, root.position(), cfg.robot_radius))
    throw std::invalid_argument("sst_plan: root state is in collision");

  Rng sample_rng(rng());
  Rng control_rng(rng());

  const auto t0 = Clock::now();
  PlanResult result;
  result.planner_name = "sst";

  std::vector<Motion> motions;
  std::vector<Witness> witnesses;
  PointIndex active_index(grid.width_m(), grid.height_m(), std::max(1.0, cfg.delta_bn / 2));
  PointIndex witness_index(grid.width_m(), grid.height_m(), std::max(0.5, cfg.delta_s));

  motions.push_back({root, -1, {root.kind, {0, 0}}, 0, 0.0, 0, true, true});
  active_index.add(0, root.position());
  witnesses.push_back({root.position(), 0});
  witness_index.add(0, root.position());

  MotionPlan best_plan;
  double best_cost = std::numeric_limits<double>::infinity();
  bool found = false;

  const long k_min = std::max<long>(1, std::llround(cfg.t_prop_min / cfg.dt_policy));
  const long k_max = std::max(k_min, static_cast<long>(std::llround(cfg.t_prop_max / cfg.dt_policy)));

  auto motion_dist = [&motions](const Vec2& p) {
    return [&motions, p](int id) {
      const Motion& m = motions[static_cast<size_t>(id)];
      if (!m.active || !m.alive) return std::numeric_limits<double>::infinity();
      return distance(m.state.position(), p);
    };
  };

  // Immediate success: the root already satisfies the goal.
  if (distance(root.position(), goal.position) <= goal.radius) {
    found = true;
    best_cost = 0.0;
    best_plan.states = {root};
    best_plan.times = {0.0};
    best_plan.finish_time = 0.0;
    result.stats.first_solution_walltime = 0.0;
    result.stats.first_solution_iteration = 0;
  }

  while (!(cfg.max_iterations > 0 && result.stats.iterations >= cfg.max_iterations) &&
         !(cfg.time_budget > 0.0 && seconds_since(t0) >= cfg.time_budget)) {
    ++result.stats.iterations;
    ++result.stats.samples_drawn;
    const RobotState x_rnd =
        sample_free_state(grid, root.kind, sample_rng, goal, cfg.p_goal_bias,
                          cfg.robot_radius);

    // Best-near selection: cheapest active motion within delta_bn, else the
    // nearest active motion.
    int selected = -1;
    double selected_cost = std::numeric_limits<double>::infinity();
    active_index.visit_radius(x_rnd.position(), cfg.delta_bn, [&](int id) {
      const Motion& m = motions[static_cast<size_t>(id)];
      if (!m.active || !m.alive) return;
      if (distance(m.state.position(), x_rnd.position()) > cfg.delta_bn) return;
      if (m.cost < selected_cost || (m.cost == selected_cost && id < selected)) {
        selected = id;
        selected_cost = m.cost;
      }
    });
    if (selected < 0) selected = active_index.nearest(x_rnd.position(), motion_dist(x_rnd.position()));
    if (selected < 0) break;  // no active motions left (cannot happen with a root)

    // Random control for a random duration, collision-checked stepwise.
    const RobotAction control = random_action(root.kind, control_rng);
    const long k = std::uniform_int_distribution<long>(k_min, k_max)(control_rng);
    RobotState state = motions[static_cast<size_t>(selected)].state;
    bool valid = true;
    for (long i = 0; i < k; ++i) {
      state = propagate(state, control, cfg.dt_policy, cfg.dynamics);
      if (!point_free(grid, state.position(), cfg.robot_radius)) {
        valid = false;
        break;
      }
    }
    if (!valid) continue;

    const double cost =
        motions[static_cast<size_t>(selected)].cost + static_cast<double>(k) * cfg.dt_policy;

    // Witness bookkeeping: keep only the cheapest motion per witness region.
    int w = witness_index.nearest(state.position(), [&witnesses, &state](int id) {
      return distance(witnesses[static_cast<size_t>(id)].position, state.position());
    });
    if (w < 0 || distance(witnesses[static_cast<size_t>(w)].position, state.position()) >
                     cfg.delta_s) {
      w = static_cast<int>(witnesses.size());
      witnesses.push_back({state.position(), -1});
      witness_index.add(w, state.position());
    }
    Witness& witness = witnesses[static_cast<size_t>(w)];
    const int old_rep = witness.rep;
    if (old_rep >= 0 && motions[static_cast<size_t>(old_rep)].cost <= cost) continue;

    const int id = static_cast<int>(motions.size());
    motions.push_back({state, selected, control, k, cost, 0, true, true});
    active_index.add(id, state.position());
    ++motions[static_cast<size_t>(selected)].children;
    witness.rep = id;

    if (distance(state.position(), goal.position) <= goal.radius && cost < best_cost) {
      best_cost = cost;
      found = true;
      if (result.stats.first_solution_iteration < 0) {
        result.stats.first_solution_walltime = seconds_since(t0);
        result.stats.first_solution_iteration = result.stats.iterations;
      }
      // Extract now; later pruning may drop these motions.
      best_plan = MotionPlan{};
      std::vector<int> chain;
      for (int cur = id; cur != -1; cur = motions[static_cast<size_t>(cur)].parent)
        chain.push_back(cur);
      std::reverse(chain.begin(), chain.end());
      for (int cur : chain) {
        const Motion& m = motions[static_cast<size_t>(cur)];
        best_plan.states.push_back(m.state);
        best_plan.times.push_back(m.cost);
        for (long s = 0; s < m.steps; ++s) best_plan.actions.push_back(m.control);
      }
      best_plan.finish_time = static_cast<double>(best_plan.actions.size()) * cfg.dt_policy;
    }

    // Deactivate the displaced representative and prune childless inactive
    // chains.
    if (old_rep >= 0) {
      Motion& displaced = motions[static_cast<size_t>(old_rep)];
      displaced.active = false;
      active_index.remove(old_rep, displaced.state.position());
      int cur = old_rep;
      while (cur >= 0) {
        Motion& m = motions[static_cast<size_t>(cur)];
        if (m.active || m.children > 0 || !m.alive) break;
        m.alive = false;
        const int parent = m.parent;
        if (parent >= 0) --motions[static_cast<size_t>(parent)].children;
        cur = parent;
        if (cur >= 0 && motions[static_cast<size_t>(cur)].active) break;
      }
    }
  }

  result.stats.wall_seconds = seconds_since(t0);
  long alive = 0;
  for (const Motion& m : motions)
    if (m.alive) ++alive;
  result.stats.tree_size = alive;
  result.success = found;
  if (found) result.plan = best_plan;

  if (tree_out != nullptr) {
    tree_out->name = "sst";
    tree_out->edges.clear();
    for (const Motion& m : motions) {
      if (!m.alive || m.parent < 0) continue;
      if (!motions[static_cast<size_t>(m.parent)].alive) continue;
      tree_out->edges.push_back(
          {motions[static_cast<size_t>(m.parent)].state.position(), m.state.position()});
    }
  }
  return result;
}

}  // namespace kinoplan
