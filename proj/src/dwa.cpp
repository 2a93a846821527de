#include <limits>
#include <stdexcept>

#include "kinoplan/policy.hpp"

namespace kinoplan {

std::vector<Vec2> scan_to_points(const std::vector<double>& scan, const LidarConfig& cfg) {
  std::vector<Vec2> points;
  points.reserve(scan.size());
  const double beam_step = cfg.field_of_view / static_cast<double>(scan.size());
  for (size_t i = 0; i < scan.size(); ++i) {
    const double r = scan[i];
    if (r >= cfg.max_range * 0.999) continue;  // no return on this beam
    const double a = beam_step * static_cast<double>(i);
    points.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return points;
}

namespace {

std::vector<DwaCandidate> score_band(double v_lo, double v_hi, const Vec2& goal_body,
                                     const std::vector<Vec2>& obstacles_body,
                                     const DwaConfig& cfg, bool enable_clearance) {
  std::vector<DwaCandidate> out;
  out.reserve(static_cast<size_t>(cfg.n_speed) * cfg.n_turn);
  const int steps = std::max(1, static_cast<int>(std::llround(cfg.sim_time / cfg.dt)));

  // Current clearance caps the admissibility threshold (floored at the robot
  // radius): in a tight spot a motion that does not get any closer (rotating
  // in place, sliding along a wall) must stay admissible or the controller
  // deadlocks, while anything sensed inside the radius is a real collision.
  double current = std::numeric_limits<double>::infinity();
  for (const Vec2& p : obstacles_body) current = std::min(current, p.norm());
  const double min_clear =
      clamp(current, cfg.robot_radius, cfg.robot_radius + cfg.safety_margin);

  for (int iv = 0; iv < cfg.n_speed; ++iv) {
    const double v = v_lo + (v_hi - v_lo) * iv / std::max(1, cfg.n_speed - 1);
    for (int iw = 0; iw < cfg.n_turn; ++iw) {
      const double w = -kDiffDriveMaxTurnRate +
                       2.0 * kDiffDriveMaxTurnRate * iw / std::max(1, cfg.n_turn - 1);
      DwaCandidate c;
      c.action = {RobotKind::DiffDrive, {v, w}};

      // Forward-simulate the arc in the body frame.
      double x = 0.0, y = 0.0, th = 0.0;
      double clearance = std::numeric_limits<double>::infinity();
      bool collides = false;
      for (int k = 0; k < steps && !collides; ++k) {
        th += w * cfg.dt;
        x += v * std::cos(th) * cfg.dt;
        y += v * std::sin(th) * cfg.dt;
        for (const Vec2& p : obstacles_body) {
          const double d = std::hypot(p.x - x, p.y - y);
          clearance = std::min(clearance, d);
          if (d < min_clear) {
            collides = true;
            break;
          }
        }
      }
      c.admissible = !collides;
      if (!c.admissible) {
        out.push_back(c);
        continue;
      }

      const double goal_ang = std::atan2(goal_body.y - y, goal_body.x - x);
      c.heading_score = (M_PI - std::abs(wrap_angle(goal_ang - th))) / M_PI;
      c.velocity_score = std::max(v, 0.0) / kDiffDriveMaxSpeed;
      if (enable_clearance) {
        const double cl = obstacles_body.empty() ? cfg.clearance_cap
                                                 : clamp(clearance - cfg.robot_radius, 0.0,
                                                         cfg.clearance_cap);
        c.clearance_score = cl / cfg.clearance_cap;
      }
      c.total = cfg.w_heading * c.heading_score + cfg.w_velocity * c.velocity_score +
                (enable_clearance ? cfg.w_clearance * c.clearance_score : 0.0);
      out.push_back(c);
    }
  }
  return out;
}

const DwaCandidate* best_admissible(const std::vector<DwaCandidate>& window) {
  const DwaCandidate* best = nullptr;
  for (const auto& c : window) {
    if (!c.admissible) continue;
    // Full stop is the blocked-window fallback, never a winning choice.
    if (c.action.u[0] == 0.0 && c.action.u[1] == 0.0) continue;
    if (best == nullptr || c.total > best->total) best = &c;
  }
  return best;
}

RobotAction choose(const Vec2& goal_body, const std::vector<Vec2>& obstacles_body,
                   const DwaConfig& cfg, bool enable_clearance) {
  const auto forward =
      score_band(0.0, kDiffDriveMaxSpeed, goal_body, obstacles_body, cfg, enable_clearance);
  if (const DwaCandidate* best = best_admissible(forward)) return best->action;
  // Escape mode: every forward arc collides, so try backing out.
  if (cfg.min_speed < 0.0) {
    const auto reverse =
        score_band(cfg.min_speed, 0.0, goal_body, obstacles_body, cfg, enable_clearance);
    if (const DwaCandidate* best = best_admissible(reverse)) return best->action;
  }
  return {RobotKind::DiffDrive, {0.0, 0.0}};  // no safe motion at all
}

}  // namespace

std::vector<DwaCandidate> dwa_score_window(const Vec2& goal_body,
                                           const std::vector<Vec2>& obstacles_body,
                                           const DwaConfig& cfg, bool enable_clearance) {
  return score_band(0.0, kDiffDriveMaxSpeed, goal_body, obstacles_body, cfg,
                    enable_clearance);
}

RobotAction dwa_act(const RobotState& state, const Vec2& goal,
                    const std::vector<double>& scan, const LidarConfig& lidar,
                    const DwaConfig& cfg, bool enable_clearance) {
  if (state.kind != RobotKind::DiffDrive)
    throw std::invalid_argument("dwa_act: differential drive only");
  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const double dx = goal.x - state.x;
  const double dy = goal.y - state.y;
  const Vec2 goal_body{c * dx + s * dy, -s * dx + c * dy};
  return choose(goal_body, scan_to_points(scan, lidar), cfg, enable_clearance);
}

RobotAction DwaPolicy::act(const Observation& o) const {
  if (o.kind != RobotKind::DiffDrive)
    throw std::invalid_argument("DwaPolicy: differential drive only");
  std::vector<double> newest(o.values.begin() + static_cast<long>(2) * o.n_beams,
                             o.values.begin() + static_cast<long>(3) * o.n_beams);
  const Vec2 goal_body{o.rel_goal_x(), o.rel_goal_y()};
  return choose(goal_body, scan_to_points(newest, lidar_), cfg_, enable_clearance_);
}

}  // namespace kinoplan
