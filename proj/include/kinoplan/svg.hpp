#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kinoplan/occupancy_grid.hpp"
#include "kinoplan/planner.hpp"

namespace kinoplan {

// Renders the map, any number of trees (distinct stroke per tree) and plan
// polylines, plus start/goal markers. Output bytes are deterministic for
// fixed input.
void render_svg(const OccupancyGrid& grid, const std::vector<TreeDump>& trees,
                const std::vector<MotionPlan>& plans, const std::optional<Vec2>& start,
                const std::optional<GoalSpec>& goal, const std::string& out_path);

}  // namespace kinoplan
