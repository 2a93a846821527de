#include "kinoplan/svg.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kinoplan {

namespace {

const char* kTreeColors[] = {"#e6b800", "#3366cc", "#cc3366", "#33aa55", "#8844cc"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

void render_svg(const OccupancyGrid& grid, const std::vector<TreeDump>& trees,
                const std::vector<MotionPlan>& plans, const std::optional<Vec2>& start,
                const std::optional<GoalSpec>& goal, const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error(out_path + ": cannot open for writing");

  const double W = grid.width_m();
  const double H = grid.height_m();
  auto Y = [H](double y) { return H - y; };  // SVG y axis points down

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(W) << " "
      << fmt(H) << "\" width=\"800\" height=\"" << fmt(800.0 * H / W) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
      << "\" fill=\"#ffffff\"/>\n";

  // Obstacles, merged into horizontal runs per row.
  const double res = grid.resolution();
  out << "<g fill=\"#222222\">\n";
  for (int iy = 0; iy < grid.height_cells(); ++iy) {
    int run_start = -1;
    for (int ix = 0; ix <= grid.width_cells(); ++ix) {
      const bool occ = ix < grid.width_cells() && grid.occupied(ix, iy);
      if (occ && run_start < 0) run_start = ix;
      if (!occ && run_start >= 0) {
        out << "<rect x=\"" << fmt(run_start * res) << "\" y=\"" << fmt(Y((iy + 1) * res))
            << "\" width=\"" << fmt((ix - run_start) * res) << "\" height=\"" << fmt(res)
            << "\"/>\n";
        run_start = -1;
      }
    }
  }
  out << "</g>\n";

  for (size_t t = 0; t < trees.size(); ++t) {
    out << "<g stroke=\"" << kTreeColors[t % 5]
        << "\" stroke-width=\"0.04\" fill=\"none\" stroke-opacity=\"0.8\">\n";
    for (const auto& e : trees[t].edges)
      out << "<line x1=\"" << fmt(e.a.x) << "\" y1=\"" << fmt(Y(e.a.y)) << "\" x2=\""
          << fmt(e.b.x) << "\" y2=\"" << fmt(Y(e.b.y)) << "\"/>\n";
    out << "</g>\n";
  }

  for (const auto& plan : plans) {
    out << "<polyline fill=\"none\" stroke=\"#dd2222\" stroke-width=\"0.12\" points=\"";
    for (size_t i = 0; i < plan.states.size(); ++i) {
      if (i > 0) out << " ";
      out << fmt(plan.states[i].x) << "," << fmt(Y(plan.states[i].y));
    }
    out << "\"/>\n";
  }

  if (start) {
    out << "<circle cx=\"" << fmt(start->x) << "\" cy=\"" << fmt(Y(start->y))
        << "\" r=\"0.3\" fill=\"#11aa11\"/>\n";
  }
  if (goal) {
    out << "<circle cx=\"" << fmt(goal->position.x) << "\" cy=\"" << fmt(Y(goal->position.y))
        << "\" r=\"" << fmt(goal->radius)
        << "\" fill=\"none\" stroke=\"#1155dd\" stroke-width=\"0.08\"/>\n";
    out << "<circle cx=\"" << fmt(goal->position.x) << "\" cy=\"" << fmt(Y(goal->position.y))
        << "\" r=\"0.15\" fill=\"#1155dd\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error(out_path + ": write failed");
}

}  // namespace kinoplan
