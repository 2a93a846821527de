#include "kinoplan/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kinoplan {

Tree::Tree(double extent_x, double extent_y, double cell_size)
    : cell_size_(cell_size > 0.0 ? cell_size : 1.0) {
  cells_x_ = std::max(1, static_cast<int>(std::ceil(extent_x / cell_size_)));
  cells_y_ = std::max(1, static_cast<int>(std::ceil(extent_y / cell_size_)));
  buckets_.resize(static_cast<size_t>(cells_x_) * cells_y_);
}

int Tree::cell_index(const Vec2& p) const {
  int cx = static_cast<int>(std::floor(p.x / cell_size_));
  int cy = static_cast<int>(std::floor(p.y / cell_size_));
  cx = std::min(std::max(cx, 0), cells_x_ - 1);
  cy = std::min(std::max(cy, 0), cells_y_ - 1);
  return cy * cells_x_ + cx;
}

int Tree::add(Node n) {
  if (nodes_.empty()) {
    if (n.parent != -1) throw std::invalid_argument("Tree: first node must be the root");
  } else if (n.parent < 0 || n.parent >= size()) {
    throw std::invalid_argument("Tree: parent id out of range");
  }
  const int id = size();
  buckets_[static_cast<size_t>(cell_index(n.state.position()))].push_back(id);
  nodes_.push_back(std::move(n));
  return id;
}

std::vector<int> Tree::k_nearest(const Vec2& p, int k) const {
  std::vector<int> result;
  if (nodes_.empty() || k <= 0) return result;
  k = std::min(k, size());

  // Collect candidates ring by ring; a ring at Chebyshev cell distance d can
  // contain nothing closer than (d-1)*cell_size, which bounds the search.
  const int cx = std::min(std::max(static_cast<int>(std::floor(p.x / cell_size_)), 0),
                          cells_x_ - 1);
  const int cy = std::min(std::max(static_cast<int>(std::floor(p.y / cell_size_)), 0),
                          cells_y_ - 1);
  const int max_ring = std::max(cells_x_, cells_y_);

  std::vector<std::pair<double, int>> cand;  // (distance^2, id)
  double kth_best = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= max_ring; ++d) {
    if (cand.size() >= static_cast<size_t>(k)) {
      const double ring_min = (d - 1) * cell_size_;
      if (ring_min > 0.0 && ring_min * ring_min > kth_best) break;
    }
    for (int iy = cy - d; iy <= cy + d; ++iy) {
      if (iy < 0 || iy >= cells_y_) continue;
      for (int ix = cx - d; ix <= cx + d; ++ix) {
        if (ix < 0 || ix >= cells_x_) continue;
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != d) continue;  // ring only
        for (int id : buckets_[static_cast<size_t>(iy) * cells_x_ + ix]) {
          const Vec2 q = nodes_[static_cast<size_t>(id)].state.position();
          const double dx = q.x - p.x, dy = q.y - p.y;
          cand.push_back({dx * dx + dy * dy, id});
        }
      }
    }
    if (cand.size() >= static_cast<size_t>(k)) {
      std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
      kth_best = cand[static_cast<size_t>(k - 1)].first;
    }
  }

  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  result.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k && i < static_cast<int>(cand.size()); ++i)
    result.push_back(cand[static_cast<size_t>(i)].second);
  return result;
}

int Tree::nearest(const Vec2& p) const {
  const auto ids = k_nearest(p, 1);
  return ids.empty() ? -1 : ids[0];
}

bool tree_is_consistent(const Tree& tree) {
  if (tree.size() == 0) return true;
  for (int id = 0; id < tree.size(); ++id) {
    const Node& n = tree.node(id);
    if (id == 0) {
      if (n.parent != -1 || n.arrival_time != 0.0) return false;
    } else {
      // Parents precede children, which rules out cycles.
      if (n.parent < 0 || n.parent >= id) return false;
      if (n.arrival_time < tree.node(n.parent).arrival_time) return false;
    }
  }
  return true;
}

}  // namespace kinoplan
