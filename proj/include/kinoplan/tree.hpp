#pragma once

#include <vector>

#include "kinoplan/dynamics.hpp"

namespace kinoplan {

struct Node {
  RobotState state;
  int parent = -1;              // -1 for the root
  Vec2 target;                  // the sampled state this extension pursued
  double arrival_time = 0.0;    // seconds from the root along the tree trajectory
  std::vector<RobotAction> action_log;  // one action per dt_policy since the parent
};

// Append-only tree over robot states with a uniform-bucket index on (x, y)
// for k-nearest queries. Exactly one root (the first added node).
class Tree {
 public:
  Tree(double extent_x, double extent_y, double cell_size = 1.0);

  int add(Node n);
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }

  // k nearest nodes to p by planar distance; ties resolved by lower node id.
  std::vector<int> k_nearest(const Vec2& p, int k) const;
  int nearest(const Vec2& p) const;

 private:
  int cell_index(const Vec2& p) const;

  std::vector<Node> nodes_;
  double cell_size_;
  int cells_x_;
  int cells_y_;
  std::vector<std::vector<int>> buckets_;
};

// True when the tree structure is a well-formed rooted tree (single root,
// acyclic parent links, parents precede children).
bool tree_is_consistent(const Tree& tree);

}  // namespace kinoplan
