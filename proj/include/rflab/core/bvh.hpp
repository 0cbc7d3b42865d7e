#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rflab/core/types.hpp"

namespace rflab {

// Static AABB tree over externally owned items, referenced by index.
// Nearest-item queries take a per-item squared-distance functor so the same
// tree serves meshes, point clouds and sphere families.
template <int N> class Bvh {
 public:
  Bvh() = default;

  void build(std::vector<Box<N>> boxes) {
    boxes_ = std::move(boxes);
    order_.resize(boxes_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.clear();
    if (!boxes_.empty()) {
      nodes_.reserve(2 * boxes_.size());
      build_node(0, int(order_.size()));
    }
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return boxes_.size(); }
  Box<N> root_box() const { return nodes_.empty() ? Box<N>() : nodes_[0].box; }

  // Returns {item index, squared distance}; item_sq(i) must return the exact
  // squared distance from q to item i. `best_sq` can seed an upper bound.
  template <class ItemSq>
  std::pair<int, double> nearest_sq(const Vec<N>& q, ItemSq&& item_sq,
                                    double best_sq = kInf) const {
    int best = -1;
    if (nodes_.empty()) return {best, best_sq};
    struct Entry { int node; double lb; };
    Entry stack[64];
    int top = 0;
    stack[top++] = {0, nodes_[0].box.squaredExteriorDistance(q)};
    while (top > 0) {
      Entry e = stack[--top];
      if (e.lb > best_sq) continue;
      const Node& n = nodes_[e.node];
      if (n.is_leaf()) {
        for (int k = n.begin; k < n.end; ++k) {
          int item = order_[k];
          double d2 = item_sq(item);
          if (d2 < best_sq) {
            best_sq = d2;
            best = item;
          }
        }
        continue;
      }
      double dl = nodes_[n.left].box.squaredExteriorDistance(q);
      double dr = nodes_[n.right].box.squaredExteriorDistance(q);
      // Push the farther child first so the nearer one is explored next.
      if (dl < dr) {
        if (dr <= best_sq) stack[top++] = {n.right, dr};
        if (dl <= best_sq) stack[top++] = {n.left, dl};
      } else {
        if (dl <= best_sq) stack[top++] = {n.left, dl};
        if (dr <= best_sq) stack[top++] = {n.right, dr};
      }
    }
    return {best, best_sq};
  }

  template <class Fn> void for_each_overlap(const Box<N>& query, Fn&& fn) const {
    if (nodes_.empty()) return;
    int stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (!n.box.intersects(query)) continue;
      if (n.is_leaf()) {
        for (int k = n.begin; k < n.end; ++k)
          if (boxes_[order_[k]].intersects(query)) fn(order_[k]);
        continue;
      }
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }

 private:
  struct Node {
    Box<N> box;
    int left = -1, right = -1;
    int begin = 0, end = 0;
    bool is_leaf() const { return left < 0; }
  };

  static constexpr int kLeafSize = 4;

  int build_node(int begin, int end) {
    Node node;
    node.box.setEmpty();
    for (int k = begin; k < end; ++k) node.box.extend(boxes_[order_[k]]);
    int id = int(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    Vec<N> ext = node.box.sizes();
    int axis = 0;
    for (int i = 1; i < N; ++i)
      if (ext[i] > ext[axis]) axis = i;
    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](int a, int b) {
                       return boxes_[a].center()[axis] < boxes_[b].center()[axis];
                     });
    int l = build_node(begin, mid);
    int r = build_node(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<Box<N>> boxes_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Point cloud with nearest-neighbour queries through the Bvh.
template <int N> class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(std::vector<Vec<N>> pts) { build(std::move(pts)); }

  void build(std::vector<Vec<N>> pts) {
    points_ = std::move(pts);
    std::vector<Box<N>> boxes;
    boxes.reserve(points_.size());
    for (const auto& p : points_) boxes.emplace_back(p, p);
    tree_.build(std::move(boxes));
  }

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec<N>>& points() const { return points_; }

  std::pair<int, double> nearest_sq(const Vec<N>& q) const {
    return tree_.nearest_sq(q, [&](int i) { return (points_[i] - q).squaredNorm(); });
  }
  double distance(const Vec<N>& q) const {
    auto [i, d2] = nearest_sq(q);
    return i < 0 ? kInf : std::sqrt(d2);
  }
  template <class Fn> void for_each_in_box(const Box<N>& b, Fn&& fn) const {
    tree_.for_each_overlap(b, fn);
  }

 private:
  std::vector<Vec<N>> points_;
  Bvh<N> tree_;
};

}  // namespace rflab
