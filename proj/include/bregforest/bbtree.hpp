#pragma once

#include <cstdint>
#include <vector>

#include "bregforest/divergence.hpp"
#include "bregforest/page_store.hpp"
#include "bregforest/types.hpp"

namespace bregforest {

// {x : D_f(x, center) <= radius}
struct BregmanBall {
  VectorXd center;
  double radius = 0.0;
};

enum class BallRangeRelation : std::uint8_t { kDisjoint, kIntersects, kContained };

struct RelationOptions {
  int max_iterations = 20;
  double tolerance = 1e-6;
  // Relative margin a bound must clear before a node is pruned or accepted
  // wholesale; absorbs rounding in the bound evaluation.
  double slack = 1e-9;
};

/// Relation between a Bregman ball and the range {x : D_f(x, q) <= r}.
///
/// Both tests walk the dual-space curve x(t) = grad_inverse(grad f(q) +
/// t (grad f(center) - grad f(q))). For t in [0, 1] every point of the curve
/// yields a Lagrangian lower bound on min over the ball of D_f(x, q); for
/// t > 1 it yields an upper bound on the maximum. The secant/bisection search
/// only sharpens the multiplier, so "disjoint" and "contained" hold whatever
/// point the search stops at. Anything not proven is "intersects".
BallRangeRelation ball_range_relation(const BregmanBall& ball, const Eigen::Ref<const VectorXd>& q, double r,
                                      const DivergenceSpec& spec, const RelationOptions& options = {});

struct BBTreeNode {
  BregmanBall ball;
  // Children are node indices; -1 on leaves.
  Index left = -1;
  Index right = -1;
  // Range of leaf-order entries under this node.
  Index begin = 0;
  Index end = 0;

  bool is_leaf() const { return left < 0; }
  Index size() const { return end - begin; }
};

/// Binary Bregman ball tree over one subspace. Entries are stored in leaf
/// order: `ids[i]`, `points.row(i)` and (inside a forest) `addresses[i]`
/// describe the same record. Node 0 is the root.
struct BBTree {
  explicit BBTree(DivergenceSpec subspace_spec) : spec(std::move(subspace_spec)) {}

  DivergenceSpec spec;
  std::vector<BBTreeNode> nodes;
  std::vector<RecordId> ids;
  RowMatrix<float> points;
  std::vector<PointAddress> addresses;

  Index leaf_count() const;
  Index depth() const;
};

struct TreeBuildOptions {
  Index leaf_capacity = 64;
  int max_kmeans_iterations = 50;
  std::uint64_t seed = 0;
};

/// Recursive Bregman 2-means. Centroids are arithmetic means; a node becomes a
/// leaf when it holds at most `leaf_capacity` records or the split cannot
/// separate them. `spec` applies to the subspace columns.
BBTree build_tree(const RowMatrix<float>& subspace_data, const DivergenceSpec& spec, const TreeBuildOptions& options);

struct RangeQueryStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t nodes_pruned = 0;
  std::uint64_t nodes_contained = 0;
  std::uint64_t distance_checks = 0;
};

/// Leaf-order positions of every entry with D_f(x, q) <= r. "contained" nodes
/// are taken whole; leaves reached as "intersects" are checked per record.
std::vector<Index> range_query_positions(const BBTree& tree, const Eigen::Ref<const VectorXd>& q, double r,
                                         const RelationOptions& options = {}, RangeQueryStats* stats = nullptr);

// Record ids of the same set.
std::vector<RecordId> range_query(const BBTree& tree, const Eigen::Ref<const VectorXd>& q, double r,
                                  const RelationOptions& options = {}, RangeQueryStats* stats = nullptr);

}  // namespace bregforest
