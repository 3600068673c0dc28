#include "bregforest/bbtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "bregforest/error.hpp"
#include "bregforest/root_find.hpp"

namespace bregforest {

namespace {

// A 2-means split leaving less than 1/kMinSplitShare of the records on one
// side is replaced by a median cut.
constexpr std::size_t kMinSplitShare = 8;

// Points grad_inverse(grad_q + t * (grad_c - grad_q)).
class DualCurve {
 public:
  DualCurve(const DivergenceSpec& spec, const VectorXd& grad_q, const VectorXd& step)
      : spec_(spec), grad_q_(grad_q), step_(step), x_(grad_q.size()) {}

  // False when some coordinate leaves the range of the gradient.
  bool at(double t) {
    for (Index i = 0; i < x_.size(); ++i) {
      const double s = grad_q_[i] + t * step_[i];
      if (!spec_.in_grad_range(s)) return false;
      x_[i] = spec_.grad_inverse_unchecked(i, s);
      if (!spec_.in_domain(x_[i])) return false;
    }
    return true;
  }

  const VectorXd& point() const { return x_; }

 private:
  const DivergenceSpec& spec_;
  const VectorXd& grad_q_;
  const VectorXd& step_;
  VectorXd x_;
};

// Largest t for which the curve stays inside the gradient's range.
double curve_limit(const DivergenceSpec& spec, const VectorXd& grad_q, const VectorXd& step) {
  double limit = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < grad_q.size(); ++i) {
    if (spec.kind() == DivergenceKind::kItakuraSaito && step[i] > 0.0) {
      limit = std::min(limit, -grad_q[i] / step[i]);
    } else if (spec.kind() == DivergenceKind::kExponential && step[i] < 0.0) {
      limit = std::min(limit, grad_q[i] / -step[i]);
    }
  }
  return limit;
}

bool proves_disjoint(const BregmanBall& ball, const Eigen::Ref<const VectorXd>& q, double r, double tol,
                     const DivergenceSpec& spec, DualCurve& curve, const RelationOptions& options) {
  const double radius = ball.radius;
  const double d_qc = bregman_distance_unchecked(spec, q, ball.center);
  if (d_qc <= radius) return false;  // q lies inside the ball

  auto excess = [&](double t) {
    if (!curve.at(t)) return std::numeric_limits<double>::quiet_NaN();
    return bregman_distance_unchecked(spec, curve.point(), ball.center) - radius;
  };
  const RootBracket bracket =
      secant_bisection(excess, 0.0, 1.0, d_qc - radius, -radius, options.max_iterations, options.tolerance);

  double lower_bound = 0.0;
  for (double t : {bracket.lower, bracket.upper}) {
    if (!(t > 0.0 && t < 1.0) || !curve.at(t)) continue;
    const double to_query = bregman_distance_unchecked(spec, curve.point(), q);
    const double to_center = bregman_distance_unchecked(spec, curve.point(), ball.center);
    const double multiplier = t / (1.0 - t);
    const double bound = to_query + multiplier * (to_center - radius);
    if (std::isfinite(bound)) lower_bound = std::max(lower_bound, bound);
    // A point of the ball already inside the range settles it.
    if (to_center <= radius && to_query <= r) return false;
  }
  return lower_bound > r + tol;
}

bool proves_contained(const BregmanBall& ball, const Eigen::Ref<const VectorXd>& q, double r, double tol,
                      const DivergenceSpec& spec, DualCurve& curve, const VectorXd& grad_q, const VectorXd& step,
                      const RelationOptions& options) {
  const double radius = ball.radius;
  // Parameterise by s = t - 1 > 0, i.e. beyond the centre away from q.
  auto excess = [&](double s) {
    if (!curve.at(1.0 + s)) return std::numeric_limits<double>::quiet_NaN();
    return bregman_distance_unchecked(spec, curve.point(), ball.center) - radius;
  };

  const double limit = curve_limit(spec, grad_q, step) - 1.0;
  double s_hi = std::isfinite(limit) ? 0.5 * limit : 1.0;
  double f_hi = excess(s_hi);
  for (int i = 0; i < 64 && !(f_hi > 0.0); ++i) {
    s_hi = std::isfinite(limit) ? 0.5 * (s_hi + limit) : 2.0 * s_hi;
    f_hi = excess(s_hi);
  }
  if (!(f_hi > 0.0)) return false;

  const RootBracket bracket =
      secant_bisection(excess, 0.0, s_hi, -radius, f_hi, options.max_iterations, options.tolerance);

  double upper_bound = std::numeric_limits<double>::infinity();
  for (double s : {bracket.lower, bracket.upper}) {
    if (!(s > 0.0) || !curve.at(1.0 + s)) continue;
    const double to_query = bregman_distance_unchecked(spec, curve.point(), q);
    const double to_center = bregman_distance_unchecked(spec, curve.point(), ball.center);
    const double multiplier = 1.0 + 1.0 / s;
    const double bound = to_query - multiplier * (to_center - radius);
    if (std::isfinite(bound)) upper_bound = std::min(upper_bound, bound);
  }
  return upper_bound <= r - tol;
}

}  // namespace

namespace {

bool quadratic(const DivergenceSpec& spec) {
  return spec.kind() == DivergenceKind::kSquaredEuclidean || spec.kind() == DivergenceKind::kDiagonalMahalanobis;
}

// `grad_q` is grad f(q); unused for quadratic generators.
BallRangeRelation relation(const BregmanBall& ball, const Eigen::Ref<const VectorXd>& q, const VectorXd& grad_q,
                           double r, const DivergenceSpec& spec, const RelationOptions& options) {
  if (std::isnan(r)) return BallRangeRelation::kIntersects;

  const double d_cq = bregman_distance_unchecked(spec, ball.center, q);
  const double radius = ball.radius;
  if (radius <= 0.0) {
    // A point ball: its only member is the centre.
    return d_cq <= r ? BallRangeRelation::kContained : BallRangeRelation::kDisjoint;
  }
  const double tol = options.slack * (std::abs(r) + radius + std::abs(d_cq)) + std::numeric_limits<double>::min();

  if (quadratic(spec)) {
    // sqrt(D) is a norm here, so the extremes over the ball are closed-form.
    const double gap = std::sqrt(d_cq);
    const double reach = std::sqrt(radius);
    const double nearest = std::max(0.0, gap - reach);
    if (nearest * nearest > r + tol) return BallRangeRelation::kDisjoint;
    if ((gap + reach) * (gap + reach) <= r - tol) return BallRangeRelation::kContained;
    return BallRangeRelation::kIntersects;
  }

  VectorXd step(q.size());
  for (Index i = 0; i < q.size(); ++i) step[i] = spec.grad_unchecked(i, ball.center[i]) - grad_q[i];
  if (step.isZero(0.0)) {
    // q coincides with the centre: min is 0, max is the radius.
    return radius <= r - tol ? BallRangeRelation::kContained : BallRangeRelation::kIntersects;
  }

  DualCurve curve(spec, grad_q, step);
  if (d_cq > r) {
    return proves_disjoint(ball, q, r, tol, spec, curve, options) ? BallRangeRelation::kDisjoint
                                                                   : BallRangeRelation::kIntersects;
  }
  if (d_cq <= r - tol && proves_contained(ball, q, r, tol, spec, curve, grad_q, step, options)) {
    return BallRangeRelation::kContained;
  }
  return BallRangeRelation::kIntersects;
}

VectorXd query_gradient(const DivergenceSpec& spec, const Eigen::Ref<const VectorXd>& q) {
  VectorXd grad(q.size());
  if (!quadratic(spec)) {
    for (Index i = 0; i < q.size(); ++i) grad[i] = spec.grad_unchecked(i, q[i]);
  }
  return grad;
}

}  // namespace

BallRangeRelation ball_range_relation(const BregmanBall& ball, const Eigen::Ref<const VectorXd>& q, double r,
                                      const DivergenceSpec& spec, const RelationOptions& options) {
  if (ball.center.size() != q.size()) throw InvalidArgument("ball_range_relation: dimension mismatch");
  return relation(ball, q, query_gradient(spec, q), r, spec, options);
}

Index BBTree::leaf_count() const {
  return static_cast<Index>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

Index BBTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<Index, Index>> stack{{0, 1}};
  Index deepest = 0;
  while (!stack.empty()) {
    const auto [node, level] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, level);
    const auto& n = nodes[static_cast<std::size_t>(node)];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, level + 1);
      stack.emplace_back(n.right, level + 1);
    }
  }
  return deepest;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const RowMatrix<float>& data, const DivergenceSpec& spec, const TreeBuildOptions& options)
      : data_(data),
        spec_(spec),
        options_(options),
        rng_(options.seed),
        order_(static_cast<std::size_t>(data.rows())),
        value_sum_(data.rows()) {
    std::iota(order_.begin(), order_.end(), Index{0});
    for (Index r = 0; r < data.rows(); ++r) {
      double sum = 0.0;
      for (Index i = 0; i < data.cols(); ++i) sum += spec.value_unchecked(i, data(r, i));
      value_sum_[r] = sum;
    }
  }

  BBTree build() {
    BBTree tree(spec_);
    struct Task {
      Index node;
      Index begin;
      Index end;
    };
    tree.nodes.emplace_back();
    std::vector<Task> stack{{0, 0, data_.rows()}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      BBTreeNode node;
      node.begin = task.begin;
      node.end = task.end;
      const bool identical = make_ball(task.begin, task.end, node.ball);
      Index mid = -1;
      if (!identical && task.end - task.begin > options_.leaf_capacity) mid = split(task.begin, task.end);
      if (mid > task.begin && mid < task.end) {
        node.left = static_cast<Index>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stack.push_back({node.right, mid, task.end});
        stack.push_back({node.left, task.begin, mid});
      }
      tree.nodes[static_cast<std::size_t>(task.node)] = std::move(node);
    }

    tree.ids.resize(order_.size());
    tree.points.resize(data_.rows(), data_.cols());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      tree.ids[i] = static_cast<RecordId>(order_[i]);
      tree.points.row(static_cast<Index>(i)) = data_.row(order_[i]);
    }
    return tree;
  }

 private:
  // D(x, c) = sum f(x) + offset - grad . x with grad = f'(c) and
  // offset = sum (c f'(c) - f(c)); only steers the splits.
  struct Anchor {
    VectorXd grad;
    double offset = 0.0;
  };

  Anchor anchor(const VectorXd& center) const {
    Anchor a{VectorXd(center.size()), 0.0};
    for (Index i = 0; i < center.size(); ++i) {
      a.grad[i] = spec_.grad_unchecked(i, center[i]);
      a.offset += center[i] * a.grad[i] - spec_.value_unchecked(i, center[i]);
    }
    return a;
  }

  double distance_to(Index record, const Anchor& a) const {
    return value_sum_[record] + a.offset - data_.row(record).cast<double>().dot(a.grad.transpose());
  }

  double distance_to(Index record, const VectorXd& center) const {
    return bregman_distance_unchecked(spec_, data_.row(record).transpose(), center);
  }

  // Returns true when every record in the range is identical.
  bool make_ball(Index begin, Index end, BregmanBall& ball) const {
    const Index first = order_[static_cast<std::size_t>(begin)];
    bool identical = true;
    VectorXd sum = VectorXd::Zero(data_.cols());
    for (Index i = begin; i < end; ++i) {
      const Index rec = order_[static_cast<std::size_t>(i)];
      sum += data_.row(rec).cast<double>().transpose();
      identical = identical && data_.row(rec) == data_.row(first);
    }
    if (identical) {
      ball.center = data_.row(first).cast<double>().transpose();
      ball.radius = 0.0;
      return true;
    }
    ball.center = sum / static_cast<double>(end - begin);
    double radius = 0.0;
    for (Index i = begin; i < end; ++i) radius = std::max(radius, distance_to(order_[static_cast<std::size_t>(i)], ball.center));
    // Distinct records must never look like a point ball.
    ball.radius = radius > 0.0 ? radius : std::numeric_limits<double>::min();
    return false;
  }

  Index farthest_from(Index begin, Index end, const VectorXd& center) const {
    const Anchor a = anchor(center);
    Index best = order_[static_cast<std::size_t>(begin)];
    double best_distance = -1.0;
    for (Index i = begin; i < end; ++i) {
      const Index rec = order_[static_cast<std::size_t>(i)];
      const double dist = distance_to(rec, a);
      if (dist > best_distance) {
        best_distance = dist;
        best = rec;
      }
    }
    return best;
  }

  // Bregman 2-means over order_[begin, end). Returns the split point, or -1.
  Index split(Index begin, Index end) {
    std::uniform_int_distribution<Index> pick(begin, end - 1);
    const Index start = order_[static_cast<std::size_t>(pick(rng_))];
    const Index a = farthest_from(begin, end, data_.row(start).cast<double>().transpose());
    const Index b = farthest_from(begin, end, data_.row(a).cast<double>().transpose());
    std::array<VectorXd, 2> centers{data_.row(a).cast<double>().transpose(), data_.row(b).cast<double>().transpose()};
    if (centers[0] == centers[1]) return -1;

    const auto count = static_cast<std::size_t>(end - begin);
    std::vector<std::uint8_t> label(count, 0);
    auto assign = [&]() {
      const std::array<Anchor, 2> anchors{anchor(centers[0]), anchor(centers[1])};
      bool changed = false;
      for (std::size_t i = 0; i < count; ++i) {
        const Index rec = order_[static_cast<std::size_t>(begin) + i];
        const std::uint8_t next = distance_to(rec, anchors[1]) < distance_to(rec, anchors[0]) ? 1 : 0;
        changed = changed || next != label[i];
        label[i] = next;
      }
      return changed;
    };
    assign();
    for (int iter = 0; iter < options_.max_kmeans_iterations; ++iter) {
      std::array<Index, 2> sizes{0, 0};
      for (auto l : label) ++sizes[l];
      if (sizes[0] == 0 || sizes[1] == 0) {
        // Steal the record farthest from the non-empty cluster's centre.
        const std::uint8_t full = sizes[0] == 0 ? 1 : 0;
        const Anchor a = anchor(centers[full]);
        std::size_t steal = 0;
        double steal_distance = -1.0;
        for (std::size_t i = 0; i < count; ++i) {
          const double dist = distance_to(order_[static_cast<std::size_t>(begin) + i], a);
          if (label[i] == full && dist > steal_distance) {
            steal_distance = dist;
            steal = i;
          }
        }
        label[steal] = static_cast<std::uint8_t>(1 - full);
      }
      for (int c = 0; c < 2; ++c) {
        VectorXd sum = VectorXd::Zero(data_.cols());
        Index members = 0;
        for (std::size_t i = 0; i < count; ++i) {
          if (label[i] != c) continue;
          sum += data_.row(order_[static_cast<std::size_t>(begin) + i]).cast<double>().transpose();
          ++members;
        }
        if (members > 0) centers[static_cast<std::size_t>(c)] = sum / static_cast<double>(members);
      }
      if (!assign()) break;
    }

    std::size_t ones = 0;
    for (auto l : label) ones += l;
    if (std::min(ones, count - ones) * kMinSplitShare < count) {
      // Lopsided split (extreme coordinates dominate the divergence): cut at
      // the median of the same score, i.e. shift the bisector.
      const std::array<Anchor, 2> anchors{anchor(centers[0]), anchor(centers[1])};
      std::vector<std::pair<double, std::size_t>> score(count);
      for (std::size_t i = 0; i < count; ++i) {
        const Index rec = order_[static_cast<std::size_t>(begin) + i];
        score[i] = {distance_to(rec, anchors[0]) - distance_to(rec, anchors[1]), i};
      }
      const auto mid = score.begin() + static_cast<std::ptrdiff_t>(count / 2);
      std::nth_element(score.begin(), mid, score.end());
      for (auto it = score.begin(); it != score.end(); ++it) label[it->second] = it < mid ? 0 : 1;
    }

    std::vector<Index> left;
    std::vector<Index> right;
    for (std::size_t i = 0; i < count; ++i) {
      (label[i] == 0 ? left : right).push_back(order_[static_cast<std::size_t>(begin) + i]);
    }
    if (left.empty() || right.empty()) return -1;
    std::copy(left.begin(), left.end(), order_.begin() + begin);
    std::copy(right.begin(), right.end(), order_.begin() + begin + static_cast<Index>(left.size()));
    return begin + static_cast<Index>(left.size());
  }

  const RowMatrix<float>& data_;
  const DivergenceSpec& spec_;
  TreeBuildOptions options_;
  std::mt19937_64 rng_;
  std::vector<Index> order_;
  // sum_i f(x_i) per record
  VectorXd value_sum_;
};

}  // namespace

BBTree build_tree(const RowMatrix<float>& subspace_data, const DivergenceSpec& spec, const TreeBuildOptions& options) {
  if (subspace_data.rows() == 0) throw InvalidArgument("build_tree: empty input");
  if (subspace_data.cols() < 1) throw InvalidArgument("build_tree: subspace width must be >= 1");
  if (options.leaf_capacity < 2) throw InvalidArgument("build_tree: leaf capacity must be >= 2");
  if (spec.has_weights() && spec.weights().size() != subspace_data.cols()) {
    throw InvalidArgument("build_tree: weights do not match the subspace width");
  }
  for (Index r = 0; r < subspace_data.rows(); ++r) {
    try {
      spec.validate(subspace_data.row(r));
    } catch (const DomainError& e) {
      throw DomainError("record " + std::to_string(r) + ": " + e.what());
    }
  }
  return TreeBuilder(subspace_data, spec, options).build();
}

std::vector<Index> range_query_positions(const BBTree& tree, const Eigen::Ref<const VectorXd>& q, double r,
                                         const RelationOptions& options, RangeQueryStats* stats) {
  if (q.size() != tree.points.cols()) throw InvalidArgument("range_query: query width does not match the tree");
  tree.spec.validate(q);
  std::vector<Index> out;
  if (tree.nodes.empty()) return out;
  RangeQueryStats local;
  const VectorXd grad_q = query_gradient(tree.spec, q);
  const QueryKernel distance_to_q(tree.spec, q);
  std::vector<Index> stack{0};
  while (!stack.empty()) {
    const auto& node = tree.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    ++local.nodes_visited;
    const auto found = relation(node.ball, q, grad_q, r, tree.spec, options);
    if (found == BallRangeRelation::kDisjoint) {
      ++local.nodes_pruned;
      continue;
    }
    if (found == BallRangeRelation::kContained) {
      ++local.nodes_contained;
      for (Index i = node.begin; i < node.end; ++i) out.push_back(i);
      continue;
    }
    if (node.is_leaf()) {
      for (Index i = node.begin; i < node.end; ++i) {
        ++local.distance_checks;
        if (distance_to_q(tree.points.row(i).transpose()) <= r) out.push_back(i);
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  if (stats) *stats = local;
  return out;
}

std::vector<RecordId> range_query(const BBTree& tree, const Eigen::Ref<const VectorXd>& q, double r,
                                  const RelationOptions& options, RangeQueryStats* stats) {
  const auto positions = range_query_positions(tree, q, r, options, stats);
  std::vector<RecordId> ids;
  ids.reserve(positions.size());
  for (Index p : positions) ids.push_back(tree.ids[static_cast<std::size_t>(p)]);
  return ids;
}

}  // namespace bregforest
