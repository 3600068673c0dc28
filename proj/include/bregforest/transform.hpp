#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bregforest/divergence.hpp"
#include "bregforest/partition_layout.hpp"
#include "bregforest/types.hpp"

namespace bregforest {

// Per-subspace summary of a data point: alpha = sum f(x_j), gamma = sum x_j^2.
struct PTuple {
  double alpha = 0.0;
  double gamma = 0.0;
};

// Per-subspace summary of a query: alpha = -sum f(y_j),
// beta_yy = sum y_j f'(y_j), delta = sum f'(y_j)^2.
struct QTriple {
  double alpha = 0.0;
  double beta_yy = 0.0;
  double delta = 0.0;
};

// Components of the k-th smallest total upper bound.
struct BoundVector {
  VectorXd per_subspace;
  double total = 0.0;
  RecordId defining_record = 0;
};

/// Cauchy upper bound on the divergence between the sub-vectors summarised
/// by `p` and `q`: alpha_x + alpha_y + beta_yy + sqrt(gamma_x * delta_y).
inline double ub_compute(const PTuple& p, const QTriple& q) {
  return p.alpha + q.alpha + q.beta_yy + std::sqrt(p.gamma * q.delta);
}

// Sum of absolute terms of ub_compute; the scale of its rounding error.
inline double ub_magnitude(const PTuple& p, const QTriple& q) {
  return std::abs(p.alpha) + std::abs(q.alpha) + std::abs(q.beta_yy) + std::sqrt(p.gamma * q.delta);
}

// `x` is a full-dimensional point in original dimension order.
std::vector<PTuple> p_transform(const Eigen::Ref<const VectorXd>& x, const PartitionLayout& layout,
                                const DivergenceSpec& spec);
std::vector<QTriple> q_transform(const Eigen::Ref<const VectorXd>& y, const PartitionLayout& layout,
                                 const DivergenceSpec& spec);

/// The precomputed n x M table of PTuples, kept in memory as 2M doubles per
/// record. Immutable after construction.
class TransformTable {
 public:
  TransformTable() = default;
  TransformTable(Index records, Index partitions) : data_(records, 2 * partitions) {}

  // Throws DomainError naming the offending record.
  static TransformTable build(const Dataset& data, const PartitionLayout& layout, const DivergenceSpec& spec);

  Index records() const { return data_.rows(); }
  Index partitions() const { return data_.cols() / 2; }

  PTuple at(Index record, Index part) const { return {data_(record, 2 * part), data_(record, 2 * part + 1)}; }
  void set(Index record, Index part, const PTuple& p) {
    data_(record, 2 * part) = p.alpha;
    data_(record, 2 * part + 1) = p.gamma;
  }

  const RowMatrix<double>& raw() const { return data_; }
  RowMatrix<double>& raw() { return data_; }

 private:
  RowMatrix<double> data_;
};

/// Total upper bound of every record, then the per-subspace components of the
/// record with the k-th smallest total. Ties on the total go to the smaller
/// record id. O(nM + n log k).
BoundVector qb_determine(const TransformTable& table, const std::vector<QTriple>& q, Index k);

}  // namespace bregforest
