#pragma once

#include <span>
#include <vector>

#include "bregforest/types.hpp"

namespace bregforest {

/// Assignment of the d original dimensions to M disjoint subspaces.
///
/// `perm` lists the original dimensions so that subspace i occupies the
/// positions [offsets[i], offsets[i + 1]). Widths differ by at most one; the
/// leading subspaces carry the extra dimension when M does not divide d.
class PartitionLayout {
 public:
  PartitionLayout() = default;

  // Validates bijection, coverage, non-empty ordered ranges and balance.
  PartitionLayout(std::vector<Index> perm, std::vector<Index> offsets);

  static PartitionLayout contiguous(Index dims, Index partitions);

  // Balanced widths for d dimensions over M partitions.
  static std::vector<Index> balanced_offsets(Index dims, Index partitions);

  Index dims() const { return static_cast<Index>(perm_.size()); }
  Index partitions() const { return offsets_.empty() ? 0 : static_cast<Index>(offsets_.size()) - 1; }

  std::span<const Index> perm() const { return perm_; }
  std::span<const Index> offsets() const { return offsets_; }

  Index begin(Index part) const { return offsets_[static_cast<std::size_t>(part)]; }
  Index end(Index part) const { return offsets_[static_cast<std::size_t>(part) + 1]; }
  Index width(Index part) const { return end(part) - begin(part); }

  // Original dimension indices of subspace `part`.
  std::span<const Index> subspace(Index part) const {
    return std::span<const Index>(perm_).subspan(static_cast<std::size_t>(begin(part)),
                                                 static_cast<std::size_t>(width(part)));
  }

  // Gathers a full-dimensional vector into layout order.
  template <typename Derived>
  VectorXd rearrange(const Eigen::MatrixBase<Derived>& v) const {
    VectorXd out(dims());
    for (Index i = 0; i < dims(); ++i) out[i] = static_cast<double>(v.coeff(perm_[static_cast<std::size_t>(i)]));
    return out;
  }

  // Columns of subspace `part`, in layout order.
  template <typename Scalar>
  RowMatrix<Scalar> gather(const RowMatrix<Scalar>& data, Index part) const {
    const auto dims_of = subspace(part);
    RowMatrix<Scalar> out(data.rows(), static_cast<Index>(dims_of.size()));
    for (Index c = 0; c < out.cols(); ++c) out.col(c) = data.col(dims_of[static_cast<std::size_t>(c)]);
    return out;
  }

  friend bool operator==(const PartitionLayout&, const PartitionLayout&) = default;

 private:
  std::vector<Index> perm_;
  std::vector<Index> offsets_;
};

}  // namespace bregforest
