#include "bregforest/partition_layout.hpp"

#include <numeric>
#include <string>

#include "bregforest/error.hpp"

namespace bregforest {

PartitionLayout::PartitionLayout(std::vector<Index> perm, std::vector<Index> offsets)
    : perm_(std::move(perm)), offsets_(std::move(offsets)) {
  const Index d = static_cast<Index>(perm_.size());
  if (d == 0) throw InvalidArgument("layout: no dimensions");
  std::vector<bool> seen(perm_.size(), false);
  for (Index dim : perm_) {
    if (dim < 0 || dim >= d) throw InvalidArgument("layout: dimension " + std::to_string(dim) + " out of range");
    if (seen[static_cast<std::size_t>(dim)]) {
      throw InvalidArgument("layout: dimension " + std::to_string(dim) + " listed twice");
    }
    seen[static_cast<std::size_t>(dim)] = true;
  }
  if (offsets_.size() < 2) throw InvalidArgument("layout: need at least one partition");
  if (offsets_.front() != 0 || offsets_.back() != d) throw InvalidArgument("layout: ranges do not cover perm");
  Index min_width = d;
  Index max_width = 0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    const Index w = offsets_[i + 1] - offsets_[i];
    if (w <= 0) throw InvalidArgument("layout: partition " + std::to_string(i) + " is empty or out of order");
    min_width = std::min(min_width, w);
    max_width = std::max(max_width, w);
  }
  if (max_width - min_width > 1) throw InvalidArgument("layout: partition widths are unbalanced");
}

std::vector<Index> PartitionLayout::balanced_offsets(Index dims, Index partitions) {
  if (partitions < 1 || partitions > dims) {
    throw InvalidArgument("layout: partitions must be in [1, " + std::to_string(dims) + "], got " +
                          std::to_string(partitions));
  }
  const Index base = dims / partitions;
  const Index extra = dims % partitions;
  std::vector<Index> offsets(static_cast<std::size_t>(partitions) + 1, 0);
  for (Index i = 0; i < partitions; ++i) {
    offsets[static_cast<std::size_t>(i) + 1] = offsets[static_cast<std::size_t>(i)] + base + (i < extra ? 1 : 0);
  }
  return offsets;
}

PartitionLayout PartitionLayout::contiguous(Index dims, Index partitions) {
  std::vector<Index> perm(static_cast<std::size_t>(dims));
  std::iota(perm.begin(), perm.end(), Index{0});
  return {std::move(perm), balanced_offsets(dims, partitions)};
}

}  // namespace bregforest
