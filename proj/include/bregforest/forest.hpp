#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bregforest/bbtree.hpp"
#include "bregforest/divergence.hpp"
#include "bregforest/page_store.hpp"
#include "bregforest/partition_layout.hpp"

namespace bregforest {

/// One BB-tree per subspace over a single point store. The store holds the
/// full-dimensional records in the leaf order of `trees[anchor_tree]`, and
/// every tree's leaves carry the store addresses of their records.
struct BBForest {
  std::vector<BBTree> trees;
  PartitionLayout layout;
  PageStore store;
  Index anchor_tree = 0;
};

struct ForestBuildOptions {
  Index leaf_capacity = 64;
  std::uint64_t seed = 0;
  std::size_t page_size = kDefaultPageSize;
  // Optional standalone page file; empty keeps pages in memory.
  std::filesystem::path page_file;
};

// max(64, n / 2^12): leaf capacity that keeps the leaf count roughly fixed
// as the dataset grows.
Index suggested_leaf_capacity(Index records);

BBForest build_forest(const Dataset& data, const PartitionLayout& layout, const DivergenceSpec& spec,
                      const ForestBuildOptions& options);

}  // namespace bregforest
