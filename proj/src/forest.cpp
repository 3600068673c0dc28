#include "bregforest/forest.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <string>

#include "bregforest/error.hpp"

namespace bregforest {

Index suggested_leaf_capacity(Index records) { return std::max<Index>(64, records >> 12); }

BBForest build_forest(const Dataset& data, const PartitionLayout& layout, const DivergenceSpec& spec,
                      const ForestBuildOptions& options) {
  if (data.rows() == 0) throw InvalidArgument("build_forest: empty dataset");
  if (data.cols() != layout.dims()) {
    throw InvalidArgument("build_forest: dataset has " + std::to_string(data.cols()) + " columns, layout expects " +
                          std::to_string(layout.dims()));
  }
  if (spec.has_weights() && spec.weights().size() != data.cols()) {
    throw InvalidArgument("build_forest: mahalanobis weights do not match the dataset dimensionality");
  }

  BBForest forest;
  forest.layout = layout;
  std::mt19937_64 rng(options.seed);
  forest.anchor_tree = std::uniform_int_distribution<Index>(0, layout.partitions() - 1)(rng);

  const TreeBuildOptions tree_options{options.leaf_capacity, 50, options.seed};
  auto build_part = [&](Index part) {
    return build_tree(layout.gather(data, part), spec.restrict(layout.subspace(part)), tree_options);
  };

  // The anchor fixes the on-disk order; the other trees only record addresses.
  std::vector<std::optional<BBTree>> built(static_cast<std::size_t>(layout.partitions()));
  built[static_cast<std::size_t>(forest.anchor_tree)] = build_part(forest.anchor_tree);
  const BBTree& anchor = *built[static_cast<std::size_t>(forest.anchor_tree)];
  WrittenStore written = write_point_store(data, anchor.ids, options.page_size, options.page_file);
  forest.store = std::move(written.store);

  for (Index part = 0; part < layout.partitions(); ++part) {
    auto& slot = built[static_cast<std::size_t>(part)];
    if (!slot) slot = build_part(part);
    slot->addresses.resize(slot->ids.size());
    for (std::size_t i = 0; i < slot->ids.size(); ++i) slot->addresses[i] = written.addresses[slot->ids[i]];
    forest.trees.push_back(std::move(*slot));
  }
  return forest;
}

}  // namespace bregforest
