#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "bregforest/search.hpp"

namespace bregforest {

inline constexpr char kIndexMagic[4] = {'B', 'B', 'F', '1'};
inline constexpr std::uint64_t kIndexVersion = 1;

/// Fixed part of an index file. Layout on disk (little-endian, integers
/// 8 bytes, reals IEEE-754 binary64):
///
///   "BBF1" + 4 zero bytes, version, n, d, M, divergence id, itakura floor,
///   weights, build configuration, anchor tree, perm, partition offsets,
///   cost-params snapshot, dimension statistics, store order, section table
///   (transforms, one offset per tree, points, page count), then the
///   sections themselves with the point pages last.
struct IndexHeader {
  std::uint64_t version = 0;
  std::uint64_t records = 0;
  std::uint64_t dims = 0;
  std::uint64_t partitions = 0;
  DivergenceKind divergence = DivergenceKind::kSquaredEuclidean;
  double itakura_saito_floor = 0.0;
  std::vector<double> weights;
  SearchConfig config;
  std::uint64_t anchor_tree = 0;
  std::vector<Index> perm;
  std::vector<Index> offsets;
  std::optional<CostParams> cost;
  std::uint64_t page_size = 0;
  std::uint64_t records_per_page = 0;
  std::uint64_t page_count = 0;
  std::uint64_t transforms_offset = 0;
  std::vector<std::uint64_t> tree_offsets;
  std::uint64_t points_offset = 0;
};

void serialize_index(const BregmanIndex& index, const std::filesystem::path& path);

/// Loads an index written by serialize_index. The point pages stay on disk
/// and are read on demand. Throws BadMagic, VersionMismatch or TruncatedFile;
/// nothing is returned on failure.
BregmanIndex deserialize_index(const std::filesystem::path& path);

IndexHeader read_index_header(const std::filesystem::path& path);

}  // namespace bregforest
