#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bregforest/bbtree.hpp"
#include "bregforest/divergence.hpp"
#include "bregforest/forest.hpp"
#include "bregforest/partition_layout.hpp"
#include "bregforest/planner.hpp"
#include "bregforest/transform.hpp"

namespace bregforest {

inline constexpr Index kDefaultFitSamples = 50;
inline constexpr double kMinApproxCoefficient = 0.05;

struct SearchConfig {
  // 0 selects the partition count from the fitted cost model.
  Index partitions = 0;
  bool pccp = true;
  Index leaf_capacity = 64;
  std::size_t page_size = kDefaultPageSize;
  std::uint64_t seed = 0;
  Index fit_samples = kDefaultFitSamples;
  // Default probability for approximate queries, in (0, 1].
  std::optional<double> approx_p;
  RelationOptions relation;

  void validate() const;
};

struct ResultItem {
  RecordId id = 0;
  double distance = 0.0;

  friend bool operator==(const ResultItem&, const ResultItem&) = default;
};

// Orders by (distance, id).
bool result_less(const ResultItem& a, const ResultItem& b);

// Per-dimension moments (and a diagnostic histogram) of the dataset.
struct DimStats {
  static constexpr Index kHistogramBins = 64;

  VectorXd mean;
  VectorXd variance;
  VectorXd min;
  VectorXd max;
  // d x kHistogramBins counts over [min, max].
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> histogram;
};

DimStats fit_dimension_stats(const Dataset& data);

/// The built index: layout, transform table, forest (with its point store)
/// and the statistics used by approximate search. Immutable once built.
struct BregmanIndex {
  explicit BregmanIndex(DivergenceSpec divergence) : spec(std::move(divergence)) {}

  DivergenceSpec spec;
  SearchConfig config;
  Index records = 0;
  Index dims = 0;
  std::optional<CostParams> cost;
  TransformTable transforms;
  BBForest forest;
  DimStats stats;

  const PartitionLayout& layout() const { return forest.layout; }
  Index partitions() const { return forest.layout.partitions(); }
};

BregmanIndex build_index(const Dataset& data, const DivergenceSpec& spec, const SearchConfig& config);

struct SearchReport {
  std::uint64_t candidates = 0;
  std::uint64_t pages_read = 0;
  double elapsed_us = 0.0;
  std::vector<std::uint64_t> per_tree_candidates;
  BoundVector bound;
  // Coefficient applied to the searching bounds (1 for exact search).
  double coefficient = 1.0;
  // Approximate search fell back to the exact bounds to return k results.
  bool shortfall = false;
  // Sorted candidate record ids; filled when requested.
  std::vector<RecordId> candidate_ids;
};

struct SearchResult {
  std::vector<ResultItem> items;
  SearchReport report;
};

struct SearchOptions {
  bool keep_candidates = false;
};

/// Exact kNN: bound from the transform table, per-subspace range queries,
/// union, fetch, refine. Equal to linear_scan_oracle.
SearchResult knn_search(const BregmanIndex& index, const Eigen::Ref<const VectorXd>& query, Index k,
                        const SearchOptions& options = {});

/// Searching bounds scaled by approx_coefficient(p); exact search when p = 1.
SearchResult approx_knn_search(const BregmanIndex& index, const Eigen::Ref<const VectorXd>& query, Index k,
                               double p, const SearchOptions& options = {});

/// Coefficient c in (0, 1] for probability p, modelling
/// beta_xy = -sum x_i g_i as Normal(-sum mean_i g_i, sum var_i g_i^2):
/// c = Psi^-1(p Psi(mu) + (1 - p) Psi(-kappa)) / mu, clamped to [floor, 1].
double approx_coefficient(const DimStats& stats, const Eigen::Ref<const VectorXd>& grad_y, double kappa, double mu,
                          double p, double floor = kMinApproxCoefficient);

struct ApproxContext {
  double kappa = 0.0;
  double mu = 0.0;
  double c = 1.0;
};

// kappa and mu over the full space for the pair (x, y).
ApproxContext approx_context(const DivergenceSpec& spec, const Eigen::Ref<const VectorXd>& x,
                             const Eigen::Ref<const VectorXd>& y);

std::vector<ResultItem> linear_scan_oracle(const Dataset& data, const DivergenceSpec& spec,
                                           const Eigen::Ref<const VectorXd>& query, Index k);

// All records of the index, read back from its store without I/O accounting.
Dataset load_all_points(const BregmanIndex& index);

}  // namespace bregforest
