#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bregforest/divergence.hpp"
#include "bregforest/partition_layout.hpp"
#include "bregforest/types.hpp"

namespace bregforest {

/// Constants of the online cost model: searching bound UB = A * alpha^M and
/// pruned fraction lambda = beta * UB.
struct CostParams {
  double a = 1.0;
  double alpha = 0.5;
  double beta = 1.0;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t k = 1;
  // Set when the fit could not resolve a decay (alpha was clamped).
  bool degenerate = false;

  void validate() const;
};

/// Pearson correlation; 0 when either sample has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// d x d matrix of Pearson coefficients between the dataset's columns.
/// Zero-variance columns correlate 0 with everything (including themselves).
Eigen::MatrixXd correlation_matrix(const Dataset& data);

// One group of the assignment phase, in insertion order.
using DimensionGroup = std::vector<Index>;

/// Assignment phase of correlation-based partitioning: ceil(d / M) groups of
/// up to M dimensions. Each group starts from a seeded random unassigned
/// dimension and grows by the unassigned dimension with the largest |r| to any
/// member. Constant dimensions are placed after all others.
std::vector<DimensionGroup> pccp_groups(const Eigen::MatrixXd& correlation, Index partitions, std::uint64_t seed);

/// Partitioning phase: partition i takes the i-th member of every group.
PartitionLayout layout_from_groups(const std::vector<DimensionGroup>& groups, Index dims, Index partitions);

PartitionLayout pccp(const Dataset& data, Index partitions, std::uint64_t seed);
PartitionLayout pccp(const Eigen::MatrixXd& correlation, Index partitions, std::uint64_t seed);

struct ExponentialFit {
  double a = 0.0;
  double alpha = 0.0;
};

/// Least-squares fit of log(UB) = log(A) + M log(alpha) over (M, UB) pairs.
/// Exact for two observations.
ExponentialFit fit_exponential(std::span<const std::pair<double, double>> observations);

// M values at which fit_cost_params samples the bound.
std::vector<Index> fit_partition_grid(Index dims);

/// Samples `sample_count` (query, point) record pairs, evaluates the total
/// upper bound under contiguous layouts over fit_partition_grid(d), fits A and
/// alpha, and estimates beta as mean(fraction of records within UB) / mean(UB).
CostParams fit_cost_params(const Dataset& data, const DivergenceSpec& spec, Index sample_count, std::uint64_t seed);

// beta for a set of (fraction-within-UB, UB) observations.
double estimate_beta(std::span<const std::pair<double, double>> fraction_and_bound);

/// T(M) = d + 2Mn + n log k + beta A alpha^M n (d + log k), natural log.
double modeled_cost(const CostParams& params, Index partitions);

/// Real-valued minimiser of T, or nullopt when the closed form is undefined.
std::optional<double> optimal_partitions_real(const CostParams& params);

/// Cheaper of the floor/ceiling of the closed-form minimiser (k fixed to 1),
/// clamped to [1, d]; integer scan of T when the closed form is undefined.
Index optimal_partitions(const CostParams& params);

// Argmin of T over 1..d; ties go to the smaller M.
Index scan_optimal_partitions(const CostParams& params);

}  // namespace bregforest
