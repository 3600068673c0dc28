#include "bregforest/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "bregforest/error.hpp"
#include "bregforest/transform.hpp"

namespace bregforest {

namespace {

constexpr double kAlphaMax = 1.0 - 1e-6;
constexpr double kAlphaMin = 1e-12;

}  // namespace

void CostParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("cost params: A must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("cost params: alpha must be in (0, 1)");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("cost params: beta must be positive");
  if (n == 0 || d == 0 || k == 0) throw InvalidArgument("cost params: n, d and k must be positive");
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const double count = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= count;
  mean_y /= count;
  double cov = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
  return std::clamp(cov / std::sqrt(var_x * var_y), -1.0, 1.0);
}

Eigen::MatrixXd correlation_matrix(const Dataset& data) {
  if (data.rows() < 2) throw InvalidArgument("correlation_matrix: need at least two records");
  const Index d = data.cols();
  Eigen::MatrixXd centered = data.cast<double>();
  const Eigen::RowVectorXd mean = centered.colwise().mean();
  centered.rowwise() -= mean;
  Eigen::MatrixXd cov = centered.transpose() * centered;

  std::vector<bool> constant(static_cast<std::size_t>(d));
  for (Index c = 0; c < d; ++c) {
    constant[static_cast<std::size_t>(c)] = data.col(c).maxCoeff() == data.col(c).minCoeff();
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    if (constant[static_cast<std::size_t>(i)]) continue;
    for (Index j = i; j < d; ++j) {
      if (constant[static_cast<std::size_t>(j)]) continue;
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      const double value = i == j ? 1.0 : (denom > 0.0 ? std::clamp(cov(i, j) / denom, -1.0, 1.0) : 0.0);
      r(i, j) = value;
      r(j, i) = value;
    }
  }
  return r;
}

std::vector<DimensionGroup> pccp_groups(const Eigen::MatrixXd& correlation, Index partitions, std::uint64_t seed) {
  const Index d = correlation.rows();
  if (correlation.cols() != d) throw InvalidArgument("pccp: correlation matrix must be square");
  if (partitions < 1 || partitions > d) {
    throw InvalidArgument("pccp: partitions must be in [1, " + std::to_string(d) + "], got " +
                          std::to_string(partitions));
  }

  std::vector<bool> constant(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) constant[static_cast<std::size_t>(i)] = correlation(i, i) == 0.0;

  std::mt19937_64 rng(seed);
  std::vector<bool> assigned(static_cast<std::size_t>(d), false);
  Index remaining = d;
  std::vector<DimensionGroup> groups;

  auto pick_seed = [&]() {
    std::vector<Index> pool;
    for (Index i = 0; i < d; ++i) {
      if (!assigned[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(i)]) pool.push_back(i);
    }
    if (pool.empty()) {
      for (Index i = 0; i < d; ++i) {
        if (!assigned[static_cast<std::size_t>(i)]) pool.push_back(i);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  };

  // score[u] = max |r(u, g)| over members g of the current group.
  std::vector<double> score(static_cast<std::size_t>(d), 0.0);
  while (remaining > 0) {
    DimensionGroup group;
    std::fill(score.begin(), score.end(), 0.0);
    auto insert = [&](Index dim) {
      group.push_back(dim);
      assigned[static_cast<std::size_t>(dim)] = true;
      --remaining;
      for (Index u = 0; u < d; ++u) {
        if (!assigned[static_cast<std::size_t>(u)]) {
          score[static_cast<std::size_t>(u)] = std::max(score[static_cast<std::size_t>(u)], std::abs(correlation(u, dim)));
        }
      }
    };
    insert(pick_seed());
    while (static_cast<Index>(group.size()) < partitions && remaining > 0) {
      Index best = -1;
      for (Index u = 0; u < d; ++u) {
        const auto su = static_cast<std::size_t>(u);
        if (assigned[su]) continue;
        if (best < 0) {
          best = u;
          continue;
        }
        const auto sb = static_cast<std::size_t>(best);
        if (score[su] > score[sb] || (score[su] == score[sb] && constant[sb] && !constant[su])) best = u;
      }
      insert(best);
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

PartitionLayout layout_from_groups(const std::vector<DimensionGroup>& groups, Index dims, Index partitions) {
  std::vector<Index> perm;
  perm.reserve(static_cast<std::size_t>(dims));
  std::vector<Index> offsets{0};
  for (Index part = 0; part < partitions; ++part) {
    for (const auto& group : groups) {
      if (part < static_cast<Index>(group.size())) perm.push_back(group[static_cast<std::size_t>(part)]);
    }
    offsets.push_back(static_cast<Index>(perm.size()));
  }
  if (static_cast<Index>(perm.size()) != dims) throw InvalidArgument("pccp: groups do not cover all dimensions");
  return {std::move(perm), std::move(offsets)};
}

PartitionLayout pccp(const Eigen::MatrixXd& correlation, Index partitions, std::uint64_t seed) {
  return layout_from_groups(pccp_groups(correlation, partitions, seed), correlation.rows(), partitions);
}

PartitionLayout pccp(const Dataset& data, Index partitions, std::uint64_t seed) {
  if (partitions < 1 || partitions > data.cols()) {
    throw InvalidArgument("pccp: partitions must be in [1, " + std::to_string(data.cols()) + "], got " +
                          std::to_string(partitions));
  }
  return pccp(correlation_matrix(data), partitions, seed);
}

ExponentialFit fit_exponential(std::span<const std::pair<double, double>> observations) {
  if (observations.size() < 2) throw InvalidArgument("fit_exponential: need at least two observations");
  double mean_m = 0.0;
  double mean_log = 0.0;
  for (const auto& [m, ub] : observations) {
    if (!(ub > 0.0)) throw InvalidArgument("fit_exponential: bounds must be positive");
    mean_m += m;
    mean_log += std::log(ub);
  }
  const double count = static_cast<double>(observations.size());
  mean_m /= count;
  mean_log /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [m, ub] : observations) {
    sxx += (m - mean_m) * (m - mean_m);
    sxy += (m - mean_m) * (std::log(ub) - mean_log);
  }
  if (sxx <= 0.0) throw InvalidArgument("fit_exponential: need at least two distinct M values");
  const double slope = sxy / sxx;
  const double intercept = mean_log - slope * mean_m;
  return {std::exp(intercept), std::exp(slope)};
}

std::vector<Index> fit_partition_grid(Index dims) {
  static constexpr std::array<Index, 12> kGrid{1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
  std::vector<Index> grid;
  for (Index m : kGrid) {
    if (m <= dims) grid.push_back(m);
  }
  return grid;
}

double estimate_beta(std::span<const std::pair<double, double>> fraction_and_bound) {
  if (fraction_and_bound.empty()) throw InvalidArgument("estimate_beta: no observations");
  double fraction = 0.0;
  double bound = 0.0;
  for (const auto& [f, ub] : fraction_and_bound) {
    fraction += f;
    bound += ub;
  }
  if (!(bound > 0.0)) throw InvalidArgument("estimate_beta: bounds must be positive");
  return fraction / bound;
}

CostParams fit_cost_params(const Dataset& data, const DivergenceSpec& spec, Index sample_count, std::uint64_t seed) {
  const Index n = data.rows();
  const Index d = data.cols();
  if (sample_count < 2) throw InvalidArgument("fit_cost_params: sample_count must be >= 2");
  if (n < 2) throw InvalidArgument("fit_cost_params: need at least two records");

  const std::vector<Index> grid = fit_partition_grid(d);
  std::vector<PartitionLayout> layouts;
  layouts.reserve(grid.size());
  for (Index m : grid) layouts.push_back(PartitionLayout::contiguous(d, m));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<std::pair<double, double>> decay;        // (M, UB)
  std::vector<std::pair<double, double>> within;       // (fraction, UB)
  std::vector<double> distances(static_cast<std::size_t>(n));
  VectorXd query(d);
  VectorXd point(d);

  for (Index s = 0; s < sample_count; ++s) {
    const Index qi = pick(rng);
    Index pi = pick(rng);
    while (pi == qi) pi = pick(rng);
    query = data.row(qi).cast<double>().transpose();
    point = data.row(pi).cast<double>().transpose();
    spec.validate(query);

    const QueryKernel distance_to_query(spec, query);
    for (Index r = 0; r < n; ++r) distances[static_cast<std::size_t>(r)] = distance_to_query(data.row(r).transpose());
    std::sort(distances.begin(), distances.end());

    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto p = p_transform(point, layouts[g], spec);
      const auto q = q_transform(query, layouts[g], spec);
      double ub = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) ub += ub_compute(p[j], q[j]);
      if (!(ub > 0.0) || !std::isfinite(ub)) continue;
      decay.emplace_back(static_cast<double>(grid[g]), ub);
      const auto inside = std::upper_bound(distances.begin(), distances.end(), ub) - distances.begin();
      within.emplace_back(static_cast<double>(inside) / static_cast<double>(n), ub);
    }
  }

  CostParams params;
  params.n = static_cast<std::uint64_t>(n);
  params.d = static_cast<std::uint64_t>(d);
  params.k = 1;

  bool distinct_m = false;
  for (const auto& obs : decay) distinct_m = distinct_m || obs.first != decay.front().first;
  if (decay.empty()) {
    params.a = 1.0;
    params.alpha = kAlphaMax;
    params.beta = 1.0;
    params.degenerate = true;
    return params;
  }
  if (distinct_m) {
    const ExponentialFit fit = fit_exponential(decay);
    params.a = fit.a;
    params.alpha = fit.alpha;
  } else {
    double mean = 0.0;
    for (const auto& obs : decay) mean += obs.second;
    params.a = mean / static_cast<double>(decay.size());
    params.alpha = kAlphaMax;
    params.degenerate = true;
  }
  if (!(params.alpha < kAlphaMax)) {
    params.alpha = kAlphaMax;
    params.degenerate = true;
  }
  params.alpha = std::max(params.alpha, kAlphaMin);
  params.beta = estimate_beta(within);
  if (!(params.beta > 0.0)) {
    params.beta = std::numeric_limits<double>::min();
    params.degenerate = true;
  }
  return params;
}

double modeled_cost(const CostParams& params, Index partitions) {
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  const double log_k = std::log(static_cast<double>(params.k));
  const double m = static_cast<double>(partitions);
  return d + 2.0 * m * n + n * log_k + params.beta * params.a * std::pow(params.alpha, m) * n * (d + log_k);
}

std::optional<double> optimal_partitions_real(const CostParams& params) {
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) return std::nullopt;
  const double n = static_cast<double>(params.n);
  const double d = static_cast<double>(params.d);
  const double log_k = std::log(static_cast<double>(params.k));
  const double mu = params.beta * params.a * n;
  const double ln_alpha = std::log(params.alpha);
  const double argument = 2.0 * n / (-mu * ln_alpha * (d + log_k));
  if (!(argument > 0.0) || !std::isfinite(argument) || argument >= 1.0) return std::nullopt;
  const double m = std::log(argument) / ln_alpha;
  if (!std::isfinite(m) || m <= 0.0) return std::nullopt;
  return m;
}

Index scan_optimal_partitions(const CostParams& params) {
  const Index d = static_cast<Index>(params.d);
  Index best = 1;
  double best_cost = modeled_cost(params, 1);
  for (Index m = 2; m <= d; ++m) {
    const double cost = modeled_cost(params, m);
    if (cost < best_cost) {
      best = m;
      best_cost = cost;
    }
  }
  return best;
}

Index optimal_partitions(const CostParams& params) {
  params.validate();
  const Index d = static_cast<Index>(params.d);
  const auto real = optimal_partitions_real(params);
  if (!real) return scan_optimal_partitions(params);
  const double capped = std::min(*real, static_cast<double>(d));
  const Index lo = std::clamp(static_cast<Index>(std::floor(capped)), Index{1}, d);
  const Index hi = std::clamp(static_cast<Index>(std::ceil(capped)), Index{1}, d);
  return modeled_cost(params, hi) < modeled_cost(params, lo) ? hi : lo;
}

}  // namespace bregforest
