#include "bregforest/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "binary_io.hpp"
#include "bregforest/error.hpp"

namespace bregforest {

namespace {

// Relative margin added to every per-subspace searching bound; covers the
// rounding in ub_compute so that a tight Cauchy bound never drops a record.
constexpr double kBoundSlack = 1e-9;

void check_k(Index k, Index n) {
  if (k < 1 || k > n) throw InvalidArgument("k = " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
}

void check_query(const DivergenceSpec& spec, const Eigen::Ref<const VectorXd>& y, Index dims) {
  if (y.size() != dims) {
    throw InvalidArgument("query has " + std::to_string(y.size()) + " coordinates, index expects " +
                          std::to_string(dims));
  }
  spec.validate(y);
}

std::vector<ResultItem> select_k(std::vector<ResultItem> items, Index k) {
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(keep), items.end(), result_less);
  items.resize(keep);
  return items;
}

// Filter with the (scaled) searching bounds, then refine the candidates.
SearchResult filter_refine(const BregmanIndex& index, const Eigen::Ref<const VectorXd>& y,
                           const std::vector<QTriple>& q, const BoundVector& bound, double coefficient, Index k,
                           const SearchOptions& options) {
  const auto& layout = index.layout();
  const auto& store = index.forest.store;
  const Index m = layout.partitions();

  SearchResult result;
  result.report.bound = bound;
  result.report.coefficient = coefficient;
  result.report.per_tree_candidates.assign(static_cast<std::size_t>(m), 0);

  std::vector<std::uint8_t> marked(store.records(), 0);
  std::uint64_t marked_count = 0;
  const auto per_page = store.records_per_page();
  for (Index part = 0; part < m; ++part) {
    const auto dims = layout.subspace(part);
    VectorXd sub(static_cast<Index>(dims.size()));
    for (std::size_t i = 0; i < dims.size(); ++i) sub[static_cast<Index>(i)] = y[dims[i]];
    const PTuple p = index.transforms.at(static_cast<Index>(bound.defining_record), part);
    const QTriple& qj = q[static_cast<std::size_t>(part)];
    // The coefficient tightens only the relaxed cross term sqrt(gamma delta);
    // the rest of the bound is exact.
    double radius = bound.per_subspace[part];
    if (coefficient < 1.0) radius -= (1.0 - coefficient) * std::sqrt(p.gamma * qj.delta);
    radius += kBoundSlack * ub_magnitude(p, qj);

    const BBTree& tree = index.forest.trees[static_cast<std::size_t>(part)];
    const auto positions = range_query_positions(tree, sub, radius, index.config.relation);
    result.report.per_tree_candidates[static_cast<std::size_t>(part)] = positions.size();
    for (Index pos : positions) {
      const PointAddress& address = tree.addresses[static_cast<std::size_t>(pos)];
      const auto stored = address.page * per_page + address.slot;
      if (!marked[stored]) {
        marked[stored] = 1;
        ++marked_count;
      }
    }
  }

  std::vector<PointAddress> addresses;
  addresses.reserve(marked_count);
  for (std::uint64_t pos = 0; pos < marked.size(); ++pos) {
    if (marked[pos]) addresses.push_back(store.address_of_position(pos));
  }
  IoCounter counter;
  const FetchedPoints fetched = fetch_points(store, addresses, counter);

  const QueryKernel distance_to_y(index.spec, y);
  std::vector<ResultItem> items(fetched.ids.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i] = {fetched.ids[i], distance_to_y(fetched.points.row(static_cast<Index>(i)).transpose())};
  }
  result.report.candidates = marked_count;
  result.report.pages_read = counter.pages_read;
  if (options.keep_candidates) {
    result.report.candidate_ids = fetched.ids;
    std::sort(result.report.candidate_ids.begin(), result.report.candidate_ids.end());
  }
  result.items = select_k(std::move(items), k);
  return result;
}

double elapsed_us(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SearchConfig::validate() const {
  if (partitions < 0) throw InvalidArgument("config: partitions must be >= 0 (0 = auto)");
  if (leaf_capacity < 2) throw InvalidArgument("config: leaf capacity must be >= 2");
  if (fit_samples < 2) throw InvalidArgument("config: fit samples must be >= 2");
  if (approx_p && !(*approx_p > 0.0 && *approx_p <= 1.0)) throw InvalidArgument("config: approx p must be in (0, 1]");
}

bool result_less(const ResultItem& a, const ResultItem& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

DimStats fit_dimension_stats(const Dataset& data) {
  if (data.rows() < 2) throw InvalidArgument("fit_dimension_stats: need at least two records");
  const Index d = data.cols();
  const double n = static_cast<double>(data.rows());
  DimStats stats;
  stats.mean = data.cast<double>().colwise().mean().transpose();
  stats.variance.resize(d);
  stats.min = data.cast<double>().colwise().minCoeff().transpose();
  stats.max = data.cast<double>().colwise().maxCoeff().transpose();
  for (Index c = 0; c < d; ++c) {
    const double mu = stats.mean[c];
    double ss = 0.0;
    for (Index r = 0; r < data.rows(); ++r) {
      const double diff = static_cast<double>(data(r, c)) - mu;
      ss += diff * diff;
    }
    stats.variance[c] = ss / (n - 1.0);
  }
  stats.histogram.setZero(d, DimStats::kHistogramBins);
  for (Index c = 0; c < d; ++c) {
    const double lo = stats.min[c];
    const double span = stats.max[c] - lo;
    for (Index r = 0; r < data.rows(); ++r) {
      Index bin = 0;
      if (span > 0.0) {
        bin = static_cast<Index>((static_cast<double>(data(r, c)) - lo) / span * DimStats::kHistogramBins);
        bin = std::clamp<Index>(bin, 0, DimStats::kHistogramBins - 1);
      }
      ++stats.histogram(c, bin);
    }
  }
  return stats;
}

BregmanIndex build_index(const Dataset& data, const DivergenceSpec& spec, const SearchConfig& config) {
  config.validate();
  if (data.rows() == 0 || data.cols() == 0) throw InvalidArgument("build: dataset is empty");
  if (spec.has_weights() && spec.weights().size() != data.cols()) {
    throw InvalidArgument("build: mahalanobis weights have length " + std::to_string(spec.weights().size()) +
                          ", dataset has " + std::to_string(data.cols()) + " dimensions");
  }
  for (Index r = 0; r < data.rows(); ++r) {
    try {
      spec.validate(data.row(r));
    } catch (const DomainError& e) {
      throw DomainError("record " + std::to_string(r) + ": " + e.what());
    }
  }

  BregmanIndex index(spec);
  index.config = config;
  index.records = data.rows();
  index.dims = data.cols();

  Index partitions = config.partitions;
  if (partitions == 0) {
    if (data.rows() >= 2) {
      index.cost = fit_cost_params(data, spec, config.fit_samples, config.seed);
      partitions = optimal_partitions(*index.cost);
    } else {
      partitions = 1;
    }
  }
  if (partitions > data.cols()) {
    throw InvalidArgument("build: " + std::to_string(partitions) + " partitions exceed the dimensionality " +
                          std::to_string(data.cols()));
  }
  index.config.partitions = partitions;

  // A single subspace holds every dimension whatever the layout option says.
  const PartitionLayout layout = config.pccp && data.rows() >= 2 && partitions > 1
                                     ? pccp(data, partitions, config.seed)
                                     : PartitionLayout::contiguous(data.cols(), partitions);
  index.transforms = TransformTable::build(data, layout, spec);
  index.forest = build_forest(data, layout, spec, {config.leaf_capacity, config.seed, config.page_size, {}});
  if (data.rows() >= 2) {
    index.stats = fit_dimension_stats(data);
  } else {
    index.stats.mean = data.row(0).cast<double>().transpose();
    index.stats.variance = VectorXd::Zero(data.cols());
    index.stats.min = index.stats.mean;
    index.stats.max = index.stats.mean;
    index.stats.histogram.setZero(data.cols(), DimStats::kHistogramBins);
    index.stats.histogram.col(0).setOnes();
  }
  return index;
}

SearchResult knn_search(const BregmanIndex& index, const Eigen::Ref<const VectorXd>& query, Index k,
                        const SearchOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_k(k, index.records);
  check_query(index.spec, query, index.dims);
  const auto q = q_transform(query, index.layout(), index.spec);
  const BoundVector bound = qb_determine(index.transforms, q, k);
  SearchResult result = filter_refine(index, query, q, bound, 1.0, k, options);
  result.report.elapsed_us = elapsed_us(start);
  return result;
}

ApproxContext approx_context(const DivergenceSpec& spec, const Eigen::Ref<const VectorXd>& x,
                             const Eigen::Ref<const VectorXd>& y) {
  if (x.size() != y.size()) throw InvalidArgument("approx_context: length mismatch");
  ApproxContext ctx;
  double gamma = 0.0;
  double delta = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double g = spec.grad_unchecked(i, y[i]);
    ctx.kappa += spec.value_unchecked(i, x[i]) - spec.value_unchecked(i, y[i]) + y[i] * g;
    gamma += x[i] * x[i];
    delta += g * g;
  }
  ctx.mu = std::sqrt(gamma * delta);
  return ctx;
}

double approx_coefficient(const DimStats& stats, const Eigen::Ref<const VectorXd>& grad_y, double kappa, double mu,
                          double p, double floor) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("approx_coefficient: p must be in (0, 1]");
  if (grad_y.size() != stats.mean.size()) throw InvalidArgument("approx_coefficient: gradient length mismatch");
  if (p == 1.0 || !(mu > 0.0)) return 1.0;

  double mean = 0.0;
  double variance = 0.0;
  for (Index i = 0; i < grad_y.size(); ++i) {
    mean -= stats.mean[i] * grad_y[i];
    variance += stats.variance[i] * grad_y[i] * grad_y[i];
  }
  if (!(variance > 0.0)) return 1.0;
  const double sd = std::sqrt(variance);
  auto cdf = [&](double z) { return 0.5 * std::erfc(-(z - mean) / (sd * std::sqrt(2.0))); };
  const double blend = p * cdf(mu) + (1.0 - p) * cdf(-kappa);
  if (!(blend > 0.0)) return floor;
  if (!(blend < 1.0)) return 1.0;
  const double quantile = mean - sd * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * blend);
  const double c = quantile / mu;
  if (std::isnan(c)) return 1.0;
  return std::clamp(c, floor, 1.0);
}

SearchResult approx_knn_search(const BregmanIndex& index, const Eigen::Ref<const VectorXd>& query, Index k,
                               double p, const SearchOptions& options) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("approximate search: p must be in (0, 1]");
  if (p == 1.0) return knn_search(index, query, k, options);

  const auto start = std::chrono::steady_clock::now();
  check_k(k, index.records);
  check_query(index.spec, query, index.dims);
  const auto q = q_transform(query, index.layout(), index.spec);
  const BoundVector bound = qb_determine(index.transforms, q, k);

  // kappa and mu of the bound-defining record, over the full space.
  double kappa = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  for (Index part = 0; part < index.partitions(); ++part) {
    const PTuple pt = index.transforms.at(static_cast<Index>(bound.defining_record), part);
    const QTriple& qt = q[static_cast<std::size_t>(part)];
    kappa += pt.alpha + qt.alpha + qt.beta_yy;
    gamma += pt.gamma;
    delta += qt.delta;
  }
  const double mu = std::sqrt(gamma * delta);
  VectorXd grad(query.size());
  for (Index i = 0; i < query.size(); ++i) grad[i] = index.spec.grad_unchecked(i, query[i]);
  const double c = approx_coefficient(index.stats, grad, kappa, mu, p);

  SearchResult result = filter_refine(index, query, q, bound, c, k, options);
  if (static_cast<Index>(result.items.size()) < k) {
    result = filter_refine(index, query, q, bound, 1.0, k, options);
    result.report.shortfall = true;
  }
  result.report.elapsed_us = elapsed_us(start);
  return result;
}

std::vector<ResultItem> linear_scan_oracle(const Dataset& data, const DivergenceSpec& spec,
                                           const Eigen::Ref<const VectorXd>& query, Index k) {
  check_k(k, data.rows());
  check_query(spec, query, data.cols());
  const QueryKernel distance_to_query(spec, query);
  std::vector<ResultItem> items(static_cast<std::size_t>(data.rows()));
  for (Index r = 0; r < data.rows(); ++r) {
    items[static_cast<std::size_t>(r)] = {static_cast<RecordId>(r), distance_to_query(data.row(r).transpose())};
  }
  return select_k(std::move(items), k);
}

Dataset load_all_points(const BregmanIndex& index) {
  const auto& store = index.forest.store;
  const auto bytes = store.all_pages();
  Dataset out(index.records, index.dims);
  const auto width = store.record_width();
  for (std::uint64_t pos = 0; pos < store.records(); ++pos) {
    const PointAddress address = store.address_of_position(pos);
    const std::byte* src = bytes.data() + address.page * store.page_size() + address.slot * width;
    const auto id = static_cast<Index>(store.order()[pos]);
    for (Index c = 0; c < index.dims; ++c) out(id, c) = detail::get_f32(src + c * sizeof(float));
  }
  return out;
}

}  // namespace bregforest
