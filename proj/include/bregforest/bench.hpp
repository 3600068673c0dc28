#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bregforest/search.hpp"

namespace bregforest {

inline constexpr int kReportSchemaVersion = 1;

struct BenchMode {
  // Empty for exact search.
  std::optional<double> p;

  std::string label() const;
  friend bool operator==(const BenchMode&, const BenchMode&) = default;
};

// "exact" or "approx:<p>".
BenchMode parse_bench_mode(std::string_view text);

/// Mean of approx[i] / exact[i]. A zero exact distance counts as 1 when the
/// approximate one is zero too; otherwise the query is degenerate and
/// nullopt is returned.
std::optional<double> overall_ratio(std::span<const ResultItem> approx, std::span<const ResultItem> exact);

struct BenchRow {
  Index query = 0;
  Index k = 0;
  BenchMode mode;
  std::uint64_t candidates = 0;
  std::uint64_t pages_read = 0;
  double elapsed_us = 0.0;
  // Empty when the query is degenerate for the ratio.
  std::optional<double> overall_ratio;
  bool shortfall = false;
};

struct BenchSummary {
  Index k = 0;
  BenchMode mode;
  std::size_t queries = 0;
  double mean_candidates = 0.0;
  double mean_pages_read = 0.0;
  double mean_elapsed_us = 0.0;
  double p50_elapsed_us = 0.0;
  double p95_elapsed_us = 0.0;
  double mean_overall_ratio = 0.0;
  std::size_t degenerate = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
  // Time spent loading the index, kept apart from per-query timing.
  double load_ms = 0.0;
};

/// Runs every query x k x mode. Rows come out ordered by (query, k, mode).
/// Approximate modes are scored against a linear scan over the index's own
/// records.
BenchReport bench_run(const BregmanIndex& index, const Dataset& queries, std::span<const Index> ks,
                      std::span<const BenchMode> modes);

// Loads the index and queries, runs, and writes CSV plus a JSON mirror
// (output path with its extension replaced by .json).
BenchReport bench_run(const std::filesystem::path& index_path, const std::filesystem::path& query_path,
                      std::span<const Index> ks, std::span<const BenchMode> modes,
                      const std::filesystem::path& output);

void write_report_csv(const BenchReport& report, std::ostream& out, bool with_timing = true);
void write_report_json(const BenchReport& report, std::ostream& out);

struct SweepRow {
  Index partitions = 0;
  double build_ms = 0.0;
  double mean_candidates = 0.0;
  double mean_pages_read = 0.0;
  double mean_elapsed_us = 0.0;
};

// Builds one index per M and averages exact-search metrics over the queries.
std::vector<SweepRow> sweep_partitions(const Dataset& data, const DivergenceSpec& spec, SearchConfig config,
                                       const Dataset& queries, Index k, std::span<const Index> partitions);

// Seeded choice of `count` distinct rows; returns (queries, remaining rows).
std::pair<Dataset, Dataset> sample_queries(const Dataset& data, Index count, std::uint64_t seed);

}  // namespace bregforest
