#include "bregforest/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "json.hpp"

#include "bregforest/dataset_io.hpp"
#include "bregforest/error.hpp"
#include "bregforest/index_io.hpp"

namespace bregforest {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows, std::span<const Index> ks,
                                    std::span<const BenchMode> modes) {
  std::vector<BenchSummary> out;
  for (Index k : ks) {
    for (const auto& mode : modes) {
      BenchSummary s;
      s.k = k;
      s.mode = mode;
      std::vector<double> elapsed;
      double ratio_sum = 0.0;
      std::size_t ratio_count = 0;
      for (const auto& row : rows) {
        if (row.k != k || !(row.mode == mode)) continue;
        ++s.queries;
        s.mean_candidates += static_cast<double>(row.candidates);
        s.mean_pages_read += static_cast<double>(row.pages_read);
        elapsed.push_back(row.elapsed_us);
        if (row.overall_ratio) {
          ratio_sum += *row.overall_ratio;
          ++ratio_count;
        } else {
          ++s.degenerate;
        }
      }
      if (s.queries > 0) {
        const auto q = static_cast<double>(s.queries);
        s.mean_candidates /= q;
        s.mean_pages_read /= q;
        s.mean_elapsed_us = std::accumulate(elapsed.begin(), elapsed.end(), 0.0) / q;
        s.p50_elapsed_us = percentile(elapsed, 0.5);
        s.p95_elapsed_us = percentile(elapsed, 0.95);
      }
      s.mean_overall_ratio = ratio_count > 0 ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

std::string BenchMode::label() const { return p ? "approx:" + shortest(*p) : "exact"; }

BenchMode parse_bench_mode(std::string_view text) {
  if (text == "exact") return {};
  constexpr std::string_view prefix = "approx:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto number = text.substr(prefix.size());
    double p = 0.0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), p);
    if (ec == std::errc() && ptr == number.data() + number.size() && p > 0.0 && p <= 1.0) return BenchMode{p};
  }
  throw InvalidArgument("bad mode '" + std::string(text) + "' (expected exact or approx:P with P in (0, 1])");
}

std::optional<double> overall_ratio(std::span<const ResultItem> approx, std::span<const ResultItem> exact) {
  if (approx.size() != exact.size()) {
    throw InvalidArgument("overall_ratio: result lists differ in length (" + std::to_string(approx.size()) + " vs " +
                          std::to_string(exact.size()) + ")");
  }
  if (exact.empty()) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (exact[i].distance == 0.0) {
      if (approx[i].distance != 0.0) return std::nullopt;
      sum += 1.0;
    } else {
      sum += approx[i].distance / exact[i].distance;
    }
  }
  return sum / static_cast<double>(exact.size());
}

BenchReport bench_run(const BregmanIndex& index, const Dataset& queries, std::span<const Index> ks,
                      std::span<const BenchMode> modes) {
  BenchReport report;
  if (queries.rows() == 0) return report;
  if (queries.cols() != index.dims) {
    throw InvalidArgument("bench: queries have " + std::to_string(queries.cols()) + " dimensions, index has " +
                          std::to_string(index.dims));
  }
  Index k_max = 0;
  for (Index k : ks) {
    if (k < 1 || k > index.records) {
      throw InvalidArgument("bench: k = " + std::to_string(k) + " outside [1, " + std::to_string(index.records) + "]");
    }
    k_max = std::max(k_max, k);
  }
  const bool need_oracle = std::any_of(modes.begin(), modes.end(), [](const BenchMode& m) { return m.p.has_value(); });
  Dataset points;
  if (need_oracle) points = load_all_points(index);

  for (Index qi = 0; qi < queries.rows(); ++qi) {
    const VectorXd query = queries.row(qi).cast<double>().transpose();
    std::vector<ResultItem> truth;
    if (need_oracle) truth = linear_scan_oracle(points, index.spec, query, k_max);
    for (Index k : ks) {
      for (const auto& mode : modes) {
        const auto start = Clock::now();
        const SearchResult result =
            mode.p ? approx_knn_search(index, query, k, *mode.p) : knn_search(index, query, k);
        const double elapsed = micros_since(start);

        BenchRow row;
        row.query = qi;
        row.k = k;
        row.mode = mode;
        row.candidates = result.report.candidates;
        row.pages_read = result.report.pages_read;
        row.elapsed_us = elapsed;
        row.shortfall = result.report.shortfall;
        if (mode.p) {
          row.overall_ratio = overall_ratio(result.items, std::span(truth).first(static_cast<std::size_t>(k)));
        } else {
          row.overall_ratio = 1.0;
        }
        report.rows.push_back(row);
      }
    }
  }
  report.summary = summarize(report.rows, ks, modes);
  return report;
}

BenchReport bench_run(const std::filesystem::path& index_path, const std::filesystem::path& query_path,
                      std::span<const Index> ks, std::span<const BenchMode> modes,
                      const std::filesystem::path& output) {
  const auto start = Clock::now();
  const BregmanIndex index = deserialize_index(index_path);
  const double load_ms = micros_since(start) / 1000.0;
  const Dataset queries = read_dataset(query_path, guess_dataset_format(query_path));

  BenchReport report = bench_run(index, queries, ks, modes);
  report.load_ms = load_ms;

  std::ofstream csv(output);
  if (!csv) throw IoError("cannot create " + output.string());
  write_report_csv(report, csv);
  auto json_path = output;
  json_path.replace_extension(".json");
  std::ofstream json(json_path);
  if (!json) throw IoError("cannot create " + json_path.string());
  write_report_json(report, json);
  return report;
}

void write_report_csv(const BenchReport& report, std::ostream& out, bool with_timing) {
  out << "# schema_version=" << kReportSchemaVersion << "\n";
  out << "query,k,mode,candidates,pages_read," << (with_timing ? "elapsed_us," : "") << "overall_ratio,shortfall\n";
  for (const auto& row : report.rows) {
    out << row.query << ',' << row.k << ',' << row.mode.label() << ',' << row.candidates << ',' << row.pages_read
        << ',';
    if (with_timing) out << shortest(row.elapsed_us) << ',';
    out << (row.overall_ratio ? shortest(*row.overall_ratio) : "") << ',' << (row.shortfall ? 1 : 0) << '\n';
  }
}

void write_report_json(const BenchReport& report, std::ostream& out) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["load_ms"] = report.load_ms;
  auto& rows = doc["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"query", row.query},
                    {"k", row.k},
                    {"mode", row.mode.label()},
                    {"candidates", row.candidates},
                    {"pages_read", row.pages_read},
                    {"elapsed_us", row.elapsed_us},
                    {"overall_ratio", row.overall_ratio ? nlohmann::json(*row.overall_ratio) : nlohmann::json()},
                    {"shortfall", row.shortfall}});
  }
  auto& summary = doc["summary"] = nlohmann::json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"k", s.k},
                       {"mode", s.mode.label()},
                       {"queries", s.queries},
                       {"mean_candidates", s.mean_candidates},
                       {"mean_pages_read", s.mean_pages_read},
                       {"mean_elapsed_us", s.mean_elapsed_us},
                       {"p50_elapsed_us", s.p50_elapsed_us},
                       {"p95_elapsed_us", s.p95_elapsed_us},
                       {"mean_overall_ratio", s.mean_overall_ratio},
                       {"degenerate", s.degenerate}});
  }
  out << doc.dump(2) << "\n";
}

std::vector<SweepRow> sweep_partitions(const Dataset& data, const DivergenceSpec& spec, SearchConfig config,
                                       const Dataset& queries, Index k, std::span<const Index> partitions) {
  if (queries.rows() > 0 && queries.cols() != data.cols()) {
    throw InvalidArgument("sweep: queries have " + std::to_string(queries.cols()) + " dimensions, data has " +
                          std::to_string(data.cols()));
  }
  std::vector<SweepRow> rows;
  for (Index m : partitions) {
    config.partitions = m;
    SweepRow row;
    row.partitions = m;
    const auto start = Clock::now();
    const BregmanIndex index = build_index(data, spec, config);
    row.build_ms = micros_since(start) / 1000.0;
    for (Index qi = 0; qi < queries.rows(); ++qi) {
      const VectorXd query = queries.row(qi).cast<double>().transpose();
      const auto t0 = Clock::now();
      const SearchResult result = knn_search(index, query, k);
      row.mean_elapsed_us += micros_since(t0);
      row.mean_candidates += static_cast<double>(result.report.candidates);
      row.mean_pages_read += static_cast<double>(result.report.pages_read);
    }
    if (queries.rows() > 0) {
      const auto q = static_cast<double>(queries.rows());
      row.mean_elapsed_us /= q;
      row.mean_candidates /= q;
      row.mean_pages_read /= q;
    }
    rows.push_back(row);
  }
  return rows;
}

std::pair<Dataset, Dataset> sample_queries(const Dataset& data, Index count, std::uint64_t seed) {
  if (count < 0 || count > data.rows()) {
    throw InvalidArgument("sample_queries: cannot take " + std::to_string(count) + " of " +
                          std::to_string(data.rows()) + " rows");
  }
  std::vector<Index> rows(static_cast<std::size_t>(data.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::vector<Index> picked(rows.begin(), rows.begin() + count);
  std::vector<Index> rest(rows.begin() + count, rows.end());
  std::sort(picked.begin(), picked.end());
  std::sort(rest.begin(), rest.end());
  return {data(picked, Eigen::all), data(rest, Eigen::all)};
}

}  // namespace bregforest
