#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bregforest/bench.hpp"
#include "bregforest/dataset_io.hpp"
#include "bregforest/error.hpp"
#include "bregforest/index_io.hpp"
#include "bregforest/search.hpp"

namespace fs = std::filesystem;
using namespace bregforest;

namespace {

struct InputOptions {
  fs::path path;
  std::string format;
  bool csv_header = false;
};

void add_input(CLI::App* cmd, InputOptions& in, const std::string& flag = "--input") {
  cmd->add_option(flag, in.path, "Dataset file")->required();
  cmd->add_option("--format", in.format, "fvecs or csv (default: from extension)")
      ->check(CLI::IsMember({"fvecs", "csv"}));
  cmd->add_flag("--csv-header", in.csv_header, "Skip the first CSV line");
}

Dataset load(const InputOptions& in) {
  const DatasetFormat format = in.format.empty() ? guess_dataset_format(in.path) : parse_dataset_format(in.format);
  return read_dataset(in.path, format, in.csv_header);
}

struct SpecOptions {
  std::string divergence = "se";
  fs::path weights;
};

void add_spec(CLI::App* cmd, SpecOptions& s) {
  cmd->add_option("--divergence", s.divergence, "se, mahalanobis, isd or exp")
      ->check(CLI::IsMember({"se", "mahalanobis", "isd", "exp"}));
  cmd->add_option("--weights", s.weights, "CSV of d positive reals (mahalanobis)");
}

DivergenceSpec make_spec(const SpecOptions& s) {
  const DivergenceKind kind = parse_divergence_kind(s.divergence);
  std::optional<VectorXd> weights;
  if (!s.weights.empty()) {
    const Dataset w = read_csv(s.weights);
    weights = Eigen::Map<const Eigen::VectorXf>(w.data(), w.size()).cast<double>();
  }
  return DivergenceSpec::from_kind(kind, std::move(weights));
}

struct ConfigOptions {
  std::string partitions = "auto";
  std::string pccp = "on";
  Index leaf_capacity = 64;
  std::size_t page_size = kDefaultPageSize;
  std::uint64_t seed = 0;
  Index fit_samples = kDefaultFitSamples;
};

void add_config(CLI::App* cmd, ConfigOptions& c, bool with_partitions = true) {
  if (with_partitions) cmd->add_option("--partitions", c.partitions, "auto or a positive count");
  cmd->add_option("--pccp", c.pccp, "on or off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--leaf-capacity", c.leaf_capacity)->check(CLI::PositiveNumber);
  cmd->add_option("--page-size", c.page_size, "Page size in bytes")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed);
  cmd->add_option("--fit-samples", c.fit_samples)->check(CLI::PositiveNumber);
}

SearchConfig make_config(const ConfigOptions& c) {
  SearchConfig config;
  if (c.partitions != "auto") {
    std::size_t used = 0;
    long long m = 0;
    try {
      m = std::stoll(c.partitions, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != c.partitions.size() || m <= 0) throw InvalidArgument("--partitions must be auto or a positive integer");
    config.partitions = static_cast<Index>(m);
  }
  config.pccp = c.pccp == "on";
  config.leaf_capacity = c.leaf_capacity;
  config.page_size = c.page_size;
  config.seed = c.seed;
  config.fit_samples = c.fit_samples;
  config.validate();
  return config;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  return out.str();
}

int run_build(const InputOptions& in, const SpecOptions& s, const ConfigOptions& c, const fs::path& out) {
  const Dataset data = load(in);
  const auto start = std::chrono::steady_clock::now();
  const BregmanIndex index = build_index(data, make_spec(s), make_config(c));
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  serialize_index(index, out);
  std::cout << "built " << out.string() << ": n=" << index.records << " d=" << index.dims
            << " M=" << index.partitions() << " pages=" << index.forest.store.page_count()
            << " build_ms=" << std::fixed << std::setprecision(1) << ms << "\n";
  return 0;
}

int run_query(const fs::path& index_path, const InputOptions& queries_in, Index k, std::optional<double> approx) {
  const BregmanIndex index = deserialize_index(index_path);
  const Dataset queries = load(queries_in);
  if (queries.rows() == 0) {
    std::cerr << "warning: no queries in " << queries_in.path.string() << "\n";
    return 0;
  }
  if (queries.cols() != index.dims) {
    throw InvalidArgument("query dimension " + std::to_string(queries.cols()) + " does not match index dimension " +
                          std::to_string(index.dims));
  }
  std::cout << "query,rank,id,distance,candidates,pages_read\n" << std::setprecision(10);
  for (Index q = 0; q < queries.rows(); ++q) {
    const VectorXd y = queries.row(q).cast<double>().transpose();
    const SearchResult result = approx ? approx_knn_search(index, y, k, *approx) : knn_search(index, y, k);
    for (std::size_t r = 0; r < result.items.size(); ++r) {
      std::cout << q << ',' << r << ',' << result.items[r].id << ',' << result.items[r].distance << ','
                << result.report.candidates << ',' << result.report.pages_read << '\n';
    }
  }
  return 0;
}

std::vector<Index> parse_k_list(const std::string& text) {
  std::vector<Index> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    long long k = 0;
    try {
      k = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || k <= 0) throw InvalidArgument("bad k value '" + item + "'");
    ks.push_back(static_cast<Index>(k));
  }
  if (ks.empty()) throw InvalidArgument("empty k list");
  return ks;
}

int run_bench(const fs::path& index_path, const fs::path& query_path, const std::string& k_text,
              const std::string& mode_text, const fs::path& out) {
  const std::vector<Index> ks = parse_k_list(k_text);
  std::vector<BenchMode> modes;
  std::stringstream in(mode_text);
  std::string item;
  while (std::getline(in, item, ',')) modes.push_back(parse_bench_mode(item));
  const BenchReport report = bench_run(index_path, query_path, ks, modes, out);
  if (report.rows.empty()) {
    std::cerr << "warning: no queries in " << query_path.string() << "; wrote an empty report\n";
    return 0;
  }
  std::cout << "load_ms=" << report.load_ms << "\n"
            << "k,mode,queries,mean_candidates,mean_pages_read,mean_us,p50_us,p95_us,mean_or,degenerate\n";
  for (const auto& s : report.summary) {
    std::cout << s.k << ',' << s.mode.label() << ',' << s.queries << ',' << s.mean_candidates << ','
              << s.mean_pages_read << ',' << s.mean_elapsed_us << ',' << s.p50_elapsed_us << ',' << s.p95_elapsed_us
              << ',' << s.mean_overall_ratio << ',' << s.degenerate << '\n';
  }
  return 0;
}

int run_sweep(const InputOptions& in, const SpecOptions& s, const ConfigOptions& c, const InputOptions& queries_in,
              Index k, Index lo, Index hi, const fs::path& out) {
  if (lo <= 0 || hi < lo) throw InvalidArgument("need 0 < --min <= --max");
  const Dataset data = load(in);
  const Dataset queries = load(queries_in);
  std::vector<Index> ms;
  for (Index m = lo; m <= hi && m <= data.cols(); m *= 2) ms.push_back(m);
  const auto rows = sweep_partitions(data, make_spec(s), make_config(c), queries, k, ms);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw IoError("cannot write " + out.string());
  }
  std::ostream& sink = out.empty() ? std::cout : file;
  sink << "# schema_version=" << kReportSchemaVersion << "\n"
       << "partitions,build_ms,mean_candidates,mean_pages_read,mean_elapsed_us\n";
  for (const auto& r : rows) {
    sink << r.partitions << ',' << r.build_ms << ',' << r.mean_candidates << ',' << r.mean_pages_read << ','
         << r.mean_elapsed_us << '\n';
  }
  return 0;
}

int run_stats(const fs::path& index_path) {
  const IndexHeader h = read_index_header(index_path);
  std::cout << "version: " << h.version << "\n"
            << "records: " << h.records << "\n"
            << "dims: " << h.dims << "\n"
            << "partitions: " << h.partitions << "\n"
            << "divergence: " << to_string(h.divergence) << "\n";
  if (!h.weights.empty()) std::cout << "weights: " << join(h.weights) << "\n";
  std::cout << "pccp: " << (h.config.pccp ? "on" : "off") << "\n"
            << "requested_partitions: " << (h.config.partitions == 0 ? "auto" : std::to_string(h.config.partitions))
            << "\n"
            << "leaf_capacity: " << h.config.leaf_capacity << "\n"
            << "seed: " << h.config.seed << "\n"
            << "fit_samples: " << h.config.fit_samples << "\n"
            << "perm: " << join(h.perm) << "\n"
            << "offsets: " << join(h.offsets) << "\n";
  if (h.cost) {
    std::cout << "cost_a: " << h.cost->a << "\n"
              << "cost_alpha: " << h.cost->alpha << "\n"
              << "cost_beta: " << h.cost->beta << "\n"
              << "cost_degenerate: " << (h.cost->degenerate ? "yes" : "no") << "\n";
  }
  std::cout << "page_size: " << h.page_size << "\n"
            << "records_per_page: " << h.records_per_page << "\n"
            << "page_count: " << h.page_count << "\n"
            << "points_offset: " << h.points_offset << "\n";
  return 0;
}

int run_sample(const InputOptions& in, Index count, std::uint64_t seed, const fs::path& out, const fs::path& rest) {
  const auto [queries, remaining] = sample_queries(load(in), count, seed);
  write_fvecs(queries, out);
  if (!rest.empty()) write_fvecs(remaining, rest);
  std::cout << "wrote " << queries.rows() << " queries to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman kNN search over partitioned ball-tree forests"};
  app.require_subcommand(1);

  InputOptions build_in;
  SpecOptions build_spec;
  ConfigOptions build_config;
  fs::path build_out;
  auto* build = app.add_subcommand("build", "Build an index file from a dataset");
  add_input(build, build_in);
  add_spec(build, build_spec);
  add_config(build, build_config);
  build->add_option("--out", build_out, "Index file")->required();

  fs::path query_index;
  InputOptions query_in;
  Index query_k = 10;
  std::optional<double> query_approx;
  auto* query = app.add_subcommand("query", "Answer kNN queries from an index");
  query->add_option("--index", query_index)->required()->check(CLI::ExistingFile);
  add_input(query, query_in, "--queries");
  query->add_option("--k", query_k)->check(CLI::PositiveNumber);
  query->add_option("--approx", query_approx, "Probability guarantee in (0, 1]");

  fs::path bench_index, bench_queries, bench_out;
  std::string bench_k = "20,40,60,80,100";
  std::string bench_modes = "exact";
  auto* bench = app.add_subcommand("bench", "Run queries x k x modes and write a report");
  bench->add_option("--index", bench_index)->required()->check(CLI::ExistingFile);
  bench->add_option("--queries", bench_queries)->required()->check(CLI::ExistingFile);
  bench->add_option("--k", bench_k, "Comma-separated k values");
  bench->add_option("--modes", bench_modes, "Comma-separated exact or approx:P");
  bench->add_option("--out", bench_out, "CSV report; a .json mirror is written next to it")->required();

  InputOptions sweep_in, sweep_queries;
  SpecOptions sweep_spec;
  ConfigOptions sweep_config;
  Index sweep_k = 20, sweep_min = 1, sweep_max = 64;
  fs::path sweep_out;
  auto* sweep = app.add_subcommand("sweep-m", "Build one index per partition count (powers of two) and compare");
  add_input(sweep, sweep_in);
  add_spec(sweep, sweep_spec);
  add_config(sweep, sweep_config, false);
  sweep->add_option("--queries", sweep_queries.path)->required();
  sweep->add_option("--k", sweep_k)->check(CLI::PositiveNumber);
  sweep->add_option("--min", sweep_min);
  sweep->add_option("--max", sweep_max);
  sweep->add_option("--out", sweep_out, "CSV output (default: stdout)");

  fs::path stats_index;
  auto* stats = app.add_subcommand("stats", "Print the header fields of an index file");
  stats->add_option("--index", stats_index)->required()->check(CLI::ExistingFile);

  InputOptions sample_in;
  Index sample_count = 50;
  std::uint64_t sample_seed = 0;
  fs::path sample_out, sample_rest;
  auto* sample = app.add_subcommand("sample-queries", "Hold out random rows as a query file");
  add_input(sample, sample_in);
  sample->add_option("--count", sample_count)->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed);
  sample->add_option("--out", sample_out, "Query fvecs file")->required();
  sample->add_option("--rest", sample_rest, "Remaining rows as fvecs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return run_build(build_in, build_spec, build_config, build_out);
    if (*query) return run_query(query_index, query_in, query_k, query_approx);
    if (*bench) return run_bench(bench_index, bench_queries, bench_k, bench_modes, bench_out);
    if (*sweep) {
      return run_sweep(sweep_in, sweep_spec, sweep_config, sweep_queries, sweep_k, sweep_min, sweep_max, sweep_out);
    }
    if (*stats) return run_stats(stats_index);
    if (*sample) return run_sample(sample_in, sample_count, sample_seed, sample_out, sample_rest);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
