#include "bregforest/index_io.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "binary_io.hpp"
#include "bregforest/error.hpp"

namespace bregforest {

namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();

// Read-only mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw IoError("cannot open index " + path.string() + ": " + std::strerror(errno));
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
      ::close(fd_);
      throw IoError("cannot stat index " + path.string());
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* mapped = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd_, 0);
      if (mapped == MAP_FAILED) {
        ::close(fd_);
        throw IoError("cannot map index " + path.string());
      }
      data_ = static_cast<const std::byte*>(mapped);
    }
  }
  ~MappedFile() {
    if (data_) ::munmap(const_cast<std::byte*>(data_), size_);
    if (fd_ >= 0) ::close(fd_);
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  std::span<const std::byte> bytes() const { return {data_, size_}; }

 private:
  int fd_ = -1;
  const std::byte* data_ = nullptr;
  std::size_t size_ = 0;
};

void write_vector(ByteWriter& out, const VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) out.f64(v[i]);
}

VectorXd read_vector(ByteReader& in, Index size) {
  VectorXd v(size);
  for (Index i = 0; i < size; ++i) v[i] = in.f64();
  return v;
}

// Nodes in depth-first pre-order, as indices into tree.nodes.
std::vector<Index> preorder(const BBTree& tree) {
  std::vector<Index> order;
  if (tree.nodes.empty()) return order;
  std::vector<Index> stack{0};
  while (!stack.empty()) {
    const Index node = stack.back();
    stack.pop_back();
    order.push_back(node);
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (!n.is_leaf()) {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return order;
}

void write_tree(ByteWriter& out, const BBTree& tree) {
  const Index width = tree.points.cols();
  out.u64(static_cast<std::uint64_t>(width));
  out.u64(tree.nodes.size());
  out.u64(tree.ids.size());
  for (std::size_t i = 0; i < tree.ids.size(); ++i) {
    out.u64(tree.ids[i]);
    out.u64(tree.addresses[i].page);
    out.u64(tree.addresses[i].slot);
    for (Index c = 0; c < width; ++c) out.f32(tree.points(static_cast<Index>(i), c));
  }
  const auto order = preorder(tree);
  std::vector<std::uint64_t> rank(tree.nodes.size(), kNone);
  for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = i;
  for (Index node : order) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    out.u64(n.is_leaf() ? 1 : 0);
    out.u64(static_cast<std::uint64_t>(n.begin));
    out.u64(static_cast<std::uint64_t>(n.end));
    out.u64(n.is_leaf() ? kNone : rank[static_cast<std::size_t>(n.left)]);
    out.u64(n.is_leaf() ? kNone : rank[static_cast<std::size_t>(n.right)]);
    out.f64(n.ball.radius);
    write_vector(out, n.ball.center);
  }
}

BBTree read_tree(ByteReader& in, const DivergenceSpec& spec, std::uint64_t expected_width, std::uint64_t records) {
  const auto width = in.u64();
  const auto node_count = in.u64();
  const auto entry_count = in.u64();
  if (width != expected_width || entry_count != records || node_count == 0 || node_count > 2 * records) {
    throw CorruptionError("index: tree section does not match the header");
  }
  BBTree tree(spec);
  tree.ids.resize(entry_count);
  tree.addresses.resize(entry_count);
  tree.points.resize(static_cast<Index>(entry_count), static_cast<Index>(width));
  for (std::uint64_t i = 0; i < entry_count; ++i) {
    tree.ids[i] = in.u64();
    tree.addresses[i].page = in.u64();
    tree.addresses[i].slot = in.u64();
    for (std::uint64_t c = 0; c < width; ++c) tree.points(static_cast<Index>(i), static_cast<Index>(c)) = in.f32();
  }
  tree.nodes.resize(node_count);
  for (auto& node : tree.nodes) {
    const bool leaf = in.u64() != 0;
    node.begin = static_cast<Index>(in.u64());
    node.end = static_cast<Index>(in.u64());
    const auto left = in.u64();
    const auto right = in.u64();
    node.left = leaf ? -1 : static_cast<Index>(left);
    node.right = leaf ? -1 : static_cast<Index>(right);
    node.ball.radius = in.f64();
    node.ball.center = read_vector(in, static_cast<Index>(width));
    if (node.begin < 0 || node.end < node.begin || static_cast<std::uint64_t>(node.end) > entry_count ||
        (!leaf && (left >= node_count || right >= node_count))) {
      throw CorruptionError("index: malformed tree node");
    }
  }
  return tree;
}

struct ParsedHeader {
  IndexHeader header;
  std::uint64_t stats_offset = 0;
  std::uint64_t order_offset = 0;
};

ParsedHeader parse_header(ByteReader& in) {
  const auto magic = in.bytes(8);
  if (std::memcmp(magic.data(), kIndexMagic, 4) != 0) throw BadMagic("index: bad magic (expected \"BBF1\")");
  ParsedHeader parsed;
  IndexHeader& h = parsed.header;
  h.version = in.u64();
  if (h.version != kIndexVersion) {
    throw VersionMismatch("index: file version " + std::to_string(h.version) + ", this build reads version " +
                          std::to_string(kIndexVersion));
  }
  h.records = in.u64();
  h.dims = in.u64();
  h.partitions = in.u64();
  const auto kind = in.u64();
  if (kind > static_cast<std::uint64_t>(DivergenceKind::kExponential)) throw CorruptionError("index: unknown divergence");
  h.divergence = static_cast<DivergenceKind>(kind);
  h.itakura_saito_floor = in.f64();
  const auto weight_count = in.u64();
  if (weight_count > h.dims) throw CorruptionError("index: weight count exceeds dimensionality");
  h.weights.resize(weight_count);
  for (auto& w : h.weights) w = in.f64();

  h.config.partitions = static_cast<Index>(in.u64());
  h.config.pccp = in.u64() != 0;
  h.config.leaf_capacity = static_cast<Index>(in.u64());
  h.config.page_size = in.u64();
  h.config.seed = in.u64();
  h.config.fit_samples = static_cast<Index>(in.u64());
  if (in.u64() != 0) h.config.approx_p = in.f64(); else in.f64();
  h.config.relation.max_iterations = static_cast<int>(in.u64());
  h.config.relation.tolerance = in.f64();
  h.config.relation.slack = in.f64();

  h.anchor_tree = in.u64();
  if (h.dims == 0 || h.partitions == 0 || h.partitions > h.dims || h.records == 0) {
    throw CorruptionError("index: inconsistent sizes in header");
  }
  h.perm.resize(h.dims);
  for (auto& p : h.perm) p = static_cast<Index>(in.u64());
  h.offsets.resize(h.partitions + 1);
  for (auto& o : h.offsets) o = static_cast<Index>(in.u64());

  const bool has_cost = in.u64() != 0;
  CostParams cost;
  cost.a = in.f64();
  cost.alpha = in.f64();
  cost.beta = in.f64();
  cost.n = in.u64();
  cost.d = in.u64();
  cost.k = in.u64();
  cost.degenerate = in.u64() != 0;
  if (has_cost) h.cost = cost;

  h.page_size = in.u64();
  h.records_per_page = in.u64();
  h.page_count = in.u64();
  parsed.stats_offset = in.u64();
  parsed.order_offset = in.u64();
  h.transforms_offset = in.u64();
  h.tree_offsets.resize(h.partitions);
  for (auto& t : h.tree_offsets) t = in.u64();
  h.points_offset = in.u64();
  return parsed;
}

}  // namespace

void serialize_index(const BregmanIndex& index, const std::filesystem::path& path) {
  const auto& layout = index.layout();
  const auto& store = index.forest.store;
  const auto m = static_cast<std::uint64_t>(layout.partitions());
  ByteWriter out;

  std::byte magic[8] = {};
  std::memcpy(magic, kIndexMagic, 4);
  out.bytes(magic);
  out.u64(kIndexVersion);
  out.u64(static_cast<std::uint64_t>(index.records));
  out.u64(static_cast<std::uint64_t>(index.dims));
  out.u64(m);
  out.u64(static_cast<std::uint64_t>(index.spec.kind()));
  out.f64(index.spec.domain_floor());
  out.u64(static_cast<std::uint64_t>(index.spec.weights().size()));
  write_vector(out, index.spec.weights());

  const SearchConfig& cfg = index.config;
  out.u64(static_cast<std::uint64_t>(cfg.partitions));
  out.u64(cfg.pccp ? 1 : 0);
  out.u64(static_cast<std::uint64_t>(cfg.leaf_capacity));
  out.u64(cfg.page_size);
  out.u64(cfg.seed);
  out.u64(static_cast<std::uint64_t>(cfg.fit_samples));
  out.u64(cfg.approx_p ? 1 : 0);
  out.f64(cfg.approx_p.value_or(0.0));
  out.u64(static_cast<std::uint64_t>(cfg.relation.max_iterations));
  out.f64(cfg.relation.tolerance);
  out.f64(cfg.relation.slack);

  out.u64(static_cast<std::uint64_t>(index.forest.anchor_tree));
  for (Index p : layout.perm()) out.u64(static_cast<std::uint64_t>(p));
  for (Index o : layout.offsets()) out.u64(static_cast<std::uint64_t>(o));

  // Fixed-size slot; the flag marks whether it holds a fit.
  out.u64(index.cost ? 1 : 0);
  const CostParams cost = index.cost.value_or(CostParams{});
  out.f64(cost.a);
  out.f64(cost.alpha);
  out.f64(cost.beta);
  out.u64(cost.n);
  out.u64(cost.d);
  out.u64(cost.k);
  out.u64(cost.degenerate ? 1 : 0);

  out.u64(store.page_size());
  out.u64(store.records_per_page());
  out.u64(store.page_count());
  const std::size_t table_at = out.size();
  for (std::uint64_t i = 0; i < 3 + m + 1; ++i) out.u64(0);

  std::vector<std::uint64_t> section;
  section.push_back(out.size());  // stats
  const auto& stats = index.stats;
  write_vector(out, stats.mean);
  write_vector(out, stats.variance);
  write_vector(out, stats.min);
  write_vector(out, stats.max);
  out.u64(static_cast<std::uint64_t>(stats.histogram.cols()));
  for (Index r = 0; r < stats.histogram.rows(); ++r) {
    for (Index c = 0; c < stats.histogram.cols(); ++c) out.u64(stats.histogram(r, c));
  }

  section.push_back(out.size());  // store order
  for (RecordId id : store.order()) out.u64(id);

  section.push_back(out.size());  // transforms
  const auto& table = index.transforms.raw();
  for (Index r = 0; r < table.rows(); ++r) {
    for (Index c = 0; c < table.cols(); ++c) out.f64(table(r, c));
  }

  for (const auto& tree : index.forest.trees) {
    section.push_back(out.size());
    write_tree(out, tree);
  }
  section.push_back(out.size());  // points
  for (std::size_t i = 0; i < section.size(); ++i) out.patch_u64(table_at + 8 * i, section[i]);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create index file " + path.string());
  file.write(reinterpret_cast<const char*>(out.buffer().data()), static_cast<std::streamsize>(out.size()));
  const auto pages = store.all_pages();
  file.write(reinterpret_cast<const char*>(pages.data()), static_cast<std::streamsize>(pages.size()));
  file.flush();
  if (!file) throw IoError("writing index file " + path.string() + " failed");
}

IndexHeader read_index_header(const std::filesystem::path& path) {
  MappedFile file(path);
  ByteReader in(file.bytes());
  return parse_header(in).header;
}

BregmanIndex deserialize_index(const std::filesystem::path& path) {
  MappedFile file(path);
  const auto bytes = file.bytes();
  ByteReader in(bytes);
  const ParsedHeader parsed = parse_header(in);
  const IndexHeader& h = parsed.header;

  const auto expected_end = h.points_offset + h.page_count * h.page_size;
  if (h.points_offset > bytes.size() || expected_end > bytes.size()) {
    throw TruncatedFile("index: file has " + std::to_string(bytes.size()) + " bytes, point pages end at " +
                        std::to_string(expected_end));
  }

  std::optional<VectorXd> weights;
  if (h.divergence == DivergenceKind::kDiagonalMahalanobis) {
    weights = Eigen::Map<const VectorXd>(h.weights.data(), static_cast<Index>(h.weights.size()));
  }
  BregmanIndex index(DivergenceSpec::from_kind(h.divergence, weights, h.itakura_saito_floor));
  index.config = h.config;
  index.records = static_cast<Index>(h.records);
  index.dims = static_cast<Index>(h.dims);
  index.cost = h.cost;
  PartitionLayout layout(h.perm, h.offsets);

  const Index d = index.dims;
  in.seek(parsed.stats_offset);
  index.stats.mean = read_vector(in, d);
  index.stats.variance = read_vector(in, d);
  index.stats.min = read_vector(in, d);
  index.stats.max = read_vector(in, d);
  const auto bins = in.u64();
  if (bins != static_cast<std::uint64_t>(DimStats::kHistogramBins)) throw CorruptionError("index: bad histogram width");
  index.stats.histogram.resize(d, static_cast<Index>(bins));
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < static_cast<Index>(bins); ++c) index.stats.histogram(r, c) = in.u64();
  }

  in.seek(parsed.order_offset);
  std::vector<RecordId> order(h.records);
  for (auto& id : order) {
    id = in.u64();
    if (id >= h.records) throw CorruptionError("index: store order names a record past n");
  }

  in.seek(h.transforms_offset);
  index.transforms = TransformTable(index.records, layout.partitions());
  auto& table = index.transforms.raw();
  for (Index r = 0; r < table.rows(); ++r) {
    for (Index c = 0; c < table.cols(); ++c) table(r, c) = in.f64();
  }

  for (Index part = 0; part < layout.partitions(); ++part) {
    in.seek(h.tree_offsets[static_cast<std::size_t>(part)]);
    index.forest.trees.push_back(read_tree(in, index.spec.restrict(layout.subspace(part)),
                                           static_cast<std::uint64_t>(layout.width(part)), h.records));
  }
  index.forest.layout = std::move(layout);
  index.forest.anchor_tree = static_cast<Index>(h.anchor_tree);
  index.forest.store = PageStore::open_file(path, h.points_offset, h.page_size, d, std::move(order));
  if (index.forest.store.page_count() != h.page_count || index.forest.store.records_per_page() != h.records_per_page) {
    throw CorruptionError("index: page geometry does not match the header");
  }
  return index;
}

}  // namespace bregforest
