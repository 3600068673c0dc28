#include "bregforest/page_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "bregforest/error.hpp"

namespace bregforest {

class PageStore::Backing {
 public:
  virtual ~Backing() = default;
  virtual void read(std::uint64_t offset, std::span<std::byte> out) const = 0;
  virtual bool file() const = 0;
};

namespace {

class MemoryBacking final : public PageStore::Backing {
 public:
  explicit MemoryBacking(std::vector<std::byte> bytes) : bytes_(std::move(bytes)) {}
  void read(std::uint64_t offset, std::span<std::byte> out) const override {
    if (offset + out.size() > bytes_.size()) throw CorruptionError("page store: read past end of pages");
    std::memcpy(out.data(), bytes_.data() + offset, out.size());
  }
  bool file() const override { return false; }

 private:
  std::vector<std::byte> bytes_;
};

// pread() keeps concurrent readers independent of a shared file position.
class FileBacking final : public PageStore::Backing {
 public:
  FileBacking(const std::filesystem::path& path, std::uint64_t base) : base_(base) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw IoError("page store: cannot open " + path.string() + ": " + std::strerror(errno));
  }
  ~FileBacking() override {
    if (fd_ >= 0) ::close(fd_);
  }
  FileBacking(const FileBacking&) = delete;
  FileBacking& operator=(const FileBacking&) = delete;

  void read(std::uint64_t offset, std::span<std::byte> out) const override {
    std::size_t done = 0;
    while (done < out.size()) {
      const auto got = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(base_ + offset + done));
      if (got < 0) {
        if (errno == EINTR) continue;
        throw IoError(std::string("page store: read failed: ") + std::strerror(errno));
      }
      if (got == 0) throw TruncatedFile("page store: file ends inside page data");
      done += static_cast<std::size_t>(got);
    }
  }
  bool file() const override { return true; }

 private:
  int fd_ = -1;
  std::uint64_t base_;
};

void check_geometry(std::size_t page_size, Index dims) {
  if (page_size == 0 || (page_size & (page_size - 1)) != 0) {
    throw InvalidArgument("page store: page size " + std::to_string(page_size) + " is not a power of two");
  }
  if (dims < 1) throw InvalidArgument("page store: records need at least one dimension");
  const auto width = static_cast<std::size_t>(dims) * sizeof(float);
  if (page_size < width) {
    throw InvalidArgument("page store: page size " + std::to_string(page_size) + " cannot hold one " +
                          std::to_string(width) + "-byte record");
  }
}

std::uint64_t pages_for(std::uint64_t records, std::size_t per_page) {
  return records == 0 ? 0 : (records + per_page - 1) / per_page;
}

}  // namespace

std::uint64_t PageStore::position_of(const PointAddress& address) const {
  const auto per_page = records_per_page();
  if (address.page >= page_count_ || address.slot >= per_page) {
    throw CorruptionError("page store: address (" + std::to_string(address.page) + ", " +
                          std::to_string(address.slot) + ") does not resolve");
  }
  const auto position = address.page * per_page + address.slot;
  if (position >= order_.size()) {
    throw CorruptionError("page store: address (" + std::to_string(address.page) + ", " +
                          std::to_string(address.slot) + ") points past the last record");
  }
  return position;
}

void PageStore::read_page(std::uint64_t page, std::span<std::byte> out) const {
  if (page >= page_count_) throw CorruptionError("page store: page " + std::to_string(page) + " does not exist");
  if (out.size() != page_size_) throw InvalidArgument("page store: output buffer must be one page");
  backing_->read(page * page_size_, out);
}

std::vector<std::byte> PageStore::all_pages() const {
  std::vector<std::byte> bytes(page_count_ * page_size_);
  if (!bytes.empty()) backing_->read(0, bytes);
  return bytes;
}

bool PageStore::file_backed() const { return backing_ && backing_->file(); }

PageStore PageStore::open_file(const std::filesystem::path& path, std::uint64_t offset, std::size_t page_size,
                               Index dims, std::vector<RecordId> order) {
  check_geometry(page_size, dims);
  PageStore store;
  store.page_size_ = page_size;
  store.dims_ = dims;
  store.order_ = std::move(order);
  store.page_count_ = pages_for(store.order_.size(), store.records_per_page());
  store.backing_ = std::make_shared<FileBacking>(path, offset);
  return store;
}

PageStore PageStore::from_bytes(std::vector<std::byte> pages, std::size_t page_size, Index dims,
                                std::vector<RecordId> order) {
  check_geometry(page_size, dims);
  PageStore store;
  store.page_size_ = page_size;
  store.dims_ = dims;
  store.order_ = std::move(order);
  store.page_count_ = pages_for(store.order_.size(), store.records_per_page());
  if (pages.size() != store.page_count_ * page_size) {
    throw CorruptionError("page store: expected " + std::to_string(store.page_count_ * page_size) +
                          " bytes of pages, got " + std::to_string(pages.size()));
  }
  store.backing_ = std::make_shared<MemoryBacking>(std::move(pages));
  return store;
}

WrittenStore write_point_store(const Dataset& points, std::span<const RecordId> order, std::size_t page_size,
                               const std::filesystem::path& path) {
  check_geometry(page_size, points.cols());
  const auto n = static_cast<std::uint64_t>(points.rows());
  if (order.size() != n) throw InvalidArgument("write_point_store: order must list every record exactly once");
  std::vector<bool> seen(n, false);
  for (RecordId id : order) {
    if (id >= n || seen[id]) throw InvalidArgument("write_point_store: order is not a permutation of 0..n-1");
    seen[id] = true;
  }

  const auto width = static_cast<std::size_t>(points.cols()) * sizeof(float);
  const auto per_page = page_size / width;
  const auto pages = pages_for(n, per_page);
  std::vector<std::byte> bytes(pages * page_size, std::byte{0});
  WrittenStore out;
  out.addresses.resize(n);
  for (std::uint64_t pos = 0; pos < n; ++pos) {
    const RecordId id = order[pos];
    const PointAddress address{pos / per_page, pos % per_page};
    std::byte* dst = bytes.data() + address.page * page_size + address.slot * width;
    for (Index c = 0; c < points.cols(); ++c) detail::put_f32(dst + c * sizeof(float), points(static_cast<Index>(id), c));
    out.addresses[id] = address;
  }

  std::vector<RecordId> stored_order(order.begin(), order.end());
  if (path.empty()) {
    out.store = PageStore::from_bytes(std::move(bytes), page_size, points.cols(), std::move(stored_order));
    return out;
  }
  {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("write_point_store: cannot create " + path.string());
    file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw IoError("write_point_store: write to " + path.string() + " failed");
  }
  out.store = PageStore::open_file(path, 0, page_size, points.cols(), std::move(stored_order));
  return out;
}

FetchedPoints fetch_points(const PageStore& store, std::span<const PointAddress> addresses, IoCounter& counter) {
  FetchedPoints out;
  out.ids.resize(addresses.size());
  out.points.resize(static_cast<Index>(addresses.size()), store.dims());
  if (addresses.empty()) return out;

  // Visit requests grouped by page so every page is read once.
  std::vector<std::size_t> request(addresses.size());
  for (std::size_t i = 0; i < request.size(); ++i) {
    store.position_of(addresses[i]);
    request[i] = i;
  }
  auto by_address = [&](std::size_t a, std::size_t b) { return addresses[a] < addresses[b]; };
  if (!std::is_sorted(request.begin(), request.end(), by_address)) std::sort(request.begin(), request.end(), by_address);

  const auto width = store.record_width();
  std::vector<std::byte> page(store.page_size());
  std::uint64_t loaded = ~std::uint64_t{0};
  for (std::size_t i : request) {
    const PointAddress& address = addresses[i];
    if (address.page != loaded) {
      store.read_page(address.page, page);
      loaded = address.page;
      ++counter.pages_read;
    }
    const std::byte* src = page.data() + address.slot * width;
    for (Index c = 0; c < store.dims(); ++c) out.points(static_cast<Index>(i), c) = detail::get_f32(src + c * sizeof(float));
    out.ids[i] = store.record_id(address);
  }
  return out;
}

}  // namespace bregforest
