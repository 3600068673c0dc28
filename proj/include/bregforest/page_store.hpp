#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "bregforest/types.hpp"

namespace bregforest {

inline constexpr std::size_t kDefaultPageSize = 32768;

// Location of one full-dimensional record in the point store.
struct PointAddress {
  std::uint64_t page = 0;
  std::uint64_t slot = 0;

  friend auto operator<=>(const PointAddress&, const PointAddress&) = default;
};

// Distinct pages fetched; owned by one query.
struct IoCounter {
  std::uint64_t pages_read = 0;

  void reset() { pages_read = 0; }
};

/// Fixed-size pages of float32 records, packed in write order. Backed either
/// by an in-memory buffer or by a region of a file. Immutable once written;
/// concurrent readers are fine.
class PageStore {
 public:
  class Backing;

  PageStore() = default;

  std::size_t page_size() const { return page_size_; }
  Index dims() const { return dims_; }
  std::size_t record_width() const { return static_cast<std::size_t>(dims_) * sizeof(float); }
  std::size_t records_per_page() const { return page_size_ / record_width(); }
  std::uint64_t page_count() const { return page_count_; }
  std::uint64_t records() const { return order_.size(); }

  // order()[position] is the record id stored at that position.
  std::span<const RecordId> order() const { return order_; }

  PointAddress address_of_position(std::uint64_t position) const {
    return {position / records_per_page(), position % records_per_page()};
  }

  // Throws CorruptionError for addresses that do not resolve.
  std::uint64_t position_of(const PointAddress& address) const;
  RecordId record_id(const PointAddress& address) const { return order_[position_of(address)]; }

  // Reads one whole page (page_size bytes). Not counted anywhere.
  void read_page(std::uint64_t page, std::span<std::byte> out) const;

  // Raw bytes of every page, in order (used for serialisation).
  std::vector<std::byte> all_pages() const;

  // Store over `page_count` pages of a file, starting at byte `offset`.
  static PageStore open_file(const std::filesystem::path& path, std::uint64_t offset, std::size_t page_size, Index dims,
                             std::vector<RecordId> order);
  static PageStore from_bytes(std::vector<std::byte> pages, std::size_t page_size, Index dims,
                              std::vector<RecordId> order);

  bool file_backed() const;

 private:
  std::size_t page_size_ = 0;
  Index dims_ = 0;
  std::uint64_t page_count_ = 0;
  std::vector<RecordId> order_;
  std::shared_ptr<const Backing> backing_;
};

struct WrittenStore {
  PageStore store;
  // addresses[record id]
  std::vector<PointAddress> addresses;
};

/// Packs `points` sequentially in `order` into pages of `page_size` bytes
/// (a power of two holding at least one record). When `path` is given the
/// pages are also written there and the store reads them back from disk.
WrittenStore write_point_store(const Dataset& points, std::span<const RecordId> order, std::size_t page_size,
                               const std::filesystem::path& path = {});

struct FetchedPoints {
  std::vector<RecordId> ids;
  Dataset points;  // one row per requested address, in request order
};

/// Reads the records at `addresses`. Each distinct page is read once and
/// counted once in `counter`.
FetchedPoints fetch_points(const PageStore& store, std::span<const PointAddress> addresses, IoCounter& counter);

}  // namespace bregforest
