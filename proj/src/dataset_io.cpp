#include "bregforest/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "bregforest/error.hpp"

namespace bregforest {

namespace {

std::vector<std::byte> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "fvecs") return DatasetFormat::kFvecs;
  if (name == "csv") return DatasetFormat::kCsv;
  throw InvalidArgument("unknown dataset format '" + std::string(name) + "' (expected fvecs or csv)");
}

DatasetFormat guess_dataset_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::kCsv : DatasetFormat::kFvecs;
}

Dataset read_fvecs(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.empty()) return Dataset(0, 0);
  if (bytes.size() < 4) throw FormatError(path.string() + ": short read at byte offset 0");
  const std::uint32_t d = detail::get_u32(bytes.data());
  if (d == 0) throw FormatError(path.string() + ": record at byte offset 0 declares dimension 0");
  const std::size_t record = 4 + 4 * static_cast<std::size_t>(d);
  const std::size_t n = bytes.size() / record;

  // Check every header first so a bad dimension is reported ahead of a
  // truncated tail.
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t at = i * record;
    if (at + 4 > bytes.size()) break;
    const std::uint32_t di = detail::get_u32(bytes.data() + at);
    if (di != d) {
      throw FormatError(path.string() + ": inconsistent dimension at byte offset " + std::to_string(at) + " (" +
                        std::to_string(di) + " vs " + std::to_string(d) + ")");
    }
  }
  if (bytes.size() % record != 0) {
    const std::size_t at = n * record;
    throw FormatError(path.string() + ": short read in record starting at byte offset " + std::to_string(at) +
                      " (" + std::to_string(bytes.size() - at) + " of " + std::to_string(record) + " bytes)");
  }

  Dataset out(static_cast<Index>(n), static_cast<Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const std::byte* row = bytes.data() + i * record + 4;
    for (std::uint32_t j = 0; j < d; ++j) out(static_cast<Index>(i), j) = detail::get_f32(row + 4 * j);
  }
  return out;
}

void write_fvecs(const Dataset& data, const std::filesystem::path& path) {
  std::vector<std::byte> bytes(static_cast<std::size_t>(data.rows()) * (4 + 4 * static_cast<std::size_t>(data.cols())));
  std::byte* out = bytes.data();
  for (Index i = 0; i < data.rows(); ++i) {
    detail::put_u32(out, static_cast<std::uint32_t>(data.cols()));
    out += 4;
    for (Index j = 0; j < data.cols(); ++j, out += 4) detail::put_f32(out, data(i, j));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("writing " + path.string() + " failed");
}

Dataset read_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<float> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    Index count = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw FormatError(path.string() + ": non-numeric cell '" + std::string(cell) + "' at line " +
                          std::to_string(line_no) + ", column " + std::to_string(count + 1));
      }
      values.push_back(static_cast<float>(v));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError(path.string() + ": ragged row at line " + std::to_string(line_no) + " (" +
                        std::to_string(count) + " columns, expected " + std::to_string(cols) + ")");
    }
    ++rows;
  }
  if (rows == 0) return Dataset(0, 0);
  return Eigen::Map<const Dataset>(values.data(), rows, cols);
}

Dataset read_dataset(const std::filesystem::path& path, DatasetFormat format, bool csv_header) {
  return format == DatasetFormat::kCsv ? read_csv(path, csv_header) : read_fvecs(path);
}

}  // namespace bregforest
