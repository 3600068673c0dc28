#pragma once

#include <filesystem>
#include <string_view>

#include "bregforest/types.hpp"

namespace bregforest {

enum class DatasetFormat { kFvecs, kCsv };

DatasetFormat parse_dataset_format(std::string_view name);

// From the extension: ".csv" is csv, anything else fvecs.
DatasetFormat guess_dataset_format(const std::filesystem::path& path);

/// fvecs: per record a 4-byte little-endian dimension followed by that many
/// little-endian float32 values. Every record must carry the same dimension
/// and the file length must be an exact multiple of the record size.
Dataset read_fvecs(const std::filesystem::path& path);
void write_fvecs(const Dataset& data, const std::filesystem::path& path);

// Comma-separated reals with a uniform column count.
Dataset read_csv(const std::filesystem::path& path, bool has_header = false);

Dataset read_dataset(const std::filesystem::path& path, DatasetFormat format, bool csv_header = false);

}  // namespace bregforest
