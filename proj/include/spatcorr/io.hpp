#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spatcorr/dataset.hpp"

namespace spatcorr {

/// Reads the long-format CSV (header `subject,unit_location,subunit,response`)
/// into a validated Dataset. L defaults to the maximum unit location unless
/// overridden. Ragged subunit grids, duplicate rows and non-finite values are
/// rejected with row numbers.
Dataset read_csv_dataset(const std::filesystem::path& path,
                         std::optional<double> domain_length = std::nullopt);
Dataset parse_csv_dataset(const std::string& text,
                          std::optional<double> domain_length = std::nullopt);

std::string dataset_to_csv(const Dataset& data);

/// Two-or-more-column TSV curve files (first column delta/theta).
struct CurveTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CurveTable read_curve_tsv(const std::filesystem::path& path);
std::string curve_to_tsv(const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows);

/// Writes via a temp file + rename so readers never observe partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string format_double(double v);  // shortest round-trippable decimal

/// FNV-1a 64-bit digest, hex-encoded; used for manifest input digests.
std::string fnv1a_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace spatcorr
