#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmmsim {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
/// Empty string for a missing value.
std::string format_optional(const std::optional<double>& value);

/// Parses a full field as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string> split_fields(std::string_view line, char delimiter = ',');

/// Minimal CSV table: optional leading "# ..." comment lines, a header, rows.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or std::nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

/// Accumulates CSV text row by row; `write` creates parent directories.
class CsvWriter {
public:
  CsvWriter& comment(std::string_view text);
  CsvWriter& row(const std::vector<std::string>& fields);
  const std::string& text() const noexcept { return out_; }
  void write(const std::filesystem::path& path) const;

private:
  std::string out_;
};

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for manifest and ticker hashing.
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::string hex64(std::uint64_t value);

}  // namespace dmmsim
