#pragma once

// Minimal comma-separated tables: header row, numeric cells, `#` comments.

#include <filesystem>
#include <string>
#include <vector>

namespace fibrebend {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws ValidationError if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;
};

/// Parses text with a header line. Blank lines and lines starting with `#`
/// are skipped; every row must have as many cells as the header.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fibrebend
