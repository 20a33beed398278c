#include "fibrebend/csv.hpp"

#include "fibrebend/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace fibrebend {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ValidationError("csv: missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ValidationError(fmt::format("csv: row {} column '{}': '{}' is not a number", row + 1, header[col], cell));
  return v;
}

long long CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ValidationError(fmt::format("csv: row {} column '{}': '{}' is not an integer", row + 1, header[col], cell));
  return v;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    boost::algorithm::trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    boost::algorithm::split(cells, line, boost::algorithm::is_any_of(","));
    for (auto& c : cells) boost::algorithm::trim(c);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw ValidationError(
          fmt::format("csv: row {} has {} cells, header has {}", t.rows.size() + 1, cells.size(), t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ValidationError("csv: no header line");
  return t;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolveError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw SolveError("write failed for '" + path.string() + "'");
}

}  // namespace fibrebend
