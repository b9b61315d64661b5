#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace fedgala {

/// Shortest round-trip-safe text for a double: 17 significant digits.
std::string format_real(double v);

/// Warnings go to stderr unless silenced (tests silence them).
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled) noexcept;

inline constexpr int kCsvSchemaVersion = 1;

/// Comma-separated writer with LF line endings. The first line of every
/// file is "#schema=1", followed by the column header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(int v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t current_ = 0;
};

/// Writes `contents` verbatim (binary mode, so LF stays LF).
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace fedgala
