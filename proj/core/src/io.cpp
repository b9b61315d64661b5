#include "fedgala/io.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {
std::atomic<bool> g_warnings{true};
}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void log_warning(std::string_view message) {
  if (g_warnings.load(std::memory_order_relaxed)) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) noexcept { g_warnings.store(enabled); }

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(columns.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  out_ << "#schema=" << kCsvSchemaVersion << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (current_ > 0) out_ << ',';
  out_ << text;
  ++current_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_real(v))); }
CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }
CsvWriter& CsvWriter::cell(int v) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
  if (current_ != columns_)
    throw Error("csv row has " + std::to_string(current_) + " cells, expected " +
                std::to_string(columns_));
  out_ << '\n';
  current_ = 0;
  if (!out_) throw Error("csv write failed");
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fedgala
