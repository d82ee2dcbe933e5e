#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ctsev {

/// Shortest representation that round-trips the exact double value.
std::string format_double(double v);

double parse_double(const std::string& text, const std::string& context);
int parse_int(const std::string& text, const std::string& context);

std::vector<std::string> split_csv_line(const std::string& line);

/// Reads all nonempty lines as comma-split rows.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace ctsev
