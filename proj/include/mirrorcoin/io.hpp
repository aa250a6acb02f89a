#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mirrorcoin/types.hpp"

namespace mirrorcoin::io {

/// "%.17g"; enough digits for an exact round trip of any finite double.
std::string format_double(double v);

/// CSV with a header row prefix1..prefixd, LF line endings.
void write_cloud_csv(const std::filesystem::path& path, const Cloud& cloud,
                     const std::string& prefix = "x");
std::string cloud_csv(const Cloud& cloud, const std::string& prefix = "x");

/// Reads a numeric CSV with one header row. Throws std::runtime_error on
/// malformed or ragged input.
Cloud read_cloud_csv(const std::filesystem::path& path);
Cloud parse_cloud_csv(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

}  // namespace mirrorcoin::io
