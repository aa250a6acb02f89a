#include "mirrorcoin/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mirrorcoin::io {

std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::string cloud_csv(const Cloud& cloud, const std::string& prefix) {
  std::string out;
  for (Eigen::Index k = 0; k < cloud.cols(); ++k) {
    if (k) out += ',';
    out += prefix + std::to_string(k + 1);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    for (Eigen::Index k = 0; k < cloud.cols(); ++k) {
      if (k) out += ',';
      out += format_double(cloud(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_cloud_csv(const std::filesystem::path& path, const Cloud& cloud,
                     const std::string& prefix) {
  write_text(path, cloud_csv(cloud, prefix));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

Cloud parse_cloud_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::size_t cols = split(line, ',').size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != cols) {
      throw std::runtime_error("csv: row " + std::to_string(rows + 1) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(cols));
    }
    for (const auto& raw : fields) {
      const std::string f = trim(raw);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw std::runtime_error("csv: cannot parse '" + f + "' as a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  Cloud out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < values.size(); ++i) out.data()[i] = values[i];
  return out;
}

Cloud read_cloud_csv(const std::filesystem::path& path) { return parse_cloud_csv(read_text(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mirrorcoin::io
