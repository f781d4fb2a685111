#include "mvembed/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "mvembed/error.hpp"

namespace mvembed::csv {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Accepts what from_chars accepts plus a leading '+'.
bool parse_double(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string> content_lines(const std::filesystem::path& path, const ReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  bool header_pending = opts.skip_header;
  while (std::getline(in, line)) {
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (trim(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, const ReadOptions& opts,
                            const std::string& label) {
  const auto lines = content_lines(path, opts);
  const std::string where = label.empty() ? path.string() : label;

  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::vector<double> row;
    std::string_view rest = lines[r];
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double value = 0.0;
      if (!parse_double(cell, value)) {
        throw Error(ErrorCode::Parse, "'" + where + "' row " + std::to_string(r) + " column " +
                                          std::to_string(row.size()) + ": cannot parse '" +
                                          std::string(cell) + "'");
      }
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteValue, "'" + where + "' row " + std::to_string(r) +
                                                   " column " + std::to_string(row.size()) +
                                                   ": non-finite value");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Parse, "'" + where + "' row " + std::to_string(r) + " has " +
                                        std::to_string(row.size()) + " columns, expected " +
                                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, "'" + where + "' contains no data");

  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<int> read_labels(const std::filesystem::path& path, const ReadOptions& opts) {
  std::vector<int> labels;
  const auto lines = content_lines(path, opts);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const std::string_view cell = trim(std::string_view(lines[r]).substr(0, lines[r].find(',')));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::Parse, "'" + path.string() + "' row " + std::to_string(r) +
                                        ": label '" + std::string(cell) + "' is not an integer");
    }
    labels.push_back(value);
  }
  return labels;
}

std::vector<std::string> read_lines(const std::filesystem::path& path, const ReadOptions& opts) {
  std::vector<std::string> out;
  for (const auto& line : content_lines(path, opts)) out.emplace_back(trim(line));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorCode::Io, "cannot format number");
  return std::string(buf, ptr);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::string out;
  for (int label : labels) out += std::to_string(label) + '\n';
  write_text(path, out);
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mvembed::csv
