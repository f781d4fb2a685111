#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvembed::csv {

struct ReadOptions {
  bool skip_header = false;
};

/// Reads a comma-separated numeric table: one record per line, every record
/// the same width. Blank lines are ignored. Non-finite cells are rejected with
/// ErrorCode::NonFiniteValue naming `label`, the 0-based row and column.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path, const ReadOptions& opts = {},
                            const std::string& label = "");

/// First column of each record, as integers.
std::vector<int> read_labels(const std::filesystem::path& path, const ReadOptions& opts = {});

/// One string per line, trailing whitespace trimmed.
std::vector<std::string> read_lines(const std::filesystem::path& path, const ReadOptions& opts = {});

/// Writes one matrix row per line using shortest round-trip formatting.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Shortest decimal representation that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `contents` to `path`, throwing Error(Io) on any failure.
void write_text(const std::filesystem::path& path, const std::string& contents);

std::string read_text(const std::filesystem::path& path);

}  // namespace mvembed::csv
