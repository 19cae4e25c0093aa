#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gsf/graph.hpp"

namespace gsf::io {

/// Lossless decimal rendering (17 significant digits).
std::string format_real(Scalar value);

/// Parses a real number; throws std::runtime_error with `context` on failure.
Scalar parse_real(std::string_view token, const std::string &context);
Index parse_index(std::string_view token, const std::string &context);

/// Comma separated fields, surrounding whitespace trimmed.
std::vector<std::string_view> split_csv(std::string_view line);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &contents);

/// Edge list: header `n m`, then one `u v w` line per edge with u < v.
std::string graph_to_string(const WeightedGraph &graph);
WeightedGraph graph_from_string(const std::string &text);
void save_graph(const std::filesystem::path &path, const WeightedGraph &graph);
WeightedGraph load_graph(const std::filesystem::path &path);

/// CSV, one point per row.
void save_point_cloud(const std::filesystem::path &path, const PointCloud &cloud);
PointCloud load_point_cloud(const std::filesystem::path &path);
PointCloud point_cloud_from_string(const std::string &text);

/// Single column of values, one per line.
void save_values(const std::filesystem::path &path, std::span<const Scalar> values);
std::vector<Scalar> load_values(const std::filesystem::path &path);

}  // namespace gsf::io
