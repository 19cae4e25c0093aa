#include "gsf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gsf::io {

std::string format_real(Scalar value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(const std::string &text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    lines.push_back(rest.substr(0, nl));
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Scalar parse_real(std::string_view token, const std::string &context) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  Scalar value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::runtime_error(context + ": cannot parse number '" + std::string(token) + "'");
  return value;
}

Index parse_index(std::string_view token, const std::string &context) {
  token = trim(token);
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::runtime_error(context + ": cannot parse integer '" + std::string(token) + "'");
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = line.find(',');
    out.push_back(trim(line.substr(0, c)));
    if (c == std::string_view::npos) break;
    line.remove_prefix(c + 1);
  }
  return out;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string graph_to_string(const WeightedGraph &graph) {
  std::string s;
  s += std::to_string(graph.num_vertices()) + " " + std::to_string(graph.num_edges()) + "\n";
  for (const auto &e : graph.edge_list()) {
    s += std::to_string(e.u);
    s += ' ';
    s += std::to_string(e.v);
    s += ' ';
    s += format_real(e.weight);
    s += '\n';
  }
  return s;
}

WeightedGraph graph_from_string(const std::string &text) {
  const auto lines = split_lines(text);
  std::size_t li = 0;
  while (li < lines.size() && trim(lines[li]).empty()) ++li;
  if (li == lines.size()) throw std::runtime_error("graph file: missing header");
  const auto header = split_ws(lines[li]);
  if (header.size() != 2) throw std::runtime_error("graph file: header must be 'n m'");
  const Index n = parse_index(header[0], "graph file line " + std::to_string(li + 1));
  const Index m = parse_index(header[1], "graph file line " + std::to_string(li + 1));
  std::vector<EdgeTriple> edges;
  edges.reserve(m);
  for (++li; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::string ctx = "graph file line " + std::to_string(li + 1);
    const auto tok = split_ws(lines[li]);
    if (tok.size() != 3) throw std::runtime_error(ctx + ": expected 'u v w'");
    edges.push_back({parse_index(tok[0], ctx), parse_index(tok[1], ctx), parse_real(tok[2], ctx)});
  }
  if (static_cast<Index>(edges.size()) != m)
    throw std::runtime_error("graph file: header announces " + std::to_string(m) +
                             " edges, found " + std::to_string(edges.size()));
  return WeightedGraph::from_edges(n, edges);
}

void save_graph(const std::filesystem::path &path, const WeightedGraph &graph) {
  write_file(path, graph_to_string(graph));
}

WeightedGraph load_graph(const std::filesystem::path &path) {
  return graph_from_string(read_file(path));
}

void save_point_cloud(const std::filesystem::path &path, const PointCloud &cloud) {
  std::string s;
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index k = 0; k < cloud.dim(); ++k) {
      if (k) s += ',';
      s += format_real(cloud.points(k, i));
    }
    s += '\n';
  }
  write_file(path, s);
}

PointCloud point_cloud_from_string(const std::string &text) {
  std::vector<std::vector<Scalar>> rows;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::string ctx = "point cloud line " + std::to_string(li + 1);
    std::vector<Scalar> row;
    for (auto tok : split_csv(lines[li])) row.push_back(parse_real(tok, ctx));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(ctx + ": expected " + std::to_string(rows.front().size()) +
                               " columns, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("point cloud: no points");
  PointCloud cloud;
  cloud.points.resize(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      cloud.points(static_cast<Index>(k), static_cast<Index>(i)) = rows[i][k];
  return cloud;
}

PointCloud load_point_cloud(const std::filesystem::path &path) {
  try {
    return point_cloud_from_string(read_file(path));
  } catch (const std::runtime_error &e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_values(const std::filesystem::path &path, std::span<const Scalar> values) {
  std::string s;
  for (Scalar v : values) {
    s += format_real(v);
    s += '\n';
  }
  write_file(path, s);
}

std::vector<Scalar> load_values(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  std::vector<Scalar> out;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    out.push_back(parse_real(lines[li], path.string() + " line " + std::to_string(li + 1)));
  }
  return out;
}

}  // namespace gsf::io
