#include "gsf/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>

#include <json.hpp>

#include "gsf/embedding.hpp"
#include "gsf/io.hpp"
#include "gsf/partition.hpp"

namespace gsf {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  auto positive_list = [](const std::vector<Index> &values, const std::string &name) {
    if (values.empty()) throw std::invalid_argument(name + " must be a nonempty list");
    for (Index v : values)
      if (v < 1) throw std::invalid_argument(name + " entries must be positive, got " + std::to_string(v));
  };
  if (dataset.num_points < 1) throw std::invalid_argument("dataset.N must be positive");
  if (dataset.noise < 0) throw std::invalid_argument("dataset.noise must be nonnegative");
  if (dataset.kind == DatasetKind::unit_square && dataset.ambient_dim < 2)
    throw std::invalid_argument("dataset.ambient_dim must be at least 2");
  if (dataset.kind == DatasetKind::point_cloud_file && dataset.path.empty())
    throw std::invalid_argument("dataset.path is required for point_cloud_file");
  if (signal.kind != SignalKind::damped_cosine && signal.kind != SignalKind::plain_cosine)
    throw std::invalid_argument("pipeline signals must be damped_cosine or plain_cosine");
  if (!(graph_epsilon > 0)) throw std::invalid_argument("graph_epsilon must be positive");
  positive_list(patches, "patches");
  positive_list(dims, "dims");
  positive_list(moments, "moments");
  for (Index q : dims)
    if (landmarks <= q)
      throw std::invalid_argument("landmarks must exceed every embedding dimension");
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("threshold must lie in (0, 1)");
  if (threads < 0) throw std::invalid_argument("threads must be nonnegative");
}

PipelineConfig parse_config(const std::string &json_text) {
  const json j = json::parse(json_text);
  PipelineConfig c;
  const int version = j.value("schema_version", PipelineConfig::kSchemaVersion);
  if (version != PipelineConfig::kSchemaVersion)
    throw std::invalid_argument("unsupported config schema_version " + std::to_string(version));
  if (j.contains("dataset")) {
    const auto &d = j["dataset"];
    if (d.contains("kind")) c.dataset.kind = parse_dataset_kind(d["kind"].get<std::string>());
    c.dataset.num_points = d.value("N", c.dataset.num_points);
    c.dataset.seed = d.value("seed", c.dataset.seed);
    c.dataset.ambient_dim = d.value("ambient_dim", c.dataset.ambient_dim);
    c.dataset.noise = d.value("noise", c.dataset.noise);
    if (d.contains("path")) c.dataset.path = d["path"].get<std::string>();
    if (d.contains("center")) c.dataset.center = d["center"].get<std::vector<Scalar>>();
  }
  if (j.contains("signal")) {
    const auto &s = j["signal"];
    if (s.contains("kind")) c.signal.kind = parse_signal_kind(s["kind"].get<std::string>());
    c.signal.decay = s.value("decay", c.signal.decay);
    c.signal.frequency = s.value("frequency", c.signal.frequency);
  }
  c.graph_epsilon = j.value("graph_epsilon", c.graph_epsilon);
  if (j.contains("patches")) c.patches = j["patches"].get<std::vector<Index>>();
  if (j.contains("dims")) c.dims = j["dims"].get<std::vector<Index>>();
  c.landmarks = j.value("landmarks", c.landmarks);
  if (j.contains("moments")) c.moments = j["moments"].get<std::vector<Index>>();
  c.threshold = j.value("threshold", c.threshold);
  c.seed = j.value("seed", c.seed);
  if (j.contains("output")) c.output = j["output"].get<std::string>();
  c.threads = j.value("threads", c.threads);
  c.record_timings = j.value("record_timings", c.record_timings);
  return c;
}

PipelineConfig load_config(const fs::path &path) { return parse_config(io::read_file(path)); }

std::string config_to_json(const PipelineConfig &c) {
  json j;
  j["schema_version"] = PipelineConfig::kSchemaVersion;
  j["dataset"] = {{"kind", dataset_kind_name(c.dataset.kind)},
                  {"N", c.dataset.num_points},
                  {"seed", c.dataset.seed},
                  {"ambient_dim", c.dataset.ambient_dim},
                  {"noise", c.dataset.noise},
                  {"path", c.dataset.path.string()},
                  {"center", c.dataset.center}};
  j["signal"] = {{"kind", signal_kind_name(c.signal.kind)},
                 {"decay", c.signal.decay},
                 {"frequency", c.signal.frequency}};
  j["graph_epsilon"] = c.graph_epsilon;
  j["patches"] = c.patches;
  j["dims"] = c.dims;
  j["landmarks"] = c.landmarks;
  j["moments"] = c.moments;
  j["threshold"] = c.threshold;
  j["seed"] = c.seed;
  j["output"] = c.output.string();
  j["threads"] = c.threads;
  j["record_timings"] = c.record_timings;
  return j.dump(2) + "\n";
}

void apply_thread_limit(const PipelineConfig &config) {
  if (config.threads > 0) omp_set_num_threads(config.threads);
}

// ---------------------------------------------------------------------------
// Artifact names

namespace artifacts {
namespace {
std::string tag(Index q, Index p) { return "q" + std::to_string(q) + "_p" + std::to_string(p); }
std::string tag(Index q, Index p, Index m) { return tag(q, p) + "_s" + std::to_string(m); }
}  // namespace
std::string cloud() { return "cloud.csv"; }
std::string dataset_info() { return "dataset.json"; }
std::string signal() { return "signal.csv"; }
std::string graph() { return "graph.txt"; }
std::string graph_info() { return "graph.json"; }
std::string partition(Index p) { return "partition_p" + std::to_string(p) + ".csv"; }
std::string partition_info(Index p) { return "partition_p" + std::to_string(p) + ".json"; }
std::string embedding(Index q, Index p) { return "embedding_" + tag(q, p) + ".csv"; }
std::string embedding_info(Index q, Index p) { return "embedding_" + tag(q, p) + ".json"; }
std::string coefficients(Index q, Index p, Index m) { return "coefficients_" + tag(q, p, m) + ".csv"; }
std::string decay(Index q, Index p, Index m) { return "decay_" + tag(q, p, m) + ".csv"; }
std::string timing(Index q, Index p, Index m) { return "timing_" + tag(q, p, m) + ".json"; }
std::string sparse_at(Index q, Index p, Index m) { return "sparse_at_" + tag(q, p, m) + ".csv"; }
std::string sparse_nt(Index q, Index p, Index m) { return "sparse_nt_" + tag(q, p, m) + ".csv"; }
std::string compress_info(Index q, Index p, Index m) { return "compress_" + tag(q, p, m) + ".json"; }
std::string report_json() { return "report.json"; }
std::string report_csv() { return "report.csv"; }
std::string nnz_vs_moments() { return "nnz_vs_moments.csv"; }
}  // namespace artifacts

// ---------------------------------------------------------------------------
// Artifact IO helpers

namespace {

fs::path require(const PipelineConfig &c, const std::string &name, const std::string &producer,
                 const std::string &stage) {
  const fs::path path = c.output / name;
  if (!fs::exists(path))
    throw StageError(stage, "missing " + path.string() + "; run the '" + producer + "' stage first");
  return path;
}

template <typename F>
auto in_stage(const std::string &stage, F &&body) {
  try {
    return body();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(stage, e.what());
  }
}

std::string partition_to_csv(const Partition &part) {
  std::string s = "vertex_id,patch_id\n";
  for (std::size_t v = 0; v < part.labels.size(); ++v)
    s += std::to_string(v) + "," + std::to_string(part.labels[v]) + "\n";
  return s;
}

std::vector<Index> load_labels(const fs::path &path, Index n) {
  const std::string text = io::read_file(path);
  std::vector<Index> labels(n, -1);
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line_no == 1 || line.find_first_not_of(" \r\t") == std::string_view::npos) continue;
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    const auto f = io::split_csv(line);
    if (f.size() != 2) throw std::runtime_error(ctx + ": expected vertex_id,patch_id");
    const Index v = io::parse_index(f[0], ctx);
    if (v < 0 || v >= n) throw std::runtime_error(ctx + ": vertex id out of range");
    labels[v] = io::parse_index(f[1], ctx);
  }
  for (Index v = 0; v < n; ++v)
    if (labels[v] < 0) throw std::runtime_error(path.string() + ": vertex " + std::to_string(v) + " has no patch");
  return labels;
}

std::string embedding_to_csv(const Partition &part, const std::vector<PatchEmbedding> &emb, Index q) {
  const Index n = static_cast<Index>(part.labels.size());
  Matrix all(q, n);
  for (Index r = 0; r < part.num_patches(); ++r)
    for (std::size_t i = 0; i < part.patches[r].vertices.size(); ++i)
      all.col(part.patches[r].vertices[i]) = emb[r].coords.col(static_cast<Index>(i));
  std::string s = "vertex_id";
  for (Index k = 1; k <= q; ++k) s += ",y_" + std::to_string(k);
  s += "\n";
  for (Index v = 0; v < n; ++v) {
    s += std::to_string(v);
    for (Index k = 0; k < q; ++k) s += "," + io::format_real(all(k, v));
    s += "\n";
  }
  return s;
}

Matrix load_embedding(const fs::path &path, Index n, Index q) {
  const std::string text = io::read_file(path);
  Matrix all(q, n);
  std::vector<char> seen(n, 0);
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line_no == 1 || line.find_first_not_of(" \r\t") == std::string_view::npos) continue;
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    const auto f = io::split_csv(line);
    if (static_cast<Index>(f.size()) != q + 1)
      throw std::runtime_error(ctx + ": expected " + std::to_string(q + 1) + " columns");
    const Index v = io::parse_index(f[0], ctx);
    if (v < 0 || v >= n) throw std::runtime_error(ctx + ": vertex id out of range");
    for (Index k = 0; k < q; ++k) all(k, v) = io::parse_real(f[k + 1], ctx);
    seen[v] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::runtime_error(path.string() + ": embedding does not cover every vertex");
  return all;
}

std::string kind_name(CoefficientKind k) { return k == CoefficientKind::scaling ? "scaling" : "samplet"; }

std::string coefficients_to_csv(const CoefficientVector &cv) {
  std::string s = "patch,node_id,level,kind,local_index,value\n";
  for (Index k = 0; k < cv.values.size(); ++k) {
    const auto &t = cv.tags[k];
    s += std::to_string(t.patch) + "," + std::to_string(t.node) + "," + std::to_string(t.level) + "," +
         kind_name(t.kind) + "," + std::to_string(t.local_index) + "," + io::format_real(cv.values(k)) + "\n";
  }
  return s;
}

std::vector<Scalar> load_coefficients(const fs::path &path, const std::vector<CoefficientTag> &tags) {
  const std::string text = io::read_file(path);
  std::vector<Scalar> values;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line_no == 1 || line.find_first_not_of(" \r\t") == std::string_view::npos) continue;
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    const auto f = io::split_csv(line);
    if (f.size() != 6) throw std::runtime_error(ctx + ": expected 6 columns");
    const std::size_t k = values.size();
    if (k >= tags.size() || io::parse_index(f[0], ctx) != tags[k].patch ||
        io::parse_index(f[1], ctx) != tags[k].node || f[3] != kind_name(tags[k].kind) ||
        io::parse_index(f[4], ctx) != tags[k].local_index)
      throw std::runtime_error(ctx + ": coefficient layout does not match the samplet forest");
    values.push_back(io::parse_real(f[5], ctx));
  }
  if (values.size() != tags.size())
    throw std::runtime_error(path.string() + ": expected " + std::to_string(tags.size()) + " coefficients");
  return values;
}

std::string sparse_to_csv(const SparseCoefficients &sp) {
  std::string s = "position,value\n";
  for (const auto &k : sp.kept) s += std::to_string(k.position) + "," + io::format_real(k.value) + "\n";
  return s;
}

Index graph_vertex_count(const PipelineConfig &c, const std::string &stage) {
  const json info = json::parse(io::read_file(require(c, artifacts::graph_info(), "graph", stage)));
  return info.at("n").get<Index>();
}

Partition load_partition(const PipelineConfig &c, const WeightedGraph &graph, Index p,
                         const std::string &stage) {
  auto labels = load_labels(require(c, artifacts::partition(p), "partition", stage), graph.num_vertices());
  return make_partition(graph, std::move(labels), p);
}

struct ForestInputs {
  Partition partition;
  std::vector<Matrix> coords;
};

ForestInputs load_forest_inputs(const PipelineConfig &c, const WeightedGraph &graph, Index q, Index p,
                                const std::string &stage) {
  ForestInputs in;
  in.partition = load_partition(c, graph, p, stage);
  const Matrix all =
      load_embedding(require(c, artifacts::embedding(q, p), "embed", stage), graph.num_vertices(), q);
  for (const auto &patch : in.partition.patches) {
    Matrix m(q, static_cast<Index>(patch.vertices.size()));
    for (std::size_t i = 0; i < patch.vertices.size(); ++i) m.col(static_cast<Index>(i)) = all.col(patch.vertices[i]);
    in.coords.push_back(std::move(m));
  }
  return in;
}

SampletOptions samplet_options(const PipelineConfig &c, Index m) {
  SampletOptions o;
  o.vanishing_moments = m;
  o.fix_qr_signs = !c.skip_qr_sign_fix;
  return o;
}

SampletForest build_forest(const ForestInputs &in, Index n, const SampletOptions &o) {
  std::vector<std::vector<Index>> verts;
  for (const auto &patch : in.partition.patches) verts.push_back(patch.vertices);
  return SampletForest::build(verts, in.coords, n, o);
}

std::vector<PatchEmbedding> embed_patches(const Partition &part, Index q, Index landmarks, std::uint64_t seed) {
  const Index p = part.num_patches();
  std::vector<PatchEmbedding> out(p);
  for (Index r = 0; r < p; ++r) {
    const auto &g = part.patches[r].graph;
    if (g.num_vertices() <= q)
      throw std::invalid_argument("patch " + std::to_string(r) + " has " + std::to_string(g.num_vertices()) +
                                  " vertices; need more than q = " + std::to_string(q));
    const Index nl = std::min(landmarks, g.num_vertices());
    out[r] = landmark_isomap(g, select_landmarks_maxmin(g, nl, seed), q);
  }
  return out;
}

std::string embedding_info_json(const std::vector<PatchEmbedding> &emb, Index q) {
  json arr = json::array();
  for (std::size_t r = 0; r < emb.size(); ++r) {
    std::vector<Scalar> top;
    for (Index k = 0; k < std::min<Index>(16, emb[r].eigenvalues.size()); ++k) top.push_back(emb[r].eigenvalues(k));
    arr.push_back({{"patch", r},
                   {"n_vertices", emb[r].size()},
                   {"n_landmarks", emb[r].landmarks.size()},
                   {"q", q},
                   {"lost_energy", emb[r].lost_energy},
                   {"degenerate", emb[r].degenerate},
                   {"top_eigenvalues", top}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

void stage_gen(const PipelineConfig &c) {
  in_stage("gen", [&] {
    c.validate();
    const Dataset ds = make_dataset(c.dataset);
    io::save_point_cloud(c.output / artifacts::cloud(), ds.cloud);
    json info;
    info["kind"] = dataset_kind_name(c.dataset.kind);
    info["N"] = ds.cloud.size();
    info["d"] = ds.cloud.dim();
    info["center"] = std::vector<Scalar>(ds.center.data(), ds.center.data() + ds.center.size());
    io::write_file(c.output / artifacts::dataset_info(), info.dump(2) + "\n");
    SignalSpec sig = c.signal;
    sig.center = ds.center;
    io::save_values(c.output / artifacts::signal(), eval_signal(sig, ds.cloud.points));
    return 0;
  });
}

void stage_graph(const PipelineConfig &c) {
  in_stage("graph", [&] {
    c.validate();
    const PointCloud cloud = io::load_point_cloud(require(c, artifacts::cloud(), "gen", "graph"));
    const auto res = build_epsilon_graph(cloud, c.graph_epsilon);
    io::save_graph(c.output / artifacts::graph(), res.graph);
    json info;
    info["n"] = res.graph.num_vertices();
    info["m"] = res.graph.num_edges();
    info["epsilon"] = c.graph_epsilon;
    info["duplicate_pairs"] = res.duplicate_pairs;
    info["components"] = count_components(connected_components(res.graph));
    io::write_file(c.output / artifacts::graph_info(), info.dump(2) + "\n");
    return 0;
  });
}

void stage_partition(const PipelineConfig &c) {
  in_stage("partition", [&] {
    c.validate();
    const WeightedGraph graph = io::load_graph(require(c, artifacts::graph(), "graph", "partition"));
    for (Index p : c.patches) {
      const Partition part = partition_graph(graph, p, c.seed);
      io::write_file(c.output / artifacts::partition(p), partition_to_csv(part));
      const auto quality = partition_quality(part, graph);
      json info;
      info["p"] = p;
      info["cut_affinity"] = quality.cut_affinity;
      info["imbalance"] = quality.imbalance;
      info["connected"] = quality.connected;
      info["warnings"] = part.warnings;
      io::write_file(c.output / artifacts::partition_info(p), info.dump(2) + "\n");
    }
    return 0;
  });
}

void stage_embed(const PipelineConfig &c) {
  in_stage("embed", [&] {
    c.validate();
    const WeightedGraph graph = io::load_graph(require(c, artifacts::graph(), "graph", "embed"));
    for (Index p : c.patches) {
      const Partition part = load_partition(c, graph, p, "embed");
      for (Index q : c.dims) {
        const auto emb = embed_patches(part, q, c.landmarks, c.seed);
        io::write_file(c.output / artifacts::embedding(q, p), embedding_to_csv(part, emb, q));
        io::write_file(c.output / artifacts::embedding_info(q, p), embedding_info_json(emb, q));
      }
    }
    return 0;
  });
}

void stage_transform(const PipelineConfig &c) {
  in_stage("transform", [&] {
    c.validate();
    const WeightedGraph graph = io::load_graph(require(c, artifacts::graph(), "graph", "transform"));
    const auto signal = io::load_values(require(c, artifacts::signal(), "gen", "transform"));
    if (static_cast<Index>(signal.size()) != graph.num_vertices())
      throw std::runtime_error("signal length does not match the graph");
    for (Index p : c.patches)
      for (Index q : c.dims) {
        const ForestInputs in = load_forest_inputs(c, graph, q, p, "transform");
        for (Index m : c.moments) {
          const SampletForest forest = build_forest(in, graph.num_vertices(), samplet_options(c, m));
          const auto t0 = std::chrono::steady_clock::now();
          CoefficientVector cv;
          cv.values = forest.forward(signal);
          const auto t1 = std::chrono::steady_clock::now();
          cv.tags = forest.tags();
          io::write_file(c.output / artifacts::coefficients(q, p, m), coefficients_to_csv(cv));
          std::string decay = "level,max_abs,count\n";
          for (const auto &l : decay_report(forest, cv))
            decay += std::to_string(l.level) + "," + io::format_real(l.max_abs) + "," + std::to_string(l.count) + "\n";
          io::write_file(c.output / artifacts::decay(q, p, m), decay);
          if (c.record_timings) {
            json t;
            t["wall_ms_transform"] = std::chrono::duration<Scalar, std::milli>(t1 - t0).count();
            io::write_file(c.output / artifacts::timing(q, p, m), t.dump(2) + "\n");
          }
        }
      }
    return 0;
  });
}

void stage_compress(const PipelineConfig &c) {
  in_stage("compress", [&] {
    c.validate();
    const WeightedGraph graph = io::load_graph(require(c, artifacts::graph(), "graph", "compress"));
    const auto signal = io::load_values(require(c, artifacts::signal(), "gen", "compress"));
    if (static_cast<Index>(signal.size()) != graph.num_vertices())
      throw std::runtime_error("signal length does not match the graph");
    for (Index p : c.patches)
      for (Index q : c.dims) {
        const ForestInputs in = load_forest_inputs(c, graph, q, p, "compress");
        const json emb_info =
            json::parse(io::read_file(require(c, artifacts::embedding_info(q, p), "embed", "compress")));
        std::vector<Scalar> lost;
        for (const auto &e : emb_info) lost.push_back(e.at("lost_energy").get<Scalar>());
        for (Index m : c.moments) {
          const SampletForest forest = build_forest(in, graph.num_vertices(), samplet_options(c, m));
          const auto coeffs = load_coefficients(
              require(c, artifacts::coefficients(q, p, m), "transform", "compress"), forest.tags());
          const auto at = adaptive_tree_coarsen(forest, coeffs, c.threshold);
          const auto nt = norm_threshold(coeffs, c.threshold);
          io::write_file(c.output / artifacts::sparse_at(q, p, m), sparse_to_csv(at.sparse));
          io::write_file(c.output / artifacts::sparse_nt(q, p, m), sparse_to_csv(nt));

          ReportRow row;
          row.dataset = dataset_kind_name(c.dataset.kind);
          row.num_vertices = graph.num_vertices();
          row.dim = q;
          row.patches = p;
          row.landmarks = c.landmarks;
          row.s_plus_1 = m;
          row.epsilon = c.threshold;
          row.lost_energy = forest_lost_energy(lost);
          row.nnz_at = at.sparse.nnz();
          row.nnz_nt = nt.nnz();
          row.rel_err_at = relative_error(signal, reconstruct(forest, at.sparse));
          row.rel_err_nt = relative_error(signal, reconstruct(forest, nt));
          if (c.record_timings) {
            const json t = json::parse(io::read_file(require(c, artifacts::timing(q, p, m), "transform", "compress")));
            row.wall_ms_transform = t.at("wall_ms_transform").get<Scalar>();
          }
          json patches = json::array();
          for (Index r = 0; r < forest.num_patches(); ++r)
            patches.push_back({{"patch", r},
                               {"n_vertices", forest.tree(r).size()},
                               {"nnz_at", at.patch_nnz[r]},
                               {"norm_sq", at.patch_norm_sq[r]},
                               {"kept_sq_at", at.patch_kept_sq[r]}});
          json info;
          info["row"] = json::parse(report_to_json({row})).at(0);
          info["patches"] = patches;
          io::write_file(c.output / artifacts::compress_info(q, p, m), info.dump(2) + "\n");
        }
      }
    return 0;
  });
}

std::vector<ReportRow> stage_report(const PipelineConfig &c) {
  return in_stage("report", [&] {
    c.validate();
    json rows_json = json::array();
    for (Index q : c.dims)
      for (Index p : c.patches)
        for (Index m : c.moments) {
          const json info =
              json::parse(io::read_file(require(c, artifacts::compress_info(q, p, m), "compress", "report")));
          rows_json.push_back(info.at("row"));
        }
    const auto rows = report_from_json(rows_json.dump());
    io::write_file(c.output / artifacts::report_json(), report_to_json(rows));
    io::write_file(c.output / artifacts::report_csv(), report_to_csv(rows));
    std::string nnz = "q,p,s_plus_1,nnz_at,nnz_nt\n";
    for (const auto &r : rows)
      nnz += std::to_string(r.dim) + "," + std::to_string(r.patches) + "," + std::to_string(r.s_plus_1) + "," +
             std::to_string(r.nnz_at) + "," + std::to_string(r.nnz_nt) + "\n";
    io::write_file(c.output / artifacts::nnz_vs_moments(), nnz);
    return rows;
  });
}

const std::vector<std::string> &stage_names() {
  static const std::vector<std::string> names{"gen", "graph", "partition", "embed", "transform", "compress", "report"};
  return names;
}

void run_stage(const std::string &name, const PipelineConfig &c) {
  static const std::map<std::string, std::function<void(const PipelineConfig &)>> table{
      {"gen", stage_gen},
      {"graph", stage_graph},
      {"partition", stage_partition},
      {"embed", stage_embed},
      {"transform", stage_transform},
      {"compress", stage_compress},
      {"report", [](const PipelineConfig &cfg) { stage_report(cfg); }}};
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown stage '" + name + "'");
  it->second(c);
}

std::vector<ReportRow> run_pipeline(const PipelineConfig &c) {
  in_stage("config", [&] {
    c.validate();
    return 0;
  });
  stage_gen(c);
  stage_graph(c);
  stage_partition(c);
  stage_embed(c);
  stage_transform(c);
  stage_compress(c);
  return stage_report(c);
}

// ---------------------------------------------------------------------------
// Verification

bool VerifyResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

std::string VerifyResult::to_json() const {
  json arr = json::array();
  for (const auto &c : checks)
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  json j;
  j["passed"] = passed();
  j["checks"] = arr;
  return j.dump(2) + "\n";
}

namespace {

constexpr Index kDenseLimit = 500;
constexpr Scalar kVerifyTol = 1e-10;

struct TreeErrors {
  Scalar orthogonality = 0;
  Scalar vanishing = 0;
  Scalar unit_norm = 0;
  Scalar dense_vs_fast = 0;
};

Scalar monomial(const Matrix &pts, Index col, const std::vector<int> &alpha) {
  Scalar v = 1;
  for (std::size_t k = 0; k < alpha.size(); ++k) v *= std::pow(pts(static_cast<Index>(k), col), alpha[k]);
  return v;
}

// Vanishing moments and unit norms from explicit basis vectors; samplets must
// annihilate every monomial of degree < m in the normalized frame.
void moment_errors(const SampletTree &tree, TreeErrors &err) {
  const auto &pts = tree.normalized_points();
  const auto &perm = tree.cluster_tree().permutation();
  const auto &mis = tree.multi_indices();
  tree.visit_basis([&](Index t, const Matrix &phi, const Matrix &psi) {
    const auto &node = tree.cluster_tree().node(t);
    for (Index k = 0; k < psi.cols(); ++k) {
      err.unit_norm = std::max(err.unit_norm, std::abs(psi.col(k).norm() - 1));
      for (Index a = 0; a < mis.size(); ++a) {
        Scalar moment = 0;
        for (Index i = 0; i < node.size(); ++i) moment += psi(i, k) * monomial(pts, perm[node.start + i], mis[a]);
        err.vanishing = std::max(err.vanishing, std::abs(moment));
      }
    }
    if (t == 0)
      for (Index k = 0; k < phi.cols(); ++k)
        err.unit_norm = std::max(err.unit_norm, std::abs(phi.col(k).norm() - 1));
  });
}

void dense_errors(const SampletTree &tree, std::uint64_t seed, TreeErrors &err) {
  const Matrix t_mat = tree.dense_transform();
  const Index n = t_mat.rows();
  err.orthogonality = std::max(err.orthogonality,
                               (t_mat * t_mat.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
  Rng rng(seed);
  std::vector<Scalar> f(n), fast(n);
  for (auto &x : f) x = rng.normal();
  tree.forward(f, fast);
  const Vector dense = t_mat * Eigen::Map<const Vector>(f.data(), n);
  for (Index i = 0; i < n; ++i) err.dense_vs_fast = std::max(err.dense_vs_fast, std::abs(dense(i) - fast[i]));
}

bool signs_canonical(const SampletForest &forest) {
  for (Index r = 0; r < forest.num_patches(); ++r) {
    const auto &tree = forest.tree(r);
    for (Index t = 0; t < static_cast<Index>(tree.cluster_tree().nodes().size()); ++t) {
      const Matrix &rr = tree.filters(t).qr.r();
      for (Index k = 0; k < std::min(rr.rows(), rr.cols()); ++k)
        if (rr(k, k) < 0) return false;
    }
  }
  return true;
}

CheckResult check(std::string name, Scalar value, Scalar tol, std::string detail) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

}  // namespace

VerifyResult run_verify(const PipelineConfig &c) {
  return in_stage("verify", [&] {
    c.validate();
    const Index p = c.patches.front();
    const Index q = c.dims.front();
    const Dataset ds = make_dataset(c.dataset);
    SignalSpec sig = c.signal;
    sig.center = ds.center;
    const auto signal = eval_signal(sig, ds.cloud.points);
    const auto graph = build_epsilon_graph(ds.cloud, c.graph_epsilon).graph;
    const Partition part = partition_graph(graph, p, c.seed);
    const auto emb = embed_patches(part, q, c.landmarks, c.seed);
    ForestInputs in{part, {}};
    for (const auto &e : emb) in.coords.push_back(e.coords);

    VerifyResult result;
    for (Index m : c.moments) {
      const std::string suffix = " (s+1=" + std::to_string(m) + ")";
      const SampletOptions opts = samplet_options(c, m);
      const SampletForest forest = build_forest(in, graph.num_vertices(), opts);

      TreeErrors err;
      std::string dense_scope;
      for (Index r = 0; r < forest.num_patches(); ++r) {
        moment_errors(forest.tree(r), err);
        if (forest.tree(r).size() <= kDenseLimit) {
          dense_errors(forest.tree(r), c.seed + r, err);
          dense_scope = "all patches";
        }
      }
      if (dense_scope.empty()) {
        const Matrix sub = in.coords.front().leftCols(kDenseLimit);
        dense_errors(SampletTree::build(sub, opts), c.seed, err);
        dense_scope = "first " + std::to_string(kDenseLimit) + " vertices of patch 0";
      }

      const Vector coeffs = forest.forward(signal);
      const Scalar fnorm = Eigen::Map<const Vector>(signal.data(), signal.size()).norm();
      const Vector back = forest.inverse({coeffs.data(), static_cast<std::size_t>(coeffs.size())});
      const Scalar roundtrip =
          (back - Eigen::Map<const Vector>(signal.data(), signal.size())).norm() / std::max<Scalar>(fnorm, 1e-300);

      SampletOptions canonical_opts = opts;
      canonical_opts.fix_qr_signs = true;
      const Vector canonical = build_forest(in, graph.num_vertices(), canonical_opts).forward(signal);
      const Scalar drift = (coeffs - canonical).cwiseAbs().maxCoeff();
      const bool canonical_signs = signs_canonical(forest);

      result.checks.push_back(check("orthogonality" + suffix, err.orthogonality, kVerifyTol, dense_scope));
      result.checks.push_back(check("vanishing_moments" + suffix, err.vanishing, kVerifyTol, "all patches"));
      result.checks.push_back(check("unit_norm" + suffix, err.unit_norm, 1e-12, "all patches"));
      result.checks.push_back(check("energy_conservation" + suffix,
                                    std::abs(coeffs.norm() - fnorm) / std::max<Scalar>(fnorm, 1e-300),
                                    kVerifyTol, "forward transform of the signal"));
      result.checks.push_back(check("inverse_roundtrip" + suffix, roundtrip, kVerifyTol, "inverse(forward(f))"));
      result.checks.push_back(check("dense_equals_fast" + suffix, err.dense_vs_fast, kVerifyTol, dense_scope));
      CheckResult det = check("determinism" + suffix, drift, 0, "coefficients against canonical construction");
      if (!canonical_signs) {
        det.passed = false;
        det.detail += "; diag(R) has negative entries";
      }
      result.checks.push_back(std::move(det));
    }
    return result;
  });
}

}  // namespace gsf
