#pragma once

// External formats. All files are JSON with fixed field names and
// deterministic field order; dense arrays travel as base64 of little-endian
// f64 in row-major order. Writing the same values always yields the same
// bytes.

#include <grain/generate.hpp>
#include <grain/graph.hpp>
#include <grain/model.hpp>
#include <grain/schema.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace grain {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// base64

namespace detail {

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  if (i + 1 == len) {
    const unsigned v = data[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == len) {
    const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0)
    throw Error(ErrorCode::parse_error, "base64 payload length not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2)
          throw Error(ErrorCode::parse_error, "malformed base64 padding");
        vals[k] = 0;
        ++pad;
      } else {
        vals[k] = value_of(c);
        if (vals[k] < 0 || pad > 0)
          throw Error(ErrorCode::parse_error, "invalid base64 character");
      }
    }
    const unsigned v =
        (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out.push_back((v >> 16) & 0xFF);
    if (pad < 2) out.push_back((v >> 8) & 0xFF);
    if (pad < 1) out.push_back(v & 0xFF);
  }
  return out;
}

inline void store_le_double(double x, unsigned char* out) {
  static_assert(sizeof(double) == 8);
  unsigned char raw[8];
  std::memcpy(raw, &x, 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out, raw, 8);
  } else {
    for (int i = 0; i < 8; ++i) out[i] = raw[7 - i];
  }
}

inline double load_le_double(const unsigned char* in) {
  unsigned char raw[8];
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(raw, in, 8);
  } else {
    for (int i = 0; i < 8; ++i) raw[i] = in[7 - i];
  }
  double x;
  std::memcpy(&x, raw, 8);
  return x;
}

}  // namespace detail

// Row-major little-endian f64 payload.
inline std::string matrix_to_base64(const Matrix& m) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * 8);
  std::size_t off = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      detail::store_le_double(m(r, c), bytes.data() + off);
      off += 8;
    }
  }
  return detail::base64_encode(bytes.data(), bytes.size());
}

inline Matrix matrix_from_base64(const std::string& text, int rows, int cols) {
  const auto bytes = detail::base64_decode(text);
  if (bytes.size() != static_cast<std::size_t>(rows) * cols * 8)
    throw Error(ErrorCode::shape_mismatch,
                "matrix payload holds " + std::to_string(bytes.size() / 8) +
                    " values, expected " + std::to_string(rows * cols));
  Matrix m(rows, cols);
  std::size_t off = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = detail::load_le_double(bytes.data() + off);
      off += 8;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// schema + graph

inline Json schema_to_json(const FeatureSchema& schema) {
  Json features = Json::array();
  for (const auto& f : schema.features) {
    features.push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  }
  return Json{{"features", std::move(features)},
              {"degree_feature_index", schema.degree_feature_index},
              {"num_classes", schema.num_classes},
              {"task", task_name(schema.task)}};
}

inline SchemaPtr schema_from_json(const Json& j) {
  try {
    FeatureSchema schema;
    for (const auto& f : j.at("features")) {
      schema.features.push_back(
          {f.at("name").get<std::string>(), f.at("cardinality").get<int>()});
    }
    schema.degree_feature_index = j.at("degree_feature_index").get<int>();
    schema.num_classes = j.at("num_classes").get<int>();
    const std::string task = j.at("task").get<std::string>();
    if (task == "graph_classification") {
      schema.task = Task::graph_classification;
    } else if (task == "node_classification") {
      schema.task = Task::node_classification;
    } else {
      throw Error(ErrorCode::parse_error, "unknown task '" + task + "'");
    }
    return make_schema(std::move(schema));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("schema: ") + e.what());
  }
}

inline Json graph_to_json(const Graph& g) {
  Json nodes = Json::array();
  for (const auto& f : g.nodes()) nodes.push_back(f);
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back({e.first, e.second});
  return Json{{"schema", schema_to_json(*g.schema())},
              {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
}

// Parses and validates a stored graph. Structural degree above the declared
// degree is rejected at this boundary: stored graphs must be self-consistent.
inline Graph graph_from_json(const Json& j, bool require_declared_degrees = true) {
  SchemaPtr schema;
  std::vector<NodeFeatures> nodes;
  std::vector<Edge> edges;
  try {
    schema = schema_from_json(j.at("schema"));
    for (const auto& row : j.at("nodes")) nodes.push_back(row.get<NodeFeatures>());
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw Error(ErrorCode::parse_error, "edge entries must be [i, j]");
      edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("graph: ") + e.what());
  }
  Graph g(schema, std::move(nodes), std::move(edges));
  if (require_declared_degrees) {
    for (int i = 0; i < g.n(); ++i) {
      if (g.structural_degree(i) > g.declared_degree(i))
        throw Error(ErrorCode::invalid_graph,
                    "node " + std::to_string(i) +
                        " has more edges than its degree feature declares");
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// model config + gradient bundle

inline Json config_to_json(const ModelConfig& cfg) {
  return Json{{"arch", arch_name(cfg.arch)},
              {"num_gnn_layers", cfg.num_gnn_layers},
              {"hidden_dim", cfg.hidden_dim},
              {"heads", cfg.heads},
              {"activation", activation_name(cfg.activation)},
              {"readout_layers", cfg.readout_layers},
              {"input_dim", cfg.input_dim},
              {"num_classes", cfg.num_classes},
              {"task", task_name(cfg.task)},
              {"seed", cfg.seed}};
}

inline ModelConfig config_from_json(const Json& j) {
  try {
    ModelConfig cfg;
    const std::string arch = j.at("arch").get<std::string>();
    if (arch == "gcn") {
      cfg.arch = Arch::gcn;
    } else if (arch == "gat") {
      cfg.arch = Arch::gat;
    } else {
      throw Error(ErrorCode::parse_error, "unknown arch '" + arch + "'");
    }
    cfg.num_gnn_layers = j.at("num_gnn_layers").get<int>();
    cfg.hidden_dim = j.at("hidden_dim").get<int>();
    cfg.heads = j.at("heads").get<int>();
    const std::string act = j.at("activation").get<std::string>();
    if (act == "relu") {
      cfg.activation = Activation::relu;
    } else if (act == "gelu") {
      cfg.activation = Activation::gelu;
    } else {
      throw Error(ErrorCode::parse_error, "unknown activation '" + act + "'");
    }
    cfg.readout_layers = j.at("readout_layers").get<int>();
    cfg.input_dim = j.at("input_dim").get<int>();
    cfg.num_classes = j.at("num_classes").get<int>();
    const std::string task = j.at("task").get<std::string>();
    if (task == "graph_classification") {
      cfg.task = Task::graph_classification;
    } else if (task == "node_classification") {
      cfg.task = Task::node_classification;
    } else {
      throw Error(ErrorCode::parse_error, "unknown task '" + task + "'");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
}

namespace detail {

struct NamedMatrix {
  std::string name;
  const Matrix* m;
};

inline std::vector<NamedMatrix> named_matrices(const ModelWeights& w, bool gat) {
  std::vector<NamedMatrix> out;
  for (std::size_t l = 0; l < w.gnn.size(); ++l) {
    out.push_back({"gnn." + std::to_string(l) + ".weight", &w.gnn[l]});
    if (gat) out.push_back({"gnn." + std::to_string(l) + ".attn", &w.attn[l]});
  }
  out.push_back({"readout.0.weight", &w.readout1});
  out.push_back({"readout.1.weight", &w.readout2});
  return out;
}

inline Json weights_to_json(const ModelWeights& w, bool gat) {
  Json arr = Json::array();
  for (const auto& [name, m] : named_matrices(w, gat)) {
    arr.push_back({{"name", name},
                   {"rows", m->rows()},
                   {"cols", m->cols()},
                   {"data", matrix_to_base64(*m)}});
  }
  return arr;
}

inline ModelWeights weights_from_json(const Json& arr, const ModelConfig& cfg) {
  ModelWeights w;
  std::size_t idx = 0;
  auto take = [&](const std::string& expect) -> Matrix {
    if (idx >= arr.size())
      throw Error(ErrorCode::parse_error, "missing weight entry " + expect);
    const Json& e = arr.at(idx++);
    const std::string name = e.at("name").get<std::string>();
    if (name != expect)
      throw Error(ErrorCode::parse_error,
                  "weight entry '" + name + "' where '" + expect + "' expected");
    return matrix_from_base64(e.at("data").get<std::string>(),
                              e.at("rows").get<int>(), e.at("cols").get<int>());
  };
  for (int l = 0; l < cfg.num_gnn_layers; ++l) {
    w.gnn.push_back(take("gnn." + std::to_string(l) + ".weight"));
    if (cfg.arch == Arch::gat)
      w.attn.push_back(take("gnn." + std::to_string(l) + ".attn"));
  }
  w.readout1 = take("readout.0.weight");
  w.readout2 = take("readout.1.weight");
  if (idx != arr.size())
    throw Error(ErrorCode::parse_error, "unexpected extra weight entries");
  return w;
}

// Shape constraints implied by the config.
inline void check_weight_shapes(const ModelWeights& w, const ModelConfig& cfg) {
  for (int l = 0; l < cfg.num_gnn_layers; ++l) {
    if (w.gnn[l].rows() != cfg.layer_in_dim(l) || w.gnn[l].cols() != cfg.hidden_dim)
      throw Error(ErrorCode::shape_mismatch,
                  "gnn." + std::to_string(l) + ".weight has the wrong shape");
    if (cfg.arch == Arch::gat) {
      if (w.attn[l].rows() != cfg.heads ||
          w.attn[l].cols() != 2 * (cfg.hidden_dim / cfg.heads))
        throw Error(ErrorCode::shape_mismatch,
                    "gnn." + std::to_string(l) + ".attn has the wrong shape");
    }
  }
  if (w.readout1.rows() != cfg.hidden_dim || w.readout1.cols() != cfg.hidden_dim)
    throw Error(ErrorCode::shape_mismatch, "readout.0.weight has the wrong shape");
  if (w.readout2.rows() != cfg.hidden_dim || w.readout2.cols() != cfg.num_classes)
    throw Error(ErrorCode::shape_mismatch, "readout.1.weight has the wrong shape");
}

}  // namespace detail

inline Json bundle_to_json(const GradientBundle& bundle) {
  if (!bundle.schema)
    throw Error(ErrorCode::invalid_argument, "bundle has no feature schema");
  const bool gat = bundle.config.arch == Arch::gat;
  Json j{{"schema", schema_to_json(*bundle.schema)},
         {"config", config_to_json(bundle.config)},
         {"weights", detail::weights_to_json(bundle.weights, gat)},
         {"grads", detail::weights_to_json(bundle.grads, gat)}};
  if (!bundle.labels.empty()) j["labels"] = bundle.labels;
  return j;
}

inline GradientBundle bundle_from_json(const Json& j) {
  GradientBundle bundle;
  try {
    bundle.schema = schema_from_json(j.at("schema"));
    bundle.config = config_from_json(j.at("config"));
    bundle.weights = detail::weights_from_json(j.at("weights"), bundle.config);
    bundle.grads = detail::weights_from_json(j.at("grads"), bundle.config);
    if (j.contains("labels")) bundle.labels = j.at("labels").get<std::vector<int>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("bundle: ") + e.what());
  }
  detail::check_weight_shapes(bundle.weights, bundle.config);
  detail::check_weight_shapes(bundle.grads, bundle.config);
  bundle.validate();
  if (bundle.config.task == Task::node_classification && bundle.labels.empty())
    throw Error(ErrorCode::parse_error,
                "node-classification bundle requires labels");
  return bundle;
}

// ---------------------------------------------------------------------------
// dataset manifest

struct ManifestEntry {
  std::string id;
  std::string path;  // graph file, relative to the manifest
  int label = 0;
  std::vector<int> node_labels;  // node task only
};

struct Manifest {
  std::vector<ManifestEntry> graphs;
};

inline Json manifest_to_json(const Manifest& m) {
  Json graphs = Json::array();
  for (const auto& e : m.graphs) {
    Json entry{{"id", e.id}, {"path", e.path}, {"label", e.label}};
    if (!e.node_labels.empty()) entry["node_labels"] = e.node_labels;
    graphs.push_back(std::move(entry));
  }
  return Json{{"graphs", std::move(graphs)}};
}

inline Manifest manifest_from_json(const Json& j) {
  try {
    Manifest m;
    for (const auto& e : j.at("graphs")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.path = e.at("path").get<std::string>();
      entry.label = e.at("label").get<int>();
      if (e.contains("node_labels"))
        entry.node_labels = e.at("node_labels").get<std::vector<int>>();
      m.graphs.push_back(std::move(entry));
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// files

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io_error, "failed writing " + path);
}

inline Graph load_graph(const std::string& path) {
  return graph_from_json(load_json_file(path));
}

inline void save_graph(const std::string& path, const Graph& g) {
  save_json_file(path, graph_to_json(g));
}

inline GradientBundle load_bundle(const std::string& path) {
  return bundle_from_json(load_json_file(path));
}

inline void save_bundle(const std::string& path, const GradientBundle& bundle) {
  save_json_file(path, bundle_to_json(bundle));
}

}  // namespace grain
