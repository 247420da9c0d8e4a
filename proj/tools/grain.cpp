// Command-line front end: dataset generation, client-step simulation, the
// reconstruction attack, and similarity scoring, each as a subcommand.
// Errors print one machine-readable JSON object to stderr; exit codes are
// 0 (success), 1 (runtime failure), 2 (usage).

#include <grain/grain.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using grain::Json;

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

grain::GeneratorKind parse_kind(const std::string& name) {
  using grain::GeneratorKind;
  if (name == "random_tree") return GeneratorKind::random_tree;
  if (name == "erdos_renyi") return GeneratorKind::erdos_renyi;
  if (name == "molecule_like") return GeneratorKind::molecule_like;
  if (name == "unique_features") return GeneratorKind::unique_features;
  if (name == "twin_leaves") return GeneratorKind::twin_leaves;
  throw grain::Error(grain::ErrorCode::invalid_argument,
                     "unknown generator kind '" + name + "'");
}

grain::Task parse_task(const std::string& name) {
  if (name == "graph") return grain::Task::graph_classification;
  if (name == "node") return grain::Task::node_classification;
  throw grain::Error(grain::ErrorCode::invalid_argument,
                     "unknown task '" + name + "' (use graph or node)");
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    grain::save_json_file(out_path, j);
  }
}

// Model options shared by `simulate` and `batch`.
struct ModelFlags {
  std::string arch = "gcn";
  int layers = 2;
  int hidden = 300;
  int heads = 2;
  std::string activation = "relu";
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--arch", arch, "Architecture: gcn or gat")
        ->check(CLI::IsMember({"gcn", "gat"}))
        ->capture_default_str();
    cmd->add_option("--layers", layers, "Number of GNN layers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--hidden", hidden, "Hidden width of every GNN layer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--heads", heads, "Attention heads per GAT layer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--activation", activation, "Activation: relu or gelu")
        ->check(CLI::IsMember({"relu", "gelu"}))
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Weight initialization seed")
        ->capture_default_str();
  }

  grain::ModelConfig config(const grain::SchemaPtr& schema) const {
    grain::ModelConfig cfg;
    cfg.arch = arch == "gat" ? grain::Arch::gat : grain::Arch::gcn;
    cfg.num_gnn_layers = layers;
    cfg.hidden_dim = hidden;
    cfg.heads = heads;
    cfg.activation =
        activation == "gelu" ? grain::Activation::gelu : grain::Activation::relu;
    cfg.input_dim = schema->one_hot_width();
    cfg.num_classes = schema->num_classes;
    cfg.task = schema->task;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

// Attack options shared by `attack` and `batch`.
struct AttackFlags {
  double tau = grain::kDefaultTau;
  double timeout_sec = 900.0;
  bool unique_heuristic = false;
  bool gnn_only = false;
  std::size_t max_candidates = 200000;
  int max_nodes = 0;
  std::size_t memo_capacity = 1000000;
  bool wall_times = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tau", tau, "Span filter threshold")->capture_default_str();
    cmd->add_option("--timeout-sec", timeout_sec, "Search time budget in seconds")
        ->capture_default_str();
    cmd->add_flag("--unique-heuristic", unique_heuristic,
                  "Assume pairwise-distinct node feature vectors");
    cmd->add_flag("--gnn-only", gnn_only,
                  "Score candidates on GNN-layer gradients only");
    cmd->add_option("--max-candidates", max_candidates,
                    "Abort if a candidate set exceeds this size")
        ->capture_default_str();
    cmd->add_option("--max-nodes", max_nodes,
                    "Node cap during search (0: model hidden width)")
        ->capture_default_str();
    cmd->add_option("--memo-capacity", memo_capacity,
                    "Visited-state cache size during search")
        ->capture_default_str();
    cmd->add_flag("--wall-times", wall_times,
                  "Include wall-clock timings (breaks byte determinism)");
  }

  grain::AttackOptions options() const {
    grain::AttackOptions opt;
    opt.tau = tau;
    opt.timeout_sec = timeout_sec;
    opt.unique_features = unique_heuristic;
    opt.gnn_only_delta = gnn_only;
    opt.limits.max_candidates = max_candidates;
    opt.max_nodes = max_nodes;
    opt.memo_capacity = memo_capacity;
    return opt;
  }

  Json to_json() const {
    return Json{{"tau", tau},
                {"timeout_sec", timeout_sec},
                {"unique_heuristic", unique_heuristic},
                {"gnn_only", gnn_only},
                {"max_candidates", max_candidates},
                {"max_nodes", max_nodes},
                {"memo_capacity", memo_capacity}};
  }
};

std::string padded_id(int index, int count) {
  int width = 1;
  for (int c = count - 1; c >= 10; c /= 10) ++width;
  std::ostringstream ss;
  ss << "g" << std::setw(width) << std::setfill('0') << index;
  return ss.str();
}

// ---------------------------------------------------------------------------

int cmd_gen(const grain::GeneratorSpec& base, int count, const std::string& out_dir) {
  fs::create_directories(out_dir);
  grain::Rng label_rng(base.seed ^ 0x9e3779b97f4a7c15ULL);
  grain::Manifest manifest;
  for (int i = 0; i < count; ++i) {
    grain::GeneratorSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(i);
    grain::Graph g = grain::generate(spec);
    grain::ManifestEntry entry;
    entry.id = padded_id(i, count);
    entry.path = entry.id + ".json";
    entry.label = static_cast<int>(label_rng.below(spec.num_classes));
    if (spec.task == grain::Task::node_classification) {
      entry.node_labels.resize(g.n());
      for (int v = 0; v < g.n(); ++v)
        entry.node_labels[v] = static_cast<int>(label_rng.below(spec.num_classes));
    }
    grain::save_graph((fs::path(out_dir) / entry.path).string(), g);
    manifest.graphs.push_back(std::move(entry));
  }
  grain::save_json_file((fs::path(out_dir) / "manifest.json").string(),
                        grain::manifest_to_json(manifest));
  std::cout << "wrote " << count << " graphs to " << out_dir << '\n';
  return 0;
}

int cmd_simulate(const std::string& graph_path, const ModelFlags& model, int label,
                 const std::string& node_labels_text, const std::string& out_path) {
  grain::Graph g = grain::load_graph(graph_path);
  grain::ModelConfig cfg = model.config(g.schema());
  grain::Labels labels;
  labels.graph_label = label;
  if (cfg.task == grain::Task::node_classification) {
    labels.node_labels = parse_int_list(node_labels_text);
    if (labels.node_labels.empty())
      throw grain::Error(grain::ErrorCode::invalid_argument,
                         "node-classification graphs need --node-labels");
  }
  grain::GradientBundle bundle = grain::simulate_client_step(g, cfg, labels);
  grain::save_bundle(out_path, bundle);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient inversion for graph neural networks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  std::string gen_kind = "random_tree";
  grain::GeneratorSpec spec;
  int gen_count = 1;
  std::string gen_features = "4,5", gen_task = "graph", gen_out_dir;
  gen->add_option("--kind", gen_kind,
                  "random_tree, erdos_renyi, molecule_like, unique_features, "
                  "twin_leaves")
      ->capture_default_str();
  gen->add_option("--n", spec.n, "Nodes per graph")->capture_default_str();
  gen->add_option("--count", gen_count, "Number of graphs")->capture_default_str();
  gen->add_option("--edge-prob", spec.edge_prob, "Extra/edge probability")
      ->capture_default_str();
  gen->add_option("--max-degree", spec.max_degree, "Maximum node degree")
      ->capture_default_str();
  gen->add_option("--features", gen_features,
                  "Comma-separated cardinalities of the non-degree features")
      ->capture_default_str();
  gen->add_option("--num-classes", spec.num_classes, "Label classes")
      ->capture_default_str();
  gen->add_option("--task", gen_task, "graph or node")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Dataset seed")->capture_default_str();
  gen->add_option("--out-dir", gen_out_dir, "Output directory")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "Run one honest client step, save the gradients");
  std::string sim_graph, sim_node_labels, sim_out;
  int sim_label = 0;
  ModelFlags sim_model;
  sim->add_option("--graph", sim_graph, "Client graph JSON")->required();
  sim_model.attach(sim);
  sim->add_option("--label", sim_label, "Graph label")->capture_default_str();
  sim->add_option("--node-labels", sim_node_labels,
                  "Comma-separated per-node labels (node task)");
  sim->add_option("--out", sim_out, "Output bundle path")->required();

  // attack
  auto* atk = app.add_subcommand("attack", "Reconstruct a graph from a bundle");
  std::string atk_bundle, atk_out;
  AttackFlags atk_flags;
  atk->add_option("--bundle", atk_bundle, "Gradient bundle JSON")->required();
  atk_flags.attach(atk);
  atk->add_option("--out", atk_out, "Output path (stdout when omitted)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a reconstruction");
  std::string ev_truth, ev_recon, ev_out;
  std::uint64_t ev_seed = grain::kGsmDefaultSeed;
  ev->add_option("--truth", ev_truth, "Ground-truth graph JSON")->required();
  ev->add_option("--recon", ev_recon,
                 "Reconstruction (envelope or bare graph JSON)")
      ->required();
  ev->add_option("--gsm-seed", ev_seed, "Aggregator seed")->capture_default_str();
  ev->add_option("--out", ev_out, "Output path (stdout when omitted)");

  // batch
  auto* bat = app.add_subcommand(
      "batch", "Simulate, attack, and evaluate every graph in a manifest");
  std::string bat_manifest, bat_out, bat_out_dir;
  ModelFlags bat_model;
  AttackFlags bat_flags;
  std::uint64_t bat_gsm_seed = grain::kGsmDefaultSeed;
  std::uint64_t bat_bootstrap_seed = grain::kBootstrapDefaultSeed;
  bat->add_option("--manifest", bat_manifest, "Dataset manifest JSON")->required();
  bat_model.attach(bat);
  bat_flags.attach(bat);
  bat->add_option("--gsm-seed", bat_gsm_seed, "Aggregator seed")
      ->capture_default_str();
  bat->add_option("--bootstrap-seed", bat_bootstrap_seed,
                  "Confidence interval resampling seed")
      ->capture_default_str();
  bat->add_option("--out", bat_out, "Report path (stdout when omitted)");
  bat->add_option("--out-dir", bat_out_dir,
                  "Directory for per-graph reconstruction files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Json err{{"error", {{"code", "usage"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 2;
  }

  try {
    if (*gen) {
      spec.kind = parse_kind(gen_kind);
      spec.task = parse_task(gen_task);
      spec.feature_cardinalities = parse_int_list(gen_features);
      spec.validate();
      return cmd_gen(spec, gen_count, gen_out_dir);
    }
    if (*sim) {
      return cmd_simulate(sim_graph, sim_model, sim_label, sim_node_labels, sim_out);
    }
    if (*atk) {
      grain::GradientBundle bundle = grain::load_bundle(atk_bundle);
      const auto start = std::chrono::steady_clock::now();
      grain::AttackResult result =
          grain::run_attack(bundle.schema, bundle, atk_flags.options());
      std::optional<double> wall;
      if (atk_flags.wall_times) {
        wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                   .count();
      }
      emit(grain::attack_to_json(result, wall), atk_out);
      return 0;
    }
    if (*ev) {
      grain::Graph truth = grain::load_graph(ev_truth);
      auto recon = grain::graph_from_reconstruction_json(grain::load_json_file(ev_recon));
      if (!recon)
        throw grain::Error(grain::ErrorCode::invalid_argument,
                           "reconstruction holds no graph");
      emit(grain::eval_report_to_json(grain::evaluate_pair(truth, *recon, ev_seed)),
           ev_out);
      return 0;
    }
    if (*bat) {
      const grain::Manifest manifest =
          grain::manifest_from_json(grain::load_json_file(bat_manifest));
      const fs::path base_dir = fs::path(bat_manifest).parent_path();
      if (!bat_out_dir.empty()) fs::create_directories(bat_out_dir);

      std::vector<grain::BatchGraphOutcome> outcomes;
      Json model_json = Json(nullptr);
      for (std::size_t i = 0; i < manifest.graphs.size(); ++i) {
        const auto& entry = manifest.graphs[i];
        grain::BatchGraphOutcome outcome;
        outcome.id = entry.id;
        try {
          grain::Graph truth =
              grain::load_graph((base_dir / entry.path).string());
          grain::ModelConfig cfg = bat_model.config(truth.schema());
          cfg.seed = bat_model.seed + i;  // per-graph weights
          if (model_json.is_null()) {
            model_json = grain::config_to_json(cfg);
            model_json["seed"] = bat_model.seed;  // base; per-graph is base + index
          }
          grain::Labels labels;
          labels.graph_label = entry.label;
          labels.node_labels = entry.node_labels;
          grain::GradientBundle bundle =
              grain::simulate_client_step(truth, cfg, labels);
          const auto start = std::chrono::steady_clock::now();
          grain::AttackResult result =
              grain::run_attack(truth.schema(), bundle, bat_flags.options());
          std::optional<double> wall;
          if (bat_flags.wall_times) {
            wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                 start)
                       .count();
          }
          outcome.attack = grain::attack_to_json(result, wall);
          if (result.graph)
            outcome.eval = grain::evaluate_pair(truth, *result.graph, bat_gsm_seed);
          if (!bat_out_dir.empty()) {
            grain::save_json_file(
                (fs::path(bat_out_dir) / (entry.id + ".json")).string(),
                outcome.attack);
          }
          outcome.ok = true;
        } catch (const std::exception& e) {
          outcome.ok = false;
          outcome.error = e.what();
        }
        outcomes.push_back(std::move(outcome));
      }
      emit(grain::batch_report_to_json(bat_flags.to_json(), model_json, outcomes,
                                       bat_bootstrap_seed),
           bat_out);
      return 0;
    }
  } catch (const grain::Error& e) {
    Json err{{"error",
              {{"code", grain::error_code_name(e.code())}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    Json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
