// Drives the command-line binary as a child process and checks the contract
// a scripted caller relies on: exit codes, structured JSON errors on stderr,
// the files each subcommand writes, and byte-level determinism under fixed
// seeds.  The binary path comes from the build system via GRAIN_CLI_PATH.

#include <grain/grain.hpp>

#include <json.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "grain_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int call = 0;
  const fs::path out = work_dir() / ("stdout_" + std::to_string(call) + ".txt");
  const fs::path err = work_dir() / ("stderr_" + std::to_string(call) + ".txt");
  ++call;
  const std::string cmd = std::string(GRAIN_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string error_code(const CliResult& r) {
  CAPTURE(r.err);
  const Json j = Json::parse(r.err);
  return j.at("error").at("code").get<std::string>();
}

Json load_json(const fs::path& p) { return Json::parse(read_file(p)); }

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

TEST_CASE("cli: usage errors exit 2 with a structured stderr message") {
  const CliResult none = run_cli("");
  CHECK(none.exit_code == 2);
  CHECK(error_code(none) == "usage");

  const CliResult bad_flag = run_cli("gen --definitely-not-a-flag");
  CHECK(bad_flag.exit_code == 2);
  CHECK(error_code(bad_flag) == "usage");

  const CliResult bad_sub = run_cli("frobnicate");
  CHECK(bad_sub.exit_code == 2);
  CHECK(error_code(bad_sub) == "usage");
}

TEST_CASE("cli: missing input files exit 1 with io_error") {
  const fs::path missing = work_dir() / "does_not_exist.json";

  const CliResult atk = run_cli("attack --bundle " + missing.string());
  CHECK(atk.exit_code == 1);
  CHECK(error_code(atk) == "io_error");

  const CliResult ev = run_cli("evaluate --truth " + missing.string() +
                               " --recon " + missing.string());
  CHECK(ev.exit_code == 1);
  CHECK(error_code(ev) == "io_error");

  const CliResult sim = run_cli("simulate --graph " + missing.string() +
                                " --out " + (work_dir() / "x.json").string());
  CHECK(sim.exit_code == 1);
  CHECK(error_code(sim) == "io_error");
}

TEST_CASE("cli: invalid generator kind exits 1 with invalid_argument") {
  const CliResult r = run_cli("gen --kind bogus --out-dir " +
                              (work_dir() / "bogus_dir").string());
  CHECK(r.exit_code == 1);
  CHECK(error_code(r) == "invalid_argument");
}

TEST_CASE("cli: gen writes the promised dataset, byte-deterministically") {
  const fs::path dir_a = work_dir() / "gen_a";
  const fs::path dir_b = work_dir() / "gen_b";

  const CliResult a = run_cli(
      "gen --kind random_tree --n 5 --count 3 --seed 42 --out-dir " +
      dir_a.string());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out.find("wrote 3 graphs") != std::string::npos);

  const Json manifest = load_json(dir_a / "manifest.json");
  const auto& graphs = manifest.at("graphs");
  REQUIRE(graphs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto& entry = graphs[i];
    CHECK(entry.at("id").get<std::string>() == "g" + std::to_string(i));
    CHECK(entry.at("path").get<std::string>() ==
          "g" + std::to_string(i) + ".json");
    const int label = entry.at("label").get<int>();
    CHECK(label >= 0);
    CHECK(label < 2);  // default --num-classes
    CHECK_FALSE(entry.contains("node_labels"));  // graph task

    const grain::Graph g =
        grain::load_graph((dir_a / entry.at("path").get<std::string>()).string());
    CHECK(g.n() == 5);
    CHECK(g.edges().size() == 4);  // a tree on 5 nodes
  }

  const CliResult b = run_cli(
      "gen --kind random_tree --n 5 --count 3 --seed 42 --out-dir " +
      dir_b.string());
  REQUIRE(b.exit_code == 0);
  CHECK(read_file(dir_a / "manifest.json") == read_file(dir_b / "manifest.json"));
  for (int i = 0; i < 3; ++i) {
    const std::string name = "g" + std::to_string(i) + ".json";
    CHECK(read_file(dir_a / name) == read_file(dir_b / name));
  }
}

TEST_CASE("cli: seeded tree pipeline reconstructs the client graph exactly") {
  const fs::path dir = work_dir() / "pipeline";
  REQUIRE(run_cli("gen --kind random_tree --n 6 --count 1 --seed 11 --out-dir " +
                  dir.string())
              .exit_code == 0);
  const Json manifest = load_json(dir / "manifest.json");
  const int label = manifest.at("graphs")[0].at("label").get<int>();

  const std::string model_flags =
      " --arch gat --layers 2 --hidden 64 --heads 2 --seed 7";
  const fs::path bundle = dir / "bundle.json";
  REQUIRE(run_cli("simulate --graph " + (dir / "g0.json").string() + model_flags +
                  " --label " + std::to_string(label) + " --out " +
                  bundle.string())
              .exit_code == 0);

  // Same command again: the bundle is a pure function of graph + flags.
  const fs::path bundle2 = dir / "bundle2.json";
  REQUIRE(run_cli("simulate --graph " + (dir / "g0.json").string() + model_flags +
                  " --label " + std::to_string(label) + " --out " +
                  bundle2.string())
              .exit_code == 0);
  CHECK(read_file(bundle) == read_file(bundle2));

  const fs::path recon = dir / "recon.json";
  REQUIRE(run_cli("attack --bundle " + bundle.string() + " --out " +
                  recon.string())
              .exit_code == 0);
  const Json r = load_json(recon);
  CHECK(r.at("exact").get<bool>());
  CHECK(r.at("complete").get<bool>());
  REQUIRE_FALSE(r.at("graph").is_null());
  CHECK(r.at("graph").at("nodes").size() == 6);

  // Without --out the same envelope goes to stdout.
  const CliResult to_stdout = run_cli("attack --bundle " + bundle.string());
  REQUIRE(to_stdout.exit_code == 0);
  CHECK(Json::parse(to_stdout.out) == r);

  // Re-running the attack reproduces the file byte for byte.
  const fs::path recon2 = dir / "recon2.json";
  REQUIRE(run_cli("attack --bundle " + bundle.string() + " --out " +
                  recon2.string())
              .exit_code == 0);
  CHECK(read_file(recon) == read_file(recon2));

  const CliResult ev = run_cli("evaluate --truth " + (dir / "g0.json").string() +
                               " --recon " + recon.string());
  REQUIRE(ev.exit_code == 0);
  const Json e = Json::parse(ev.out);
  CHECK(e.at("gsm0").get<double>() == 100.0);
  CHECK(e.at("gsm1").get<double>() == 100.0);
  CHECK(e.at("gsm2").get<double>() == 100.0);
  CHECK(e.at("full").get<bool>());
  CHECK(e.at("sizes").at("truth").get<int>() == 6);
  CHECK(e.at("sizes").at("reconstruction").get<int>() == 6);
  CHECK(e.at("matching").size() == 6);

  // --out writes the identical document to a file.
  const fs::path eval_path = dir / "eval.json";
  REQUIRE(run_cli("evaluate --truth " + (dir / "g0.json").string() +
                  " --recon " + recon.string() + " --out " + eval_path.string())
              .exit_code == 0);
  CHECK(load_json(eval_path) == e);
}

TEST_CASE("cli: evaluate a graph against itself scores perfect") {
  const fs::path dir = work_dir() / "self_eval";
  REQUIRE(run_cli("gen --kind molecule_like --n 7 --count 1 --seed 5 --out-dir " +
                  dir.string())
              .exit_code == 0);
  const std::string g0 = (dir / "g0.json").string();
  const CliResult ev = run_cli("evaluate --truth " + g0 + " --recon " + g0);
  REQUIRE(ev.exit_code == 0);
  const Json e = Json::parse(ev.out);
  CHECK(e.at("gsm0").get<double>() == 100.0);
  CHECK(e.at("gsm1").get<double>() == 100.0);
  CHECK(e.at("gsm2").get<double>() == 100.0);
  CHECK(e.at("full").get<bool>());
  CHECK(e.at("matching").size() == 7);
}

TEST_CASE("cli: over-permissive tau terminates promptly via the candidate cap") {
  const fs::path dir = work_dir() / "tau_one";
  REQUIRE(run_cli("gen --kind random_tree --n 6 --count 1 --seed 11 --out-dir " +
                  dir.string())
              .exit_code == 0);
  const fs::path bundle = dir / "bundle.json";
  REQUIRE(run_cli("simulate --graph " + (dir / "g0.json").string() +
                  " --arch gat --layers 2 --hidden 64 --heads 2 --seed 7" +
                  " --label 0 --out " + bundle.string())
              .exit_code == 0);

  // tau = 1 accepts essentially every candidate, so the set blows past the
  // cap; the cap turns that into a prompt, structured exit instead of a hang.
  const CliResult r = run_cli("attack --bundle " + bundle.string() + " --tau 1");
  CHECK(r.exit_code == 1);
  CHECK(error_code(r) == "cap_exceeded");
}

TEST_CASE("cli: batch reports every graph and is byte-deterministic") {
  const fs::path dir = work_dir() / "batch";
  REQUIRE(run_cli("gen --kind random_tree --n 5 --count 3 --seed 42 --out-dir " +
                  dir.string())
              .exit_code == 0);

  const std::string flags = " --arch gat --hidden 64 --heads 2 --seed 3";
  const fs::path report1 = dir / "report1.json";
  const fs::path outs1 = dir / "outs1";
  REQUIRE(run_cli("batch --manifest " + (dir / "manifest.json").string() + flags +
                  " --out " + report1.string() + " --out-dir " + outs1.string())
              .exit_code == 0);

  const Json rep = load_json(report1);
  CHECK(rep.at("model").at("arch").get<std::string>() == "gat");
  CHECK(rep.at("model").at("hidden_dim").get<int>() == 64);
  CHECK(rep.at("options").contains("tau"));

  const auto& graphs = rep.at("graphs");
  REQUIRE(graphs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto& entry = graphs[i];
    CHECK(entry.at("id").get<std::string>() == "g" + std::to_string(i));
    CHECK(entry.at("status").get<std::string>() == "ok");
    CHECK(entry.at("attack").at("exact").get<bool>());
    CHECK(entry.at("evaluation").at("gsm0").get<double>() == 100.0);
    CHECK(entry.at("evaluation").at("full").get<bool>());
  }
  const auto& summary = rep.at("summary");
  CHECK(summary.at("count").get<int>() == 3);
  CHECK(summary.at("errors").get<int>() == 0);
  CHECK(summary.at("exact").get<int>() == 3);
  CHECK(summary.at("complete").get<int>() == 3);
  CHECK(summary.at("full").get<int>() == 3);
  CHECK(summary.at("gsm0").at("mean").get<double>() == 100.0);
  CHECK(summary.at("gsm0").at("ci_low").get<double>() == 100.0);
  CHECK(summary.at("gsm0").at("ci_high").get<double>() == 100.0);

  // Per-graph reconstructions land in --out-dir and evaluate perfectly.
  for (int i = 0; i < 3; ++i) {
    const fs::path f = outs1 / ("g" + std::to_string(i) + ".json");
    REQUIRE(fs::exists(f));
    const CliResult ev =
        run_cli("evaluate --truth " +
                (dir / ("g" + std::to_string(i) + ".json")).string() +
                " --recon " + f.string());
    REQUIRE(ev.exit_code == 0);
    CHECK(Json::parse(ev.out).at("gsm0").get<double>() == 100.0);
  }

  // Identical invocation: identical report and per-graph bytes.
  const fs::path report2 = dir / "report2.json";
  const fs::path outs2 = dir / "outs2";
  REQUIRE(run_cli("batch --manifest " + (dir / "manifest.json").string() + flags +
                  " --out " + report2.string() + " --out-dir " + outs2.string())
              .exit_code == 0);
  CHECK(read_file(report1) == read_file(report2));
  for (int i = 0; i < 3; ++i) {
    const std::string name = "g" + std::to_string(i) + ".json";
    CHECK(read_file(outs1 / name) == read_file(outs2 / name));
  }
}

TEST_CASE("cli: node-classification simulate requires per-node labels") {
  const fs::path dir = work_dir() / "node_task";
  REQUIRE(run_cli("gen --kind random_tree --n 5 --count 1 --task node"
                  " --num-classes 3 --seed 9 --out-dir " +
                  dir.string())
              .exit_code == 0);

  const Json manifest = load_json(dir / "manifest.json");
  const auto& entry = manifest.at("graphs")[0];
  REQUIRE(entry.contains("node_labels"));
  const auto labels = entry.at("node_labels").get<std::vector<int>>();
  REQUIRE(labels.size() == 5);
  for (int v : labels) {
    CHECK(v >= 0);
    CHECK(v < 3);
  }

  const std::string graph = (dir / "g0.json").string();
  const CliResult without = run_cli("simulate --graph " + graph +
                                    " --seed 7 --out " +
                                    (dir / "nb.json").string());
  CHECK(without.exit_code == 1);
  CHECK(error_code(without) == "invalid_argument");

  const fs::path nb = dir / "nb.json";
  REQUIRE(run_cli("simulate --graph " + graph + " --seed 7 --node-labels " +
                  join_ints(labels) + " --out " + nb.string())
              .exit_code == 0);
  const Json b = load_json(nb);
  CHECK(b.at("config").at("task").get<std::string>() == "node_classification");
  CHECK(b.at("labels").get<std::vector<int>>() == labels);
}
