#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "bgch/dispersion.hpp"
#include "bgch/experiments.hpp"
#include "bgch/graph.hpp"
#include "bgch/landscape.hpp"
#include "bgch/logging.hpp"
#include "bgch/parallel.hpp"
#include "bgch/retrieval.hpp"
#include "bgch/trainer.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;

namespace bgch::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> ablations;

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
      cfg = load_config(config_path);
    }
    for (const auto& [k, v] : overrides) apply_config_key(cfg, k, v);
    for (const auto& a : ablations) set_ablation(cfg.ablations, a);
    cfg.validate();
    return cfg;
  }
};

void add_config_flags(CLI::App* sub, ConfigFlags& flags) {
  sub->add_option("--config", flags.config_path, "key = value config file");
  auto key_flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); }, help);
  };
  key_flag("--seed", "seed", "run seed");
  key_flag("--estimator", "estimator", "fourier|ste|tanh|sigmoid|signswish");
  key_flag("--n-terms", "fourier.n", "Fourier term count n");
  key_flag("--H", "fourier.H", "Fourier half period H");
  key_flag("--counting", "fourier.counting", "odd_bound|harmonics");
  key_flag("--epsilon", "epsilon", "dispersion strength");
  key_flag("--layers", "layers", "convolution layers L");
  key_flag("--disp-iters", "disp_iters", "power iterations K");
  key_flag("--dim", "dim", "embedding / code width");
  key_flag("--lambda1", "lambda1", "BPR weight");
  key_flag("--lambda2", "lambda2", "L2 weight");
  key_flag("--lr", "lr", "Adam learning rate");
  key_flag("--batch", "batch", "positives per batch");
  key_flag("--negatives", "negatives", "negatives per positive");
  key_flag("--epochs", "epochs", "epoch budget");
  key_flag("--patience", "patience", "early-stop patience (0 disables)");
  key_flag("--test-ratio", "test_ratio", "held-out fraction");
  key_flag("--freeze-projection", "freeze_projection", "draw the dispersing vector once per run");
  sub->add_option("--ablation", flags.ablations, "ablation switch (repeatable)");
}

LoadedGraph load_edges(const std::string& path) {
  if (path.empty()) throw UsageError("--edges is required");
  if (!fs::exists(path)) throw UsageError("edges file not found: " + path);
  return load_edge_list(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  ConfigFlags cfg;
  std::string edges;
  std::string out = "run";
  bool wall_clock = false;
};

int cmd_train(const TrainArgs& a) {
  const TrainConfig cfg = a.cfg.resolve();
  const LoadedGraph loaded = load_edges(a.edges);
  const fs::path out(a.out);
  fs::create_directories(out);

  const DataSplit data = split(loaded.graph, cfg.test_ratio, cfg.seed);
  const TrainResult result = train(data, cfg);

  result.codes.save(out / "codes.bgch");
  write_text(out / "metrics.csv", metrics_csv(result.log, a.wall_clock));
  write_text(out / "eval.csv", result.final_report.to_csv());
  save_checkpoint(result.state, cfg, out / "checkpoint.bgck");

  RunManifest m;
  m.command = "train";
  m.config = cfg;
  m.has_config = true;
  m.inputs = {{"edges", a.edges}};
  m.artifacts = {{"codes", "codes.bgch"}, {"metrics", "metrics.csv"}, {"eval", "eval.csv"},
                 {"checkpoint", "checkpoint.bgck"}};
  m.extra = {{"n1", std::to_string(loaded.graph.n1())},
             {"n2", std::to_string(loaded.graph.n2())},
             {"edges", std::to_string(loaded.graph.num_edges())},
             {"train_edges", std::to_string(data.train.size())},
             {"test_edges", std::to_string(data.test.size())},
             {"epochs_run", std::to_string(result.log.size())},
             {"early_stopped", result.early_stopped ? "true" : "false"}};
  m.write(out);

  if (result.final_report.queries > 0) {
    fmt::print("trained {} epochs; Recall@20 {:.4f} NDCG@20 {:.4f} over {} queries\n", result.log.size(),
               result.final_report.recall_at_cutoff(20), result.final_report.ndcg_at_cutoff(20),
               result.final_report.queries);
  } else {
    fmt::print("trained {} epochs; no held-out queries\n", result.log.size());
  }
  return kOk;
}

// ----------------------------------------------------------------- query

struct QueryArgs {
  std::string codes;
  std::vector<long long> nodes;
  std::string queries;
  std::size_t n = 20;
  long long n1 = -1;
  std::string out;
};

long long n1_from_manifest(const fs::path& codes) {
  const fs::path manifest = codes.parent_path() / "manifest.json";
  if (!fs::exists(manifest)) return -1;
  try {
    std::ifstream in(manifest);
    const auto j = nlohmann::json::parse(in);
    if (j.contains("facts") && j["facts"].contains("n1")) return std::stoll(j["facts"]["n1"].get<std::string>());
  } catch (const std::exception& e) {
    logger()->warn("ignoring unreadable manifest {}: {}", manifest.string(), e.what());
  }
  return -1;
}

int cmd_query(const QueryArgs& a) {
  if (!fs::exists(a.codes)) throw UsageError("code table not found: " + a.codes);
  if (a.n == 0) throw UsageError("--n must be >= 1");
  const HashCodeTable table = HashCodeTable::load(a.codes);
  const long long n1 = a.n1 >= 0 ? a.n1 : n1_from_manifest(a.codes);
  if (n1 > static_cast<long long>(table.nodes())) throw UsageError("--n1 exceeds the table's node count");

  // With a known x/y split, queries are x ids and candidates are y ids;
  // otherwise every table row is both.
  const bool bipartite = n1 >= 0;
  const std::size_t first = bipartite ? static_cast<std::size_t>(n1) : 0;
  const std::size_t query_limit = bipartite ? static_cast<std::size_t>(n1) : table.nodes();
  const RetrievalIndex index(table, first, table.nodes() - first);

  std::vector<long long> ids = a.nodes;
  if (!a.queries.empty()) {
    std::ifstream in(a.queries);
    if (!in) throw UsageError("query file not found: " + a.queries);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      try {
        ids.push_back(std::stoll(line));
      } catch (const std::exception&) {
        std::cerr << fmt::format("error: {}:{}: not a node id: '{}'\n", a.queries, line_no, line);
      }
    }
  }
  if (ids.empty()) throw UsageError("no queries given (use --node or --queries)");
  if (a.n > index.size()) {
    logger()->warn("N = {} exceeds the {} candidates; returning all of them", a.n, index.size());
  }

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  const auto start = std::chrono::steady_clock::now();
  std::size_t answered = 0;
  std::size_t failed = 0;
  for (long long id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= query_limit) {
      std::cerr << fmt::format("error: query {}: unknown node id\n", id);
      ++failed;
      continue;
    }
    std::vector<std::uint32_t> exclude;
    if (!bipartite) exclude.push_back(static_cast<std::uint32_t>(id));
    write_topn_tsv(out, static_cast<std::uint64_t>(id),
                   index.topn(query_from_table(table, static_cast<std::size_t>(id)), a.n, exclude));
    ++answered;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::cerr << fmt::format("answered {} queries ({} failed) in {:.3f} ms, {:.3f} us/query\n", answered, failed, ms,
                           answered ? ms * 1000.0 / static_cast<double>(answered) : 0.0);
  return kOk;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  ConfigFlags cfg;
  std::string codes;
  std::string edges;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const TrainConfig cfg = a.cfg.resolve();
  if (!fs::exists(a.codes)) throw UsageError("code table not found: " + a.codes);
  const LoadedGraph loaded = load_edges(a.edges);
  const HashCodeTable table = HashCodeTable::load(a.codes);
  const DataSplit data = split(loaded.graph, cfg.test_ratio, cfg.seed);
  MetricReport report = evaluate_codes(table, data.train_graph(), data.held_out(), {10, 20, 50, 100, 200, 500, 1000});
  report.fingerprint = cfg.fingerprint();
  const std::string csv = report.to_csv();
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
  }
  return kOk;
}

// ---------------------------------------------------------- ablate / estimators

struct SuiteArgs {
  ConfigFlags cfg;
  std::string edges;
  std::string out = "suite";
  std::string kinds = "fourier,ste,tanh,sigmoid,signswish";
  std::string sweep = "1,3,5,7";
  bool wall_clock = false;
};

int cmd_ablate(const SuiteArgs& a) {
  const TrainConfig cfg = a.cfg.resolve();
  const LoadedGraph loaded = load_edges(a.edges);
  const fs::path out(a.out);
  fs::create_directories(out);
  const DataSplit data = split(loaded.graph, cfg.test_ratio, cfg.seed);
  const SuiteTable table = run_ablation_suite(data, cfg);
  write_text(out / "ablation.csv", table.to_csv(a.wall_clock));
  write_text(out / "ablation.txt", table.to_text(a.wall_clock));
  RunManifest m;
  m.command = "ablate";
  m.config = cfg;
  m.has_config = true;
  m.inputs = {{"edges", a.edges}};
  m.artifacts = {{"table_csv", "ablation.csv"}, {"table_text", "ablation.txt"}};
  m.write(out);
  std::cout << table.to_text(a.wall_clock);
  for (const auto& r : table.rows) {
    if (r.failed) return kFailure;
  }
  return kOk;
}

int cmd_estimators(const SuiteArgs& a) {
  const TrainConfig cfg = a.cfg.resolve();
  const LoadedGraph loaded = load_edges(a.edges);
  const fs::path out(a.out);
  fs::create_directories(out);
  std::vector<EstimatorKind> kinds;
  std::stringstream ss(a.kinds);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(parse_estimator_kind(item));
  }
  const DataSplit data = split(loaded.graph, cfg.test_ratio, cfg.seed);
  const SuiteTable table = run_estimator_suite(data, cfg, kinds, parse_int_list(a.sweep));
  write_text(out / "estimators.csv", table.to_csv(true));
  write_text(out / "estimators.txt", table.to_text(true));
  RunManifest m;
  m.command = "estimators";
  m.config = cfg;
  m.has_config = true;
  m.inputs = {{"edges", a.edges}};
  m.artifacts = {{"table_csv", "estimators.csv"}, {"table_text", "estimators.txt"}};
  m.extra = {{"kinds", a.kinds}, {"fourier_sweep", a.sweep}};
  m.write(out);
  std::cout << table.to_text(true);
  for (const auto& r : table.rows) {
    if (r.failed) return kFailure;
  }
  return kOk;
}

// ----------------------------------------------------------------- bench

struct BenchArgs {
  std::size_t candidates = 100000;
  std::size_t d = 256;
  std::size_t layers = 2;
  std::size_t queries = 1000;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  if (a.candidates == 0 || a.d == 0 || a.queries == 0) throw UsageError("--candidates, --d and --queries must be >= 1");
  set_max_threads(1);
  Rng rng = make_stream(a.seed, "bench");
  const HashCodeTable cands = random_code_table(a.candidates, a.d, a.layers + 1, rng);
  const HashCodeTable qtable = random_code_table(a.queries, a.d, a.layers + 1, rng);
  std::vector<QueryCode> queries;
  queries.reserve(a.queries);
  for (std::size_t i = 0; i < a.queries; ++i) queries.push_back(query_from_table(qtable, i));
  const RetrievalIndex index(cands);
  const FloatIndex floats(index);
  const BenchReport report = bench_matching(index, floats, queries);
  const std::string json = report.to_json() + "\n";
  std::cout << json;
  if (!a.out.empty()) write_text(a.out, json);
  std::cerr << fmt::format("hamming {:.1f} us/query, float {:.1f} us/query, speedup {:.2f}x\n", report.hamming_mean_us,
                           report.float_mean_us, report.speedup);
  if (!report.rankings_identical) {
    std::cerr << fmt::format("error: hamming and float paths disagree ({} score mismatches)\n",
                             report.score_mismatches);
    return kFailure;
  }
  return kOk;
}

// ------------------------------------------------------------- landscape

struct LandscapeArgs {
  ConfigFlags cfg;
  std::string edges;
  std::string checkpoint;
  std::string p = "0.01:0.5:0.01";
  std::string out;
};

int cmd_landscape(const LandscapeArgs& a) {
  const TrainConfig cfg = a.cfg.resolve();
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  char c1 = 0;
  char c2 = 0;
  std::stringstream ps(a.p);
  if (!(ps >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':') {
    throw UsageError("--p expects start:end:step, got " + a.p);
  }
  const std::vector<double> p_values = landscape_range(lo, hi, step);

  BipartiteGraph graph;
  if (a.edges.empty()) {
    graph = planted_partition(20, 20, 2, 0.8, 0.05, cfg.seed);
  } else {
    graph = load_edges(a.edges).graph;
  }
  Matrix v0;
  if (!a.checkpoint.empty()) {
    if (!fs::exists(a.checkpoint)) throw UsageError("checkpoint not found: " + a.checkpoint);
    v0 = load_checkpoint(a.checkpoint).embeddings;
  } else {
    Rng rng = make_stream(cfg.seed, "init");
    std::normal_distribution<double> normal(0.0, cfg.init_std);
    v0.resize(static_cast<Eigen::Index>(graph.num_nodes()), cfg.dim);
    for (Eigen::Index i = 0; i < v0.size(); ++i) v0.data()[i] = normal(rng);
  }
  const LandscapeGrid grid = landscape_scan(graph, cfg, v0, p_values);
  if (a.out.empty()) {
    std::cout << grid.to_csv();
  } else {
    write_text(a.out, grid.to_csv());
  }
  std::cerr << fmt::format("loss range: hashed {:.6g}, non_hashed {:.6g} over {} points each\n",
                           grid.range(LandscapeVariant::hashed), grid.range(LandscapeVariant::non_hashed),
                           p_values.size() * p_values.size());
  return kOk;
}

// -------------------------------------------------------------- validate

struct ValidateArgs {
  std::size_t samples = 10000;
  std::size_t identity_trials = 100000;
  std::string iterations = "1,2,3";
  double epsilon = 0.5;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_validate(const ValidateArgs& a) {
  if (a.samples < 1000) throw UsageError("--samples must be >= 1000");
  std::size_t violations = 0;
  if (!a.out.empty()) fs::create_directories(a.out);
  for (int k : parse_int_list(a.iterations)) {
    ShrinkageOptions opts;
    opts.iterations = k;
    opts.epsilon = a.epsilon;
    opts.samples = a.samples;
    opts.seed = a.seed + static_cast<std::uint64_t>(k);
    const ShrinkageReport report = estimate_dispersion_shrinkage(opts);
    std::cout << fmt::format("dispersion shrinkage K={}: {} violations", k, report.violations);
    std::cout << fmt::format(" (mu_hat {:.6f} .. {:.6f})\n", report.mu_hat.front(), report.mu_hat.back());
    if (report.violations > 0) {
      for (std::size_t i = 0; i + 1 < report.mu_hat.size(); ++i) {
        if (report.mu_hat[i + 1] - report.mu_hat[i] < -3.0 * report.diff_stderr[i]) {
          std::cout << fmt::format("  violation at k={}: mu_hat {:.6f} > {:.6f}\n", i + 1, report.mu_hat[i],
                                   report.mu_hat[i + 1]);
        }
      }
    }
    if (!a.out.empty()) write_text(fs::path(a.out) / fmt::format("shrinkage_K{}.csv", k), report.to_csv());
    violations += report.violations;
  }
  const IdentityCheckReport id = check_hamming_identity(a.identity_trials, a.seed);
  std::cout << fmt::format("hamming identity: {} trials, {} violations\n", id.trials, id.violations);
  if (id.violations > 0) std::cout << "  first: " << id.first_violation << "\n";
  violations += id.violations;
  std::cout << fmt::format("{} violations\n", violations);
  return violations == 0 ? kOk : kFailure;
}

// ----------------------------------------------------------------- audit

int cmd_audit(const std::string& codes) {
  if (!fs::exists(codes)) throw UsageError("code table not found: " + codes);
  std::cout << space_audit(codes).to_text();
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  init_logging_from_env();
  CLI::App app{"Bipartite graph convolutional hashing: training, retrieval and evaluation", "bgch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BGCH_VERSION);
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker cap for sharded kernels (0 = all cores)")->capture_default_str();
  app.fallthrough();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train embeddings and write codes, metrics, checkpoint, manifest");
  add_config_flags(train_cmd, train_args.cfg);
  train_cmd->add_option("--edges", train_args.edges, "edge list (x y per line)");
  train_cmd->add_option("--out", train_args.out, "output directory")->capture_default_str();
  train_cmd->add_flag("--wall-clock", train_args.wall_clock, "record epoch wall time in metrics.csv");

  QueryArgs query_args;
  auto* query_cmd = app.add_subcommand("query", "Top-N Hamming retrieval from a code table");
  query_cmd->add_option("--codes", query_args.codes, "code table file")->required();
  query_cmd->add_option("--node", query_args.nodes, "query node id (repeatable)");
  query_cmd->add_option("--queries", query_args.queries, "file with one query id per line");
  query_cmd->add_option("--n", query_args.n, "result list length")->capture_default_str();
  query_cmd->add_option("--n1", query_args.n1, "size of the query side (default: from manifest.json beside codes)");
  query_cmd->add_option("--out", query_args.out, "TSV output file (default stdout)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Recall@N / NDCG@N of a code table on the held-out split");
  add_config_flags(eval_cmd, eval_args.cfg);
  eval_cmd->add_option("--codes", eval_args.codes, "code table file")->required();
  eval_cmd->add_option("--edges", eval_args.edges, "edge list used for training");
  eval_cmd->add_option("--out", eval_args.out, "CSV output file (default stdout)");

  SuiteArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "train the full model and each single-switch ablation");
  add_config_flags(ablate_cmd, ablate_args.cfg);
  ablate_cmd->add_option("--edges", ablate_args.edges, "edge list");
  ablate_cmd->add_option("--out", ablate_args.out, "output directory")->capture_default_str();
  ablate_cmd->add_flag("--wall-clock", ablate_args.wall_clock, "include per-iteration time");

  SuiteArgs est_args;
  est_args.out = "estimators";
  auto* est_cmd = app.add_subcommand("estimators", "compare gradient estimators and sweep the Fourier term count");
  add_config_flags(est_cmd, est_args.cfg);
  est_cmd->add_option("--edges", est_args.edges, "edge list");
  est_cmd->add_option("--out", est_args.out, "output directory")->capture_default_str();
  est_cmd->add_option("--kinds", est_args.kinds, "comma-separated estimator kinds")->capture_default_str();
  est_cmd->add_option("--sweep", est_args.sweep, "comma-separated Fourier term counts")->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Hamming vs float matching speed on random codes");
  bench_cmd->add_option("--candidates", bench_args.candidates, "candidate count")->capture_default_str();
  bench_cmd->add_option("--d", bench_args.d, "bits per segment")->capture_default_str();
  bench_cmd->add_option("--L", bench_args.layers, "layers (segments - 1)")->capture_default_str();
  bench_cmd->add_option("--queries", bench_args.queries, "query count")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "JSON report file");

  LandscapeArgs land_args;
  auto* land_cmd = app.add_subcommand("landscape", "loss grid under embedding perturbations");
  add_config_flags(land_cmd, land_args.cfg);
  land_cmd->add_option("--edges", land_args.edges, "edge list (default: planted 20x20 two-cluster graph)");
  land_cmd->add_option("--checkpoint", land_args.checkpoint, "embeddings to perturb (default: fresh init)");
  land_cmd->add_option("--p", land_args.p, "start:end:step perturbation magnitudes")->capture_default_str();
  land_cmd->add_option("--out", land_args.out, "CSV output file (default stdout)");

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "dispersion shrinkage Monte-Carlo and Hamming identity fuzz");
  val_cmd->add_option("--samples", val_args.samples, "Monte-Carlo draws per K")->capture_default_str();
  val_cmd->add_option("--identity-trials,--thm2-trials", val_args.identity_trials, "Hamming identity trials")
      ->capture_default_str();
  val_cmd->add_option("--disp-iters", val_args.iterations, "comma-separated K values")->capture_default_str();
  val_cmd->add_option("--epsilon", val_args.epsilon, "dispersion strength")->capture_default_str();
  val_cmd->add_option("--seed", val_args.seed, "seed")->capture_default_str();
  val_cmd->add_option("--out", val_args.out, "directory for shrinkage CSVs");

  std::string audit_codes;
  auto* audit_cmd = app.add_subcommand("audit", "space accounting of a code table file");
  audit_cmd->add_option("--codes", audit_codes, "code table file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  set_max_threads(threads);
  try {
    if (app.got_subcommand(train_cmd)) return cmd_train(train_args);
    if (app.got_subcommand(query_cmd)) return cmd_query(query_args);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_args);
    if (app.got_subcommand(ablate_cmd)) return cmd_ablate(ablate_args);
    if (app.got_subcommand(est_cmd)) return cmd_estimators(est_args);
    if (app.got_subcommand(bench_cmd)) return cmd_bench(bench_args);
    if (app.got_subcommand(land_cmd)) return cmd_landscape(land_args);
    if (app.got_subcommand(val_cmd)) return cmd_validate(val_args);
    if (app.got_subcommand(audit_cmd)) return cmd_audit(audit_codes);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace bgch::cli
