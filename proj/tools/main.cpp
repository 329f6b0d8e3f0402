#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "motifrgc/checkpoint.hpp"
#include "motifrgc/config.hpp"
#include "motifrgc/errors.hpp"
#include "motifrgc/evaluation.hpp"
#include "motifrgc/graph.hpp"
#include "motifrgc/rng.hpp"
#include "motifrgc/train.hpp"

namespace fs = std::filesystem;
using namespace motifrgc;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kNumerical = 3 };

RunConfig effective_config(const std::string& file, const std::vector<std::string>& overrides) {
  RunConfig cfg = file.empty() ? RunConfig{} : load_run_config(file);
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

GraphStore load_prepared(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset directory configured");
  GraphStore g = load_graph(cfg.dataset, cfg.format);
  if (!g.edge_split) g.edge_split = split_edges(g, cfg.edge_ratios, cfg.split_seed);
  if (!g.node_split && g.labels) g.node_split = split_nodes(g, cfg.node_ratios, cfg.split_seed);
  return g;
}

int cmd_prepare(const std::string& input, const std::string& format, const std::string& out, std::uint64_t seed) {
  GraphStore g = load_graph(input, parse_format(format));
  RunConfig defaults;
  const EdgeSplit edges = split_edges(g, defaults.edge_ratios, seed);
  std::optional<NodeSplit> nodes;
  if (g.labels) nodes = split_nodes(g, defaults.node_ratios, seed);
  const MotifSet motifs = enumerate_triangles(g);
  save_canonical(g, out);
  write_splits(fs::path(out) / "splits.json", edges, nodes, seed);
  write_triangles(fs::path(out) / "triangles.tsv", motifs);
  std::cout << "nodes " << g.num_nodes << ", edges " << g.adjacency.num_edges() << ", triangles "
            << motifs.triangles.size() << " -> " << out << "\n";
  return kOk;
}

int cmd_train(const RunConfig& cfg) {
  const GraphStore g = load_prepared(cfg);
  const GraphStore g_train = g.with_edges(g.edge_split->train_pos);
  const MotifSet motifs = enumerate_triangles(g_train);
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    std::ofstream log(dir / "train_log.jsonl", std::ios::trunc);
    const TrainResult result = train(g_train, motifs, tc, &log);
    Checkpoint ckpt{result.best, cfg, seed, result.best_valid_auc, result.best_iteration};
    save_checkpoint(dir / "model.ckpt", ckpt);
    std::cout << "seed " << seed << ": best valid AUC " << result.best_valid_auc << " at iteration "
              << result.best_iteration << " -> " << (dir / "model.ckpt").string() << "\n";
  }
  return kOk;
}

MetricsReport evaluate_checkpoint(const Checkpoint& ckpt, const GraphStore& g, const std::string& task,
                                  int tri_count) {
  const GraphStore g_train = g.with_edges(g.edge_split->train_pos);
  const EncoderState& enc = ckpt.model.encoder;
  if (enc.num_nodes() != g.num_nodes) throw DataError("checkpoint and dataset disagree on the node count");
  MetricsReport r;
  r.seed = ckpt.seed;
  const bool all = task == "all";
  Matrix views;
  if (all || task == "nc" || ckpt.config.train.lp_mode == LpMode::kEuclidean) views = embed(g_train, enc);
  if (all || task == "lp") {
    const auto& s = *g.edge_split;
    const LpMode mode = ckpt.config.train.lp_mode;
    const Vector pos = lp_scores(enc, s.test_pos, mode, ckpt.model.decoder, &views);
    const Vector neg = lp_scores(enc, s.test_neg, mode, ckpt.model.decoder, &views);
    r.lp_auc = auc(pos, neg);
    r.lp_ap = ap(pos, neg);
  }
  if (all || task == "nc") {
    if (!g.node_split) throw DataError("node classification needs labels and a node split");
    r.nc_acc = node_classify(views, g.labels, *g.node_split).test_acc;
  }
  if (all || task == "tri") {
    const MotifSet motifs = enumerate_triangles(g);
    std::vector<Triple> pos = motifs.triangles;
    std::mt19937_64 rng(derive_seed(ckpt.seed, 21));
    if (tri_count > 0 && static_cast<int>(pos.size()) > tri_count) {
      std::shuffle(pos.begin(), pos.end(), rng);
      pos.resize(static_cast<std::size_t>(tri_count));
    }
    if (pos.empty()) throw SamplingError("the graph has no triangles");
    const std::vector<Triple> neg =
        sample_negative_triples(g, motifs, static_cast<int>(pos.size()), derive_seed(ckpt.seed, 22));
    r.tri_auc = triangle_generation_auc(enc, ckpt.config.train.generator, pos, neg);
  }
  return r;
}

int cmd_eval(const std::vector<std::string>& checkpoints, const std::string& task, const std::string& dataset,
             const std::string& out, int tri_count) {
  if (task != "lp" && task != "nc" && task != "tri" && task != "all") {
    throw ConfigError("unknown task '" + task + "' (expected lp, nc, tri or all)");
  }
  std::vector<MetricsReport> reports;
  for (const auto& path : checkpoints) {
    const Checkpoint ckpt = load_checkpoint(path);
    RunConfig cfg = ckpt.config;
    if (!dataset.empty()) cfg.dataset = dataset;
    const GraphStore g = load_prepared(cfg);
    reports.push_back(evaluate_checkpoint(ckpt, g, task, tri_count));
  }
  const std::string json = report_json(reports);
  const fs::path target = out.empty() ? fs::path(checkpoints.front()).parent_path() / "report.json" : fs::path(out);
  if (!target.parent_path().empty()) fs::create_directories(target.parent_path());
  std::ofstream(target) << json << "\n";
  std::cout << json << "\n";
  return kOk;
}

int cmd_gen_motifs(const std::string& checkpoint, int count, std::uint64_t seed, const std::string& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const FakeMotifBatch batch = sample_fake_motifs(ckpt.model.encoder, ckpt.config.train.generator, count, seed);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out, std::ios::trunc);
    if (!file) throw DataError("cannot write " + out);
    os = &file;
  }
  *os << "# u\tv\tw\tlog_prob\n";
  for (const auto& m : batch.motifs) {
    *os << m.nodes[0] << '\t' << m.nodes[1] << '\t' << m.nodes[2] << '\t' << m.log_prob << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motif-aware Riemannian graph contrastive learning"};
  app.require_subcommand(1);

  auto* prepare = app.add_subcommand("prepare", "convert a dataset and write splits and triangles");
  std::string prep_input, prep_format = "planetoid", prep_out;
  std::uint64_t prep_seed = 0;
  prepare->add_option("--input", prep_input, "raw dataset directory")->required();
  prepare->add_option("--format", prep_format, "planetoid or canonical");
  prepare->add_option("--out", prep_out, "output directory")->required();
  prepare->add_option("--seed", prep_seed, "split seed");

  std::string config_file;
  std::vector<std::string> overrides;
  auto* train_cmd = app.add_subcommand("train", "train one model per seed");
  std::string dataset_flag, out_flag;
  std::vector<std::uint64_t> seed_flag;
  train_cmd->add_option("--config", config_file, "JSON run configuration");
  train_cmd->add_option("--set", overrides, "override a config key: key=value");
  train_cmd->add_option("--dataset", dataset_flag, "prepared dataset directory");
  train_cmd->add_option("--out", out_flag, "output directory");
  train_cmd->add_option("--seed", seed_flag, "training seeds");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints");
  std::vector<std::string> eval_ckpts;
  std::string eval_task = "all", eval_dataset, eval_out;
  int tri_count = 1000;
  eval_cmd->add_option("--checkpoint", eval_ckpts, "checkpoint file(s)")->required();
  eval_cmd->add_option("--task", eval_task, "lp, nc, tri or all");
  eval_cmd->add_option("--dataset", eval_dataset, "override the dataset directory stored in the checkpoint");
  eval_cmd->add_option("--out", eval_out, "report file (default: report.json next to the first checkpoint)");
  eval_cmd->add_option("--tri-count", tri_count, "maximum number of real triangles scored (0 = all)");

  auto* gen_cmd = app.add_subcommand("gen-motifs", "sample triangles from a trained generator");
  std::string gen_ckpt, gen_out;
  int gen_count = 100;
  std::uint64_t gen_seed = 0;
  gen_cmd->add_option("--checkpoint", gen_ckpt, "checkpoint file")->required();
  gen_cmd->add_option("--count", gen_count, "number of motifs");
  gen_cmd->add_option("--seed", gen_seed, "sampling seed");
  gen_cmd->add_option("--out", gen_out, "TSV output (default stdout)");

  auto* print_cmd = app.add_subcommand("print-config", "print the effective configuration");
  print_cmd->add_option("--config", config_file, "JSON run configuration");
  print_cmd->add_option("--set", overrides, "override a config key: key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*prepare) return cmd_prepare(prep_input, prep_format, prep_out, prep_seed);
    if (*train_cmd || *print_cmd) {
      RunConfig cfg = effective_config(config_file, overrides);
      if (!dataset_flag.empty()) cfg.dataset = dataset_flag;
      if (!out_flag.empty()) cfg.out_dir = out_flag;
      if (!seed_flag.empty()) cfg.seeds = seed_flag;
      if (*print_cmd) {
        std::cout << to_json(cfg).dump(2) << "\n";
        return kOk;
      }
      return cmd_train(cfg);
    }
    if (*eval_cmd) return cmd_eval(eval_ckpts, eval_task, eval_dataset, eval_out, tri_count);
    if (*gen_cmd) return cmd_gen_motifs(gen_ckpt, gen_count, gen_seed, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalFault& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
