#include "amtl/cli.hpp"

#include <CLI11.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "amtl/compare.hpp"
#include "amtl/data_io.hpp"
#include "amtl/evaluation.hpp"
#include "amtl/training.hpp"

namespace amtl {

namespace {

struct GenDataArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string pairs_out;
  int refs = 100;
  int evals_per_ref = 24;
  std::string split_out;
  double test_fraction = 0.2;
};

struct GenTripletsArgs {
  std::string dataset;
  std::string pairs;
  std::string mode = "single";
  int pairs_per_anchor = 150;
  std::uint64_t seed = 0;
  int scale = 5;
  std::string train_ids;
  std::string out;
};

struct TrainArgs {
  std::string dataset;
  std::string quads;
  std::string config;
  std::string out_model;
  std::string out_report;
  std::string out_head;
  std::string mode;
  std::optional<double> margin;
  std::optional<std::uint64_t> seed;
  int scale = 5;
};

struct EvalArgs {
  std::string model;
  std::string head;
  std::string dataset;
  std::string test_split;
  std::string method = "reference";
  std::string train_split;
  int scale = 5;
  std::string out;
};

struct StatsArgs {
  std::string quads;
  int bins = 10;
  std::string out;
  std::string dataset;
  std::string model;
  int scale = 5;
};

struct CompareArgs {
  std::string dataset;
  std::string config_fixed;
  std::string config_adaptive;
  int seeds = 5;
  int pairs_per_anchor = 10;
  int scale = 5;
  std::string out;
};

std::vector<std::size_t> layer_dims(std::size_t in_dim, const ArchitectureSpec& arch) {
  std::vector<std::size_t> dims{in_dim};
  dims.insert(dims.end(), arch.hidden.begin(), arch.hidden.end());
  dims.push_back(arch.embed_dim);
  return dims;
}

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  SyntheticSpec spec;
  if (!a.config.empty()) spec = synthetic_spec_from_json(read_json(a.config));
  if (a.seed) spec.seed = *a.seed;
  validate(spec);

  if (!a.pairs_out.empty()) {
    const PairRatingDataset ds = generate_synthetic_pairwise(spec, a.refs, a.evals_per_ref);
    save_feature_dataset(a.out, ds.items);
    write_file_atomic(a.pairs_out, pairs_to_csv(ds.pairs));
    out << "wrote " << ds.items.items.size() << " items and " << ds.pairs.size() << " pairs\n";
    return kExitOk;
  }
  const FeatureDataset ds = generate_synthetic(spec);
  std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>> split;
  if (!a.split_out.empty()) split = split_ids(ds, a.test_fraction, spec.seed);
  save_feature_dataset(a.out, ds);
  if (split) {
    write_file_atomic(a.split_out + ".train.txt", ids_to_text(split->first));
    write_file_atomic(a.split_out + ".test.txt", ids_to_text(split->second));
  }
  out << "wrote " << ds.items.size() << " items\n";
  return kExitOk;
}

int cmd_gen_triplets(const GenTripletsArgs& a, std::ostream& out) {
  std::vector<Quadruplet> quads;
  if (a.mode == "single") {
    FeatureDataset ds = load_feature_dataset(a.dataset, a.scale);
    if (!a.train_ids.empty()) ds = subset(ds, ids_from_text(read_file(a.train_ids)));
    quads = generate_quadruplets_single(ds, a.pairs_per_anchor, a.seed);
  } else {
    if (a.pairs.empty()) throw InvalidConfig("--pairs is required with --mode pairwise");
    PairRatingDataset ds = load_pair_dataset(a.dataset, a.pairs, a.scale);
    if (!a.train_ids.empty()) {
      const auto ids = ids_from_text(read_file(a.train_ids));
      const std::unordered_set<std::string> keep(ids.begin(), ids.end());
      std::erase_if(ds.pairs, [&](const RatedPair& p) { return !keep.contains(p.ref_id); });
    }
    const PairwiseQuadruplets result = generate_quadruplets_pairwise(ds);
    quads = result.quads;
    out << "skipped " << result.ties_skipped << " tied pairs and " << result.refs_skipped
        << " references with fewer than two pairs\n";
  }
  save_quadruplets(a.out, quads);
  out << "wrote " << quads.size() << " quadruplets\n";
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig cfg;
  if (!a.config.empty()) cfg = train_config_from_json(read_json(a.config));
  if (a.mode == "fixed") {
    cfg.margin_mode = FixedMargin{a.margin.value_or(0.5)};
  } else if (a.mode == "adaptive") {
    if (a.margin) throw InvalidConfig("--margin is only valid with --mode fixed");
    cfg.margin_mode = AdaptiveMargin{};
  } else if (a.margin) {
    if (!std::holds_alternative<FixedMargin>(cfg.margin_mode)) {
      throw InvalidConfig("--margin is only valid with --mode fixed");
    }
    cfg.margin_mode = FixedMargin{*a.margin};
  }
  if (a.seed) cfg.seed = *a.seed;
  validate(cfg);
  const bool with_head = cfg.loss_weights.beta > 0.0;
  if (with_head && a.out_head.empty()) throw InvalidConfig("--out-head is required when beta > 0");

  const FeatureDataset ds = load_feature_dataset(a.dataset, a.scale, with_head);
  const std::vector<Quadruplet> quads = load_quadruplets(a.quads);
  EmbeddingNet net = init_net(layer_dims(ds.feature_dim(), cfg.architecture), cfg.architecture.activation, cfg.seed);
  std::optional<RegressionHead> head;
  if (with_head) head = init_head(cfg.architecture.embed_dim);

  TrainResult result;
  try {
    result = train(std::move(net), std::move(head), ds, quads, cfg);
  } catch (const NumericFailure& e) {
    write_file_atomic(a.out_report, dump_json(to_json(e.report())));
    throw;
  }
  write_file_atomic(a.out_model, dump_json(to_json(result.net)));
  if (result.head && !a.out_head.empty()) write_file_atomic(a.out_head, dump_json(to_json(*result.head)));
  write_file_atomic(a.out_report, dump_json(to_json(result.report)));
  out << "trained " << result.report.epochs.size() << " epochs";
  if (!result.report.epochs.empty()) out << ", final triplet loss " << result.report.epochs.back().triplet_loss;
  if (result.report.collapsed) out << ", COLLAPSED at epoch " << *result.report.collapse_epoch;
  out << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RankMethod method = rank_method_from_string(a.method);
  const EmbeddingNet net = net_from_json(read_json(a.model));
  RankResult result;
  if (method == RankMethod::PairwiseDistance) {
    PairRatingDataset ds;
    ds.items = load_feature_dataset(a.dataset, a.scale, false);
    const std::vector<RatedPair> test_pairs = pairs_from_csv(read_file(a.test_split), a.test_split);
    ds.pairs = test_pairs;
    validate(ds);
    std::vector<std::string> train_refs;
    if (!a.train_split.empty()) {
      for (const auto& p : pairs_from_csv(read_file(a.train_split), a.train_split)) train_refs.push_back(p.ref_id);
    }
    result = eval_pairwise(net, ds, test_pairs, train_refs);
  } else {
    const FeatureDataset ds = load_feature_dataset(a.dataset, a.scale);
    const std::vector<std::string> test_ids = ids_from_text(read_file(a.test_split));
    std::vector<std::string> train_ids;
    if (!a.train_split.empty()) train_ids = ids_from_text(read_file(a.train_split));
    if (method == RankMethod::ReferenceImage) {
      result = eval_reference(net, ds, test_ids, train_ids);
    } else {
      if (a.head.empty()) throw InvalidConfig("--head is required with --method regression");
      const RegressionHead head = head_from_json(read_json(a.head));
      result = eval_regression(net, head, ds, test_ids, train_ids);
    }
  }
  write_file_atomic(a.out, dump_json(to_json(result)));
  out << format_rank_table({result});
  return kExitOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  if ((a.model.empty()) != (a.dataset.empty())) {
    throw InvalidConfig("--model and --dataset must be given together");
  }
  const std::vector<Quadruplet> quads = load_quadruplets(a.quads);
  const Histogram h = margin_histogram(quads, a.bins);

  std::map<HardnessClass, std::size_t> hardness;
  if (!a.model.empty()) {
    const EmbeddingNet net = net_from_json(read_json(a.model));
    const FeatureDataset ds = load_feature_dataset(a.dataset, a.scale, false);
    const IdIndex index = index_items(ds, false);
    auto embedding_of = [&](const std::string& id) {
      const auto it = index.find(id);
      if (it == index.end()) throw InvalidInput("quadruplet references unknown item '" + id + "'");
      return embed(net, ds.items[it->second].features);
    };
    for (const auto& q : quads) {
      const DenseVector ea = embedding_of(q.anchor_id);
      const double d_ap = embedding_distance(ea, embedding_of(q.positive_id));
      const double d_an = embedding_distance(ea, embedding_of(q.negative_id));
      ++hardness[classify_hardness(d_ap, d_an, q.margin)];
    }
  }
  write_file_atomic(a.out, histogram_to_csv(h));
  out << "quadruplets: " << quads.size() << "\n";
  for (const auto& [cls, count] : hardness) out << to_string(cls) << ": " << count << "\n";
  return kExitOk;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  ComparisonSettings settings = default_comparison_settings();
  if (!a.config_fixed.empty()) settings.fixed = train_config_from_json(read_json(a.config_fixed));
  if (!a.config_adaptive.empty()) settings.adaptive = train_config_from_json(read_json(a.config_adaptive));
  if (!std::holds_alternative<FixedMargin>(settings.fixed.margin_mode)) {
    throw InvalidConfig("--config-fixed must use margin_mode 'fixed'");
  }
  settings.adaptive.margin_mode = AdaptiveMargin{};
  if (a.seeds < 1) throw InvalidConfig("--seeds must be >= 1");
  settings.seeds = a.seeds;
  settings.pairs_per_anchor = a.pairs_per_anchor;
  const FeatureDataset ds = load_feature_dataset(a.dataset, a.scale);
  const ComparisonResult result = run_comparison(ds, settings);
  write_file_atomic(a.out, dump_json(to_json(result)));
  out << format_comparison_table(result);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive-margin triplet metric learning on rated data"};
  app.require_subcommand(1);

  GenDataArgs gd;
  auto* gen_data = app.add_subcommand("gen-data", "Generate a synthetic planted-score dataset");
  gen_data->add_option("--config", gd.config, "SyntheticSpec JSON")->check(CLI::ExistingFile);
  gen_data->add_option("--out", gd.out, "Items CSV")->required();
  gen_data->add_option("--seed", gd.seed, "Overrides the spec seed");
  gen_data->add_option("--pairs-out", gd.pairs_out, "Also generate reference/evaluated pairs into this CSV");
  gen_data->add_option("--refs", gd.refs, "Number of references (pairwise)")->check(CLI::PositiveNumber);
  gen_data->add_option("--evals-per-ref", gd.evals_per_ref, "Evaluated items per reference")
      ->check(CLI::Range(2, 1 << 20));
  gen_data->add_option("--split-out", gd.split_out, "Write <prefix>.train.txt and <prefix>.test.txt");
  gen_data->add_option("--test-fraction", gd.test_fraction)->check(CLI::Range(0.0, 1.0));

  GenTripletsArgs gt;
  auto* gen_triplets = app.add_subcommand("gen-triplets", "Build quadruplets with adaptive margins");
  gen_triplets->add_option("--dataset", gt.dataset, "Items CSV")->required()->check(CLI::ExistingFile);
  gen_triplets->add_option("--pairs", gt.pairs, "Pairs CSV (pairwise mode)")->check(CLI::ExistingFile);
  gen_triplets->add_option("--mode", gt.mode)->check(CLI::IsMember({"single", "pairwise"}));
  gen_triplets->add_option("--pairs-per-anchor", gt.pairs_per_anchor)->check(CLI::PositiveNumber);
  gen_triplets->add_option("--seed", gt.seed);
  gen_triplets->add_option("--scale", gt.scale, "Rating scale n")->check(CLI::Range(2, 1 << 20));
  gen_triplets->add_option("--train-ids", gt.train_ids, "Restrict to these ids")->check(CLI::ExistingFile);
  gen_triplets->add_option("--out", gt.out, "Quadruplet CSV")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an embedding network on quadruplets");
  train_cmd->add_option("--dataset", tr.dataset)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--quads", tr.quads)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", tr.config, "TrainConfig JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--out-model", tr.out_model)->required();
  train_cmd->add_option("--out-report", tr.out_report)->required();
  train_cmd->add_option("--out-head", tr.out_head, "Regression head JSON (required when beta > 0)");
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"fixed", "adaptive"}));
  train_cmd->add_option("--margin", tr.margin, "Fixed margin")->check(CLI::Range(0.0, 2.0));
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--scale", tr.scale)->check(CLI::Range(2, 1 << 20));

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Rank a held-out split and report SROCC");
  eval_cmd->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--head", ev.head)->check(CLI::ExistingFile);
  eval_cmd->add_option("--dataset", ev.dataset)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--test-split", ev.test_split, "Ids file, or pairs CSV for pairwise")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--train-split", ev.train_split, "Checked for overlap with the test split")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--method", ev.method)->check(CLI::IsMember({"reference", "regression", "pairwise"}));
  eval_cmd->add_option("--scale", ev.scale)->check(CLI::Range(2, 1 << 20));
  eval_cmd->add_option("--out", ev.out)->required();

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Margin histogram and hardness counts");
  stats_cmd->add_option("--quads", st.quads)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--bins", st.bins)->check(CLI::PositiveNumber);
  stats_cmd->add_option("--out", st.out, "Histogram CSV")->required();
  stats_cmd->add_option("--dataset", st.dataset)->check(CLI::ExistingFile);
  stats_cmd->add_option("--model", st.model)->check(CLI::ExistingFile);
  stats_cmd->add_option("--scale", st.scale)->check(CLI::Range(2, 1 << 20));

  CompareArgs cp;
  auto* compare_cmd = app.add_subcommand("compare", "Regression vs fixed vs adaptive over several seeds");
  compare_cmd->add_option("--dataset", cp.dataset)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--config-fixed", cp.config_fixed)->check(CLI::ExistingFile);
  compare_cmd->add_option("--config-adaptive", cp.config_adaptive)->check(CLI::ExistingFile);
  compare_cmd->add_option("--seeds", cp.seeds)->check(CLI::PositiveNumber);
  compare_cmd->add_option("--pairs-per-anchor", cp.pairs_per_anchor)->check(CLI::PositiveNumber);
  compare_cmd->add_option("--scale", cp.scale)->check(CLI::Range(2, 1 << 20));
  compare_cmd->add_option("--out", cp.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (gen_data->parsed()) return cmd_gen_data(gd, out);
    if (gen_triplets->parsed()) return cmd_gen_triplets(gt, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (eval_cmd->parsed()) return cmd_eval(ev, out);
    if (stats_cmd->parsed()) return cmd_stats(st, out);
    if (compare_cmd->parsed()) return cmd_compare(cp, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace amtl
