#include "amtl/compare.hpp"

#include <algorithm>
#include <cstdio>

#include "amtl/data_io.hpp"
#include "amtl/evaluation.hpp"

namespace amtl {

const char* to_string(CompareMethod m) {
  switch (m) {
    case CompareMethod::Regression:
      return "regression";
    case CompareMethod::Fixed:
      return "fixed";
    case CompareMethod::Adaptive:
      return "adaptive";
  }
  return "?";
}

ComparisonSettings default_comparison_settings() {
  ComparisonSettings s;
  s.fixed.margin_mode = FixedMargin{0.5};
  s.adaptive.margin_mode = AdaptiveMargin{};
  return s;
}

TrainConfig regression_only_config(const TrainConfig& adaptive) {
  TrainConfig cfg = adaptive;
  cfg.loss_weights = {0.0, 1.0};
  cfg.regression = RegressionKind::MAE;
  return cfg;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

MethodRun run_method(const FeatureDataset& ds, const TrainConfig& base, CompareMethod method, int seed,
                     int pairs_per_anchor, double test_fraction) {
  const auto s = static_cast<std::uint64_t>(seed);
  const auto [train_ids, test_ids] = split_ids(ds, test_fraction, s);
  const FeatureDataset train_ds = subset(ds, train_ids);
  const std::vector<Quadruplet> quads = generate_quadruplets_single(train_ds, pairs_per_anchor, s);

  TrainConfig cfg = base;
  cfg.seed = base.seed + s;
  std::vector<std::size_t> dims{ds.feature_dim()};
  dims.insert(dims.end(), cfg.architecture.hidden.begin(), cfg.architecture.hidden.end());
  dims.push_back(cfg.architecture.embed_dim);
  EmbeddingNet net = init_net(dims, cfg.architecture.activation, cfg.seed);
  std::optional<RegressionHead> head;
  if (cfg.loss_weights.beta > 0.0) head = init_head(cfg.architecture.embed_dim);

  const TrainResult trained = train(std::move(net), std::move(head), train_ds, quads, cfg);
  MethodRun run{method, seed, 0.0, std::nullopt, trained.report.collapsed, trained.report.skipped_degenerate};
  run.srocc_reference = eval_reference(trained.net, ds, test_ids, train_ids).srocc;
  if (trained.head && cfg.loss_weights.beta > 0.0) {
    run.srocc_regression = eval_regression(trained.net, *trained.head, ds, test_ids, train_ids).srocc;
  }
  return run;
}

const MethodSummary& ComparisonResult::of(CompareMethod m) const {
  for (const auto& s : summary) {
    if (s.method == m) return s;
  }
  throw InvalidInput(std::string("no summary for method ") + to_string(m));
}

ComparisonResult run_comparison(const FeatureDataset& ds, const ComparisonSettings& settings) {
  if (settings.seeds < 1) throw InvalidConfig("comparison needs at least one seed");
  TrainConfig fixed = settings.fixed;
  if (!std::holds_alternative<FixedMargin>(fixed.margin_mode)) fixed.margin_mode = FixedMargin{0.5};
  TrainConfig adaptive = settings.adaptive;
  adaptive.margin_mode = AdaptiveMargin{};
  const TrainConfig regression = regression_only_config(adaptive);

  const std::pair<CompareMethod, const TrainConfig*> plan[] = {
      {CompareMethod::Regression, &regression},
      {CompareMethod::Fixed, &fixed},
      {CompareMethod::Adaptive, &adaptive},
  };

  ComparisonResult result;
  for (const auto& [method, cfg] : plan) {
    MethodSummary summary{method, 0.0, std::nullopt, 0};
    std::vector<double> reference;
    std::vector<double> branch;
    for (int seed = 0; seed < settings.seeds; ++seed) {
      MethodRun run = run_method(ds, *cfg, method, seed, settings.pairs_per_anchor, settings.test_fraction);
      reference.push_back(run.srocc_reference);
      if (run.srocc_regression) branch.push_back(*run.srocc_regression);
      if (run.collapsed) ++summary.collapses;
      result.runs.push_back(run);
    }
    summary.median_srocc_reference = median(reference);
    if (!branch.empty()) summary.median_srocc_regression = median(branch);
    result.summary.push_back(summary);
  }
  return result;
}

nlohmann::json to_json(const ComparisonResult& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"method", to_string(run.method)},
                    {"seed", run.seed},
                    {"srocc_reference", run.srocc_reference},
                    {"srocc_regression", run.srocc_regression ? nlohmann::json(*run.srocc_regression)
                                                              : nlohmann::json(nullptr)},
                    {"collapsed", run.collapsed},
                    {"skipped_degenerate", run.skipped_degenerate}});
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : r.summary) {
    summary.push_back({{"method", to_string(s.method)},
                       {"median_srocc_reference", s.median_srocc_reference},
                       {"median_srocc_regression", s.median_srocc_regression
                                                       ? nlohmann::json(*s.median_srocc_regression)
                                                       : nlohmann::json(nullptr)},
                       {"collapses", s.collapses}});
  }
  return {{"runs", std::move(runs)}, {"summary", std::move(summary)}};
}

std::string format_comparison_table(const ComparisonResult& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-28s", "");
  out += buf;
  for (const auto& s : r.summary) {
    std::snprintf(buf, sizeof buf, "%12s", to_string(s.method));
    out += buf;
  }
  out += '\n';
  std::snprintf(buf, sizeof buf, "%-28s", "median srocc (reference)");
  out += buf;
  for (const auto& s : r.summary) {
    std::snprintf(buf, sizeof buf, "%12.4f", s.median_srocc_reference);
    out += buf;
  }
  out += '\n';
  std::snprintf(buf, sizeof buf, "%-28s", "median srocc (regression)");
  out += buf;
  for (const auto& s : r.summary) {
    if (s.median_srocc_regression) {
      std::snprintf(buf, sizeof buf, "%12.4f", *s.median_srocc_regression);
    } else {
      std::snprintf(buf, sizeof buf, "%12s", "-");
    }
    out += buf;
  }
  out += '\n';
  std::snprintf(buf, sizeof buf, "%-28s", "collapses");
  out += buf;
  for (const auto& s : r.summary) {
    std::snprintf(buf, sizeof buf, "%12d", s.collapses);
    out += buf;
  }
  out += '\n';
  return out;
}

}  // namespace amtl
