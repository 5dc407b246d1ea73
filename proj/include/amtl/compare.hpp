#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amtl/sampling.hpp"
#include "amtl/training.hpp"

namespace amtl {

enum class CompareMethod { Regression, Fixed, Adaptive };

const char* to_string(CompareMethod m);

struct ComparisonSettings {
  TrainConfig fixed;     // margin mode is forced to fixed
  TrainConfig adaptive;  // margin mode is forced to adaptive
  int seeds = 5;
  int pairs_per_anchor = 10;
  double test_fraction = 0.2;
};

// Default fixed (m = 0.5) and adaptive configurations for the comparison.
ComparisonSettings default_comparison_settings();

// The regression-only baseline: the adaptive configuration with
// alpha = 0, beta = 1 and an MAE head.
TrainConfig regression_only_config(const TrainConfig& adaptive);

struct MethodRun {
  CompareMethod method;
  int seed = 0;
  double srocc_reference = 0.0;
  std::optional<double> srocc_regression;
  bool collapsed = false;
  std::size_t skipped_degenerate = 0;
};

struct MethodSummary {
  CompareMethod method;
  double median_srocc_reference = 0.0;
  std::optional<double> median_srocc_regression;
  int collapses = 0;
};

struct ComparisonResult {
  std::vector<MethodRun> runs;
  std::vector<MethodSummary> summary;  // regression, fixed, adaptive

  const MethodSummary& of(CompareMethod m) const;
};

// One run of a single configuration on a seeded 80/20 split: trains on the
// training part and evaluates on the held-out part. The split, the
// quadruplets, the network init and the batch order all derive from `seed`.
MethodRun run_method(const FeatureDataset& ds, const TrainConfig& base, CompareMethod method, int seed,
                     int pairs_per_anchor, double test_fraction);

ComparisonResult run_comparison(const FeatureDataset& ds, const ComparisonSettings& settings);

double median(std::vector<double> values);

nlohmann::json to_json(const ComparisonResult& r);
std::string format_comparison_table(const ComparisonResult& r);

}  // namespace amtl
