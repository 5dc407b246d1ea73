#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amtl/embed_net.hpp"
#include "amtl/sampling.hpp"
#include "amtl/training.hpp"

namespace amtl {

enum class RankMethod { PairwiseDistance, ReferenceImage, RegressionBranch };

std::string_view to_string(RankMethod m);
RankMethod rank_method_from_string(std::string_view s);

// `srocc` is oriented so that a better-than-random model scores positive.
struct RankResult {
  double srocc = 0.0;
  std::size_t n = 0;
  RankMethod method = RankMethod::ReferenceImage;
};

// Fractional ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation as the Pearson correlation of average ranks.
// Returns 0 when either input has no rank variance.
double srocc(std::span<const double> x, std::span<const double> y);

// Correlates embedding distance of each test pair with its ground-truth
// distance. Pairs whose reference appears in `training_refs` are rejected.
RankResult eval_pairwise(const EmbeddingNet& net, const PairRatingDataset& ds,
                         const std::vector<RatedPair>& test_pairs,
                         std::span<const std::string> training_refs = {});

// The test item with the highest MOS (ties: smallest id) is the reference;
// the others are ranked by their embedding distance to it.
RankResult eval_reference(const EmbeddingNet& net, const FeatureDataset& ds,
                          const std::vector<std::string>& test_ids,
                          std::span<const std::string> training_ids = {});

RankResult eval_regression(const EmbeddingNet& net, const RegressionHead& head,
                           const FeatureDataset& ds, const std::vector<std::string>& test_ids,
                           std::span<const std::string> training_ids = {});

}  // namespace amtl
