#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "amtl/embed_net.hpp"

namespace amtl {

struct RatedItem {
  std::string id;
  DenseVector features;
  double mos = 0.0;

  bool operator==(const RatedItem&) const = default;
};

// Items rated individually on the scale [1, scale_n].
struct FeatureDataset {
  std::vector<RatedItem> items;
  int scale_n = 5;

  std::size_t feature_dim() const { return items.empty() ? 0 : items.front().features.size(); }
  bool operator==(const FeatureDataset&) const = default;
};

using IdIndex = std::unordered_map<std::string, std::size_t>;

// Checks unique ids, a shared feature dimension, finite values and, when
// `require_mos` is set, MOS inside [1, scale_n]. Returns id -> position.
IdIndex index_items(const FeatureDataset& ds, bool require_mos = true);

struct RatedPair {
  std::string ref_id;
  std::string eval_id;
  double similarity = 0.0;

  bool operator==(const RatedPair&) const = default;
};

// Reference/evaluated pairs with crowd similarity on [1, scale_n]. The MOS of
// `items` is not used for triplet generation.
struct PairRatingDataset {
  FeatureDataset items;
  std::vector<RatedPair> pairs;

  int scale_n() const { return items.scale_n; }
  bool operator==(const PairRatingDataset&) const = default;
};

IdIndex validate(const PairRatingDataset& ds);

struct Quadruplet {
  std::string anchor_id;
  std::string positive_id;
  std::string negative_id;
  double margin = 0.0;

  bool operator==(const Quadruplet&) const = default;
};

enum class HardnessClass { Hard, SemiHard, Easy };

const char* to_string(HardnessClass h);

// |d_gt_ap - d_gt_an| / (n - 1); both distances must lie in [0, n - 1].
double adaptive_margin(double d_gt_ap, double d_gt_an, int scale_n);

// (n - s) / (n - 1): similarity n maps to distance 0, similarity 1 to 1.
double similarity_to_distance(double s, int scale_n);

// (mos - 1) / (n - 1), the regression target in [0, 1].
double normalize_mos(double mos, int scale_n);

// Every item is an anchor. Per anchor, 2 * pairs_per_anchor distinct other
// items are drawn without replacement and consumed in consecutive pairs; the
// one closer to the anchor in MOS becomes the positive (ties: first drawn).
std::vector<Quadruplet> generate_quadruplets_single(const FeatureDataset& ds, int pairs_per_anchor,
                                                    std::uint64_t seed);

struct PairwiseQuadruplets {
  std::vector<Quadruplet> quads;
  std::size_t ties_skipped = 0;
  std::size_t refs_skipped = 0;  // references with fewer than two rated pairs
};

// For each reference (in id order) and each unordered pair of its evaluated
// images (in id order), the more similar image becomes the positive. Equal
// similarities are skipped. Margins are |d(r, p) - d(r, n)| on the [0, 1]
// distance scale.
PairwiseQuadruplets generate_quadruplets_pairwise(const PairRatingDataset& ds);

// Hard: d_an < d_ap. SemiHard: d_ap <= d_an < d_ap + m. Easy otherwise.
HardnessClass classify_hardness(double d_ap, double d_an, double m);

struct Histogram {
  std::vector<double> edges;  // bins + 1 uniform edges over [0, 1]
  std::vector<std::size_t> counts;
};

// Bins are [lo, hi) except the last, which is closed on the right.
Histogram margin_histogram(const std::vector<Quadruplet>& quads, int bins);

}  // namespace amtl
