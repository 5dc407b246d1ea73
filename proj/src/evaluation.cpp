#include "amtl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "amtl/errors.hpp"

namespace amtl {

namespace {

void require_disjoint(const std::vector<std::string>& test_ids, std::span<const std::string> training) {
  if (training.empty()) return;
  const std::unordered_set<std::string> train_set(training.begin(), training.end());
  for (const auto& id : test_ids) {
    if (train_set.contains(id)) throw InvalidInput("test item '" + id + "' is also a training item");
  }
}

std::vector<std::size_t> resolve_ids(const IdIndex& index, const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("unknown test item '" + id + "'");
    if (!seen.insert(id).second) throw InvalidInput("duplicate test item '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

// Avoids reporting -0 after sign flips.
double clean(double v) {
  return v == 0.0 ? 0.0 : v;
}

}  // namespace

std::string_view to_string(RankMethod m) {
  switch (m) {
    case RankMethod::PairwiseDistance:
      return "pairwise";
    case RankMethod::ReferenceImage:
      return "reference";
    case RankMethod::RegressionBranch:
      return "regression";
  }
  return "?";
}

RankMethod rank_method_from_string(std::string_view s) {
  if (s == "pairwise") return RankMethod::PairwiseDistance;
  if (s == "reference") return RankMethod::ReferenceImage;
  if (s == "regression") return RankMethod::RegressionBranch;
  throw InvalidInput("unknown evaluation method '" + std::string(s) + "'");
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) hold ranks i+1..j; their mean is (i+1+j)/2.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double srocc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("srocc: length mismatch");
  if (x.size() < 2) throw InvalidInput("srocc: need at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidInput("srocc: non-finite value");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  // Mean rank is (n + 1) / 2 regardless of ties.
  const double mean = 0.5 * (n + 1.0);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

RankResult eval_pairwise(const EmbeddingNet& net, const PairRatingDataset& ds,
                         const std::vector<RatedPair>& test_pairs,
                         std::span<const std::string> training_refs) {
  const IdIndex index = index_items(ds.items, false);
  const std::unordered_set<std::string> train_refs(training_refs.begin(), training_refs.end());
  std::vector<double> predicted;
  std::vector<double> truth;
  predicted.reserve(test_pairs.size());
  truth.reserve(test_pairs.size());
  for (const auto& p : test_pairs) {
    const auto ref = index.find(p.ref_id);
    const auto ev = index.find(p.eval_id);
    if (ref == index.end() || ev == index.end()) {
      throw InvalidInput("test pair (" + p.ref_id + ", " + p.eval_id + ") references an unknown item");
    }
    if (train_refs.contains(p.ref_id)) {
      throw InvalidInput("test reference '" + p.ref_id + "' was used for training");
    }
    const DenseVector er = embed(net, ds.items.items[ref->second].features);
    const DenseVector ee = embed(net, ds.items.items[ev->second].features);
    predicted.push_back(embedding_distance(er, ee));
    truth.push_back(similarity_to_distance(p.similarity, ds.scale_n()));
  }
  return {srocc(predicted, truth), test_pairs.size(), RankMethod::PairwiseDistance};
}

RankResult eval_reference(const EmbeddingNet& net, const FeatureDataset& ds,
                          const std::vector<std::string>& test_ids,
                          std::span<const std::string> training_ids) {
  if (test_ids.size() < 3) {
    throw InvalidInput("reference evaluation needs at least 3 test items (reference + 2 ranked)");
  }
  require_disjoint(test_ids, training_ids);
  const IdIndex index = index_items(ds);
  const std::vector<std::size_t> items = resolve_ids(index, test_ids);

  std::size_t ref = items.front();
  for (std::size_t i : items) {
    const auto& cand = ds.items[i];
    const auto& best = ds.items[ref];
    if (cand.mos > best.mos || (cand.mos == best.mos && cand.id < best.id)) ref = i;
  }
  const DenseVector ref_embedding = embed(net, ds.items[ref].features);
  std::vector<double> distances;
  std::vector<double> mos;
  for (std::size_t i : items) {
    if (i == ref) continue;
    distances.push_back(embedding_distance(embed(net, ds.items[i].features), ref_embedding));
    mos.push_back(ds.items[i].mos);
  }
  return {clean(-srocc(distances, mos)), distances.size(), RankMethod::ReferenceImage};
}

RankResult eval_regression(const EmbeddingNet& net, const RegressionHead& head,
                           const FeatureDataset& ds, const std::vector<std::string>& test_ids,
                           std::span<const std::string> training_ids) {
  if (test_ids.size() < 2) throw InvalidInput("regression evaluation needs at least 2 test items");
  require_disjoint(test_ids, training_ids);
  const IdIndex index = index_items(ds);
  const std::vector<std::size_t> items = resolve_ids(index, test_ids);
  std::vector<double> predicted;
  std::vector<double> mos;
  for (std::size_t i : items) {
    predicted.push_back(head.predict(embed(net, ds.items[i].features)));
    mos.push_back(ds.items[i].mos);
  }
  return {srocc(predicted, mos), items.size(), RankMethod::RegressionBranch};
}

}  // namespace amtl
