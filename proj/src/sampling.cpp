#include "amtl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "amtl/errors.hpp"

namespace amtl {

namespace {

void check_scale(int scale_n) {
  if (scale_n < 2) throw InvalidInput("rating scale n must be >= 2");
}

}  // namespace

IdIndex index_items(const FeatureDataset& ds, bool require_mos) {
  check_scale(ds.scale_n);
  IdIndex index;
  index.reserve(ds.items.size());
  const std::size_t dim = ds.feature_dim();
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& item = ds.items[i];
    if (!index.emplace(item.id, i).second) throw InvalidInput("duplicate item id '" + item.id + "'");
    if (item.features.size() != dim) {
      throw InvalidInput("item '" + item.id + "': feature dimension differs from the first item");
    }
    for (double f : item.features) {
      if (!std::isfinite(f)) throw InvalidInput("item '" + item.id + "': non-finite feature");
    }
    if (!std::isfinite(item.mos)) throw InvalidInput("item '" + item.id + "': non-finite mos");
    if (require_mos && (item.mos < 1.0 || item.mos > ds.scale_n)) {
      throw InvalidInput("item '" + item.id + "': mos outside [1, " + std::to_string(ds.scale_n) + "]");
    }
  }
  return index;
}

IdIndex validate(const PairRatingDataset& ds) {
  IdIndex index = index_items(ds.items, false);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : ds.pairs) {
    if (!index.contains(p.ref_id)) throw InvalidInput("pair references unknown item '" + p.ref_id + "'");
    if (!index.contains(p.eval_id)) throw InvalidInput("pair references unknown item '" + p.eval_id + "'");
    if (!seen.emplace(p.ref_id, p.eval_id).second) {
      throw InvalidInput("duplicate pair (" + p.ref_id + ", " + p.eval_id + ")");
    }
    if (!std::isfinite(p.similarity) || p.similarity < 1.0 || p.similarity > ds.scale_n()) {
      throw InvalidInput("pair (" + p.ref_id + ", " + p.eval_id + "): similarity outside scale");
    }
  }
  return index;
}

const char* to_string(HardnessClass h) {
  switch (h) {
    case HardnessClass::Hard:
      return "hard";
    case HardnessClass::SemiHard:
      return "semi-hard";
    case HardnessClass::Easy:
      return "easy";
  }
  return "?";
}

double adaptive_margin(double d_gt_ap, double d_gt_an, int scale_n) {
  check_scale(scale_n);
  const double span = static_cast<double>(scale_n - 1);
  if (!(d_gt_ap >= 0.0 && d_gt_ap <= span && d_gt_an >= 0.0 && d_gt_an <= span)) {
    throw InvalidInput("adaptive_margin: ground-truth distance outside [0, n-1]");
  }
  return std::fabs(d_gt_ap - d_gt_an) / span;
}

double similarity_to_distance(double s, int scale_n) {
  check_scale(scale_n);
  if (!(s >= 1.0 && s <= scale_n)) throw InvalidInput("similarity outside [1, n]");
  return (scale_n - s) / static_cast<double>(scale_n - 1);
}

double normalize_mos(double mos, int scale_n) {
  check_scale(scale_n);
  return (mos - 1.0) / static_cast<double>(scale_n - 1);
}

std::vector<Quadruplet> generate_quadruplets_single(const FeatureDataset& ds, int pairs_per_anchor,
                                                    std::uint64_t seed) {
  index_items(ds);
  const std::size_t n = ds.items.size();
  if (n < 3) throw InvalidConfig("single-image generation needs at least 3 items");
  if (pairs_per_anchor < 1) throw InvalidConfig("pairs_per_anchor must be >= 1");
  const std::size_t draws = 2 * static_cast<std::size_t>(pairs_per_anchor);
  if (draws > n - 1) {
    throw InvalidConfig("pairs_per_anchor=" + std::to_string(pairs_per_anchor) + " needs " +
                        std::to_string(draws) + " distinct partners but only " +
                        std::to_string(n - 1) + " exist");
  }

  std::mt19937_64 rng(seed);
  // Persistent pool permuted in place; `where` tracks each item's slot so the
  // anchor can be parked in the last slot before drawing.
  std::vector<std::size_t> pool(n);
  std::vector<std::size_t> where(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = where[i] = i;
  auto swap_slots = [&](std::size_t a, std::size_t b) {
    std::swap(pool[a], pool[b]);
    where[pool[a]] = a;
    where[pool[b]] = b;
  };

  std::vector<Quadruplet> out;
  out.reserve(n * static_cast<std::size_t>(pairs_per_anchor));
  const int scale = ds.scale_n;
  for (std::size_t a = 0; a < n; ++a) {
    swap_slots(where[a], n - 1);
    for (std::size_t j = 0; j < draws; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, n - 2);
      swap_slots(j, pick(rng));
    }
    const RatedItem& anchor = ds.items[a];
    for (std::size_t j = 0; j < draws; j += 2) {
      const RatedItem* x = &ds.items[pool[j]];
      const RatedItem* y = &ds.items[pool[j + 1]];
      double dx = std::fabs(anchor.mos - x->mos);
      double dy = std::fabs(anchor.mos - y->mos);
      if (dy < dx) {
        std::swap(x, y);
        std::swap(dx, dy);
      }
      out.push_back({anchor.id, x->id, y->id, adaptive_margin(dx, dy, scale)});
    }
  }
  return out;
}

PairwiseQuadruplets generate_quadruplets_pairwise(const PairRatingDataset& ds) {
  validate(ds);
  std::map<std::string, std::vector<const RatedPair*>> by_ref;
  for (const auto& p : ds.pairs) by_ref[p.ref_id].push_back(&p);

  PairwiseQuadruplets result;
  for (auto& [ref, pairs] : by_ref) {
    if (pairs.size() < 2) {
      ++result.refs_skipped;
      continue;
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const RatedPair* a, const RatedPair* b) { return a->eval_id < b->eval_id; });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      for (std::size_t j = i + 1; j < pairs.size(); ++j) {
        const RatedPair* p = pairs[i];
        const RatedPair* q = pairs[j];
        if (p->similarity == q->similarity) {
          ++result.ties_skipped;
          continue;
        }
        if (q->similarity > p->similarity) std::swap(p, q);
        const double d_pos = similarity_to_distance(p->similarity, ds.scale_n());
        const double d_neg = similarity_to_distance(q->similarity, ds.scale_n());
        result.quads.push_back({ref, p->eval_id, q->eval_id, std::fabs(d_pos - d_neg)});
      }
    }
  }
  return result;
}

HardnessClass classify_hardness(double d_ap, double d_an, double m) {
  if (d_an < d_ap) return HardnessClass::Hard;
  if (d_an < d_ap + m) return HardnessClass::SemiHard;
  return HardnessClass::Easy;
}

Histogram margin_histogram(const std::vector<Quadruplet>& quads, int bins) {
  if (bins < 1) throw InvalidInput("histogram needs at least one bin");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = static_cast<double>(i) / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const auto& q : quads) {
    // Index of the last edge <= margin, clamped into [0, bins - 1].
    const auto it = std::upper_bound(h.edges.begin(), h.edges.end() - 1, q.margin);
    std::ptrdiff_t bin = (it - h.edges.begin()) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

}  // namespace amtl
