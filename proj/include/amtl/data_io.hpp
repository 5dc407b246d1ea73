#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "amtl/embed_net.hpp"
#include "amtl/evaluation.hpp"
#include "amtl/sampling.hpp"
#include "amtl/training.hpp"

namespace amtl {

// Planted-score generator settings. A latent z ~ U[0, 1] per item drives both
// its rating and its features.
struct SyntheticSpec {
  int n_items = 2000;
  int feature_dim = 8;
  int scale_n = 5;
  double noise_sigma = 0.25;          // rating units
  double feature_noise_sigma = 0.05;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

void validate(const SyntheticSpec& spec);

struct SyntheticData {
  FeatureDataset dataset;
  std::vector<double> latent;  // z per item, aligned with dataset.items
};

// mos = clamp(1 + z (n - 1) + N(0, noise_sigma), 1, n);
// features = R (z, z^2, sin 2 pi z) + N(0, feature_noise_sigma), R seeded.
SyntheticData generate_synthetic_with_latent(const SyntheticSpec& spec);
FeatureDataset generate_synthetic(const SyntheticSpec& spec);

// Reference k is item k * (evals_per_ref + 1); its evaluated items follow it.
// similarity = clamp(n - |z_r - z_e| (n - 1) + N(0, noise_sigma), 1, n).
PairRatingDataset generate_synthetic_pairwise(const SyntheticSpec& spec, int refs, int evals_per_ref);

// Seeded split into (train ids, test ids); test gets round(fraction * n).
std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(const FeatureDataset& ds,
                                                                        double test_fraction,
                                                                        std::uint64_t seed);

FeatureDataset subset(const FeatureDataset& ds, const std::vector<std::string>& ids);

// ---- CSV ----------------------------------------------------------------

// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

std::string feature_dataset_to_csv(const FeatureDataset& ds);
// `require_mos` enforces mos in [1, scale_n]; pair-dataset item files may
// carry 0 instead.
FeatureDataset feature_dataset_from_csv(const std::string& text, int scale_n, bool require_mos = true,
                                        const std::string& source = "<items>");

std::string pairs_to_csv(const std::vector<RatedPair>& pairs);
std::vector<RatedPair> pairs_from_csv(const std::string& text, const std::string& source = "<pairs>");

std::string quadruplets_to_csv(const std::vector<Quadruplet>& quads);
std::vector<Quadruplet> quadruplets_from_csv(const std::string& text,
                                             const std::string& source = "<quadruplets>");

std::string histogram_to_csv(const Histogram& h);

std::string ids_to_text(const std::vector<std::string>& ids);
std::vector<std::string> ids_from_text(const std::string& text);

// ---- JSON ---------------------------------------------------------------

nlohmann::json to_json(const EmbeddingNet& net);
EmbeddingNet net_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RegressionHead& head);
RegressionHead head_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
// Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainReport& report);
TrainReport train_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RankResult& r);

nlohmann::json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

std::string format_rank_table(const std::vector<RankResult>& results);

// ---- files --------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json(const std::filesystem::path& path);
std::string dump_json(const nlohmann::json& j);

FeatureDataset load_feature_dataset(const std::filesystem::path& path, int scale_n, bool require_mos = true);
void save_feature_dataset(const std::filesystem::path& path, const FeatureDataset& ds);
PairRatingDataset load_pair_dataset(const std::filesystem::path& items, const std::filesystem::path& pairs,
                                    int scale_n);
std::vector<Quadruplet> load_quadruplets(const std::filesystem::path& path);
void save_quadruplets(const std::filesystem::path& path, const std::vector<Quadruplet>& quads);

}  // namespace amtl
