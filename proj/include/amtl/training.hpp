#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "amtl/embed_net.hpp"
#include "amtl/errors.hpp"
#include "amtl/losses.hpp"
#include "amtl/sampling.hpp"

namespace amtl {

struct SgdSpec {
  double lr = 0.01;
  bool operator==(const SgdSpec&) const = default;
};

struct AdamSpec {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamSpec&) const = default;
};

using OptimizerSpec = std::variant<SgdSpec, AdamSpec>;

// Moments and step count of Adam; unused by SGD. Sized on the first step.
struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

void optimizer_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                    const OptimizerSpec& spec);

// Shape of the network the CLI builds before training.
struct ArchitectureSpec {
  std::vector<std::size_t> hidden{32};
  std::size_t embed_dim = 16;
  Activation activation = Activation::Relu;
  bool operator==(const ArchitectureSpec&) const = default;
};

struct TrainConfig {
  MarginMode margin_mode = AdaptiveMargin{};
  LossWeights loss_weights{1.0, 0.0};
  std::optional<RegressionKind> regression;
  OptimizerSpec optimizer = AdamSpec{};
  int batch_size = 32;
  int epochs = 20;
  std::uint64_t seed = 0;
  bool shuffle = true;
  double collapse_variance_eps = 1e-6;
  int collapse_patience = 3;
  std::size_t probe_size = 256;
  ArchitectureSpec architecture;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);

// g(e) = w . e + b, trained against MOS rescaled to [0, 1].
struct RegressionHead {
  DenseVector w;
  double b = 0.0;

  double predict(std::span<const double> embedding) const;
  bool operator==(const RegressionHead&) const = default;
};

RegressionHead init_head(std::size_t embed_dim);

struct QuadrupletTerms {
  double triplet_loss = 0.0;
  double regression_loss = 0.0;
  bool active = false;
};

// Adds the gradient of alpha * triplet + beta * regression for one quadruplet
// into `acc` (network) and `head_grad` (w then b; empty when beta == 0).
// The regression term acts on the anchor only. Throws DegeneratePair.
QuadrupletTerms accumulate_quadruplet(const EmbeddingNet& net, const RegressionHead* head,
                                      const ForwardTrace& anchor, const ForwardTrace& positive,
                                      const ForwardTrace& negative, double margin, double target,
                                      const LossWeights& w, std::optional<RegressionKind> kind,
                                      GradientBundle& acc, std::span<double> head_grad);

struct EpochStats {
  double triplet_loss = 0.0;
  double regression_loss = 0.0;
  double active_fraction = 0.0;
  double probe_variance = 0.0;
  bool operator==(const EpochStats&) const = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  bool collapsed = false;
  std::optional<int> collapse_epoch;  // 0-based epoch at which training stopped
  std::size_t skipped_degenerate = 0;
  bool operator==(const TrainReport&) const = default;
};

// Thrown when a loss turns non-finite; carries the epochs completed so far.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, TrainReport partial)
      : Error(what), report_(std::move(partial)) {}
  const TrainReport& report() const noexcept { return report_; }

 private:
  TrainReport report_;
};

struct TrainResult {
  EmbeddingNet net;
  std::optional<RegressionHead> head;
  TrainReport report;
};

// Mini-batch training on quadruplets. Gradients are batch means; margins are
// constants. Quadruplets whose embeddings coincide under an active hinge are
// skipped and counted. Stops early once the probe embeddings have collapsed
// for `collapse_patience` consecutive epochs.
TrainResult train(EmbeddingNet net, std::optional<RegressionHead> head, const FeatureDataset& ds,
                  const std::vector<Quadruplet>& quads, const TrainConfig& cfg);

// Mean over coordinates of the population variance across the list.
double mean_coordinate_variance(const std::vector<DenseVector>& embeddings);

bool detect_collapse(const std::vector<DenseVector>& embeddings, double eps);

}  // namespace amtl
