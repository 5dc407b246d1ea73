#pragma once

#include <span>
#include <variant>

#include "amtl/embed_net.hpp"

namespace amtl {

struct FixedMargin {
  double m = 0.5;
  bool operator==(const FixedMargin&) const = default;
};

// The margin is taken from each quadruplet.
struct AdaptiveMargin {
  bool operator==(const AdaptiveMargin&) const = default;
};

using MarginMode = std::variant<FixedMargin, AdaptiveMargin>;

// Margin used for one quadruplet under `mode`.
double resolve_margin(const MarginMode& mode, double stored_margin);

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.0;
  bool operator==(const LossWeights&) const = default;
};

void validate(const LossWeights& w);

enum class RegressionKind { MAE, MSE };

// max(d_ap - d_an + m, 0)
double triplet_loss(double d_ap, double d_an, double m);

struct TripletGrads {
  double loss = 0.0;
  double d_ap = 0.0;
  double d_an = 0.0;
  DenseVector g_anchor;
  DenseVector g_positive;
  DenseVector g_negative;

  bool active() const { return loss > 0.0; }
};

// Loss and subgradients w.r.t. the three embeddings. The margin is a constant:
// no gradient flows into it. Throws DegeneratePair when the hinge is active and
// either distance is below 1e-12.
TripletGrads triplet_loss_grads(std::span<const double> anchor, std::span<const double> positive,
                                std::span<const double> negative, double m);

struct RegressionLoss {
  double loss = 0.0;
  double dpred = 0.0;
};

RegressionLoss regression_loss(double pred, double mos, RegressionKind kind);

double combined_loss(double triplet, double regression, const LossWeights& w);

}  // namespace amtl
