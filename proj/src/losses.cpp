#include "amtl/losses.hpp"

#include <cmath>

#include "amtl/errors.hpp"

namespace amtl {

namespace {
constexpr double kDegenerateDistance = 1e-12;
}

double resolve_margin(const MarginMode& mode, double stored_margin) {
  if (const auto* fixed = std::get_if<FixedMargin>(&mode)) return fixed->m;
  return stored_margin;
}

void validate(const LossWeights& w) {
  if (!std::isfinite(w.alpha) || !std::isfinite(w.beta) || w.alpha < 0.0 || w.beta < 0.0) {
    throw InvalidConfig("loss weights must be finite and nonnegative");
  }
  if (w.alpha + w.beta <= 0.0) throw InvalidConfig("loss weights: alpha + beta must be > 0");
}

double triplet_loss(double d_ap, double d_an, double m) {
  if (!std::isfinite(d_ap) || !std::isfinite(d_an) || !std::isfinite(m)) {
    throw InvalidInput("triplet_loss: non-finite input");
  }
  if (d_ap < 0.0 || d_an < 0.0) throw InvalidInput("triplet_loss: negative distance");
  if (m < 0.0) throw InvalidInput("triplet_loss: negative margin");
  const double v = d_ap - d_an + m;
  return v > 0.0 ? v : 0.0;
}

TripletGrads triplet_loss_grads(std::span<const double> anchor, std::span<const double> positive,
                                std::span<const double> negative, double m) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw InvalidInput("triplet_loss_grads: dimension mismatch");
  }
  const std::size_t d = anchor.size();
  TripletGrads out;
  out.d_ap = embedding_distance(anchor, positive);
  out.d_an = embedding_distance(anchor, negative);
  out.loss = triplet_loss(out.d_ap, out.d_an, m);
  out.g_anchor.assign(d, 0.0);
  out.g_positive.assign(d, 0.0);
  out.g_negative.assign(d, 0.0);
  if (!out.active()) return out;

  if (out.d_ap < kDegenerateDistance || out.d_an < kDegenerateDistance) {
    throw DegeneratePair("triplet_loss_grads: coincident embeddings under an active hinge");
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double u_ap = (anchor[i] - positive[i]) / out.d_ap;
    const double u_an = (anchor[i] - negative[i]) / out.d_an;
    out.g_anchor[i] = u_ap - u_an;
    out.g_positive[i] = -u_ap;
    out.g_negative[i] = u_an;
  }
  return out;
}

RegressionLoss regression_loss(double pred, double mos, RegressionKind kind) {
  const double r = pred - mos;
  if (kind == RegressionKind::MAE) {
    const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    return {std::fabs(r), sign};
  }
  return {r * r, 2.0 * r};
}

double combined_loss(double triplet, double regression, const LossWeights& w) {
  return w.alpha * triplet + w.beta * regression;
}

}  // namespace amtl
