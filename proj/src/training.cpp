#include "amtl/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace amtl {

namespace {

double learning_rate(const OptimizerSpec& spec) {
  return std::visit([](const auto& s) { return s.lr; }, spec);
}

struct ResolvedQuad {
  std::size_t a;
  std::size_t p;
  std::size_t n;
  double margin;
};

std::vector<ResolvedQuad> resolve(const std::vector<Quadruplet>& quads, const IdIndex& index) {
  std::vector<ResolvedQuad> out;
  out.reserve(quads.size());
  auto lookup = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("quadruplet references unknown item '" + id + "'");
    return it->second;
  };
  for (const auto& q : quads) {
    out.push_back({lookup(q.anchor_id), lookup(q.positive_id), lookup(q.negative_id), q.margin});
  }
  return out;
}

std::vector<std::size_t> probe_indices(std::size_t n_items, std::size_t probe_size, std::uint64_t seed) {
  std::vector<std::size_t> idx(n_items);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (probe_size >= n_items) return idx;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(probe_size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

void optimizer_step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
                    const OptimizerSpec& spec) {
  if (params.size() != grads.size()) throw InvalidInput("optimizer_step: params/grads size mismatch");
  if (const auto* sgd = std::get_if<SgdSpec>(&spec)) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= sgd->lr * grads[i];
    ++state.step;
    return;
  }
  const auto& adam = std::get<AdamSpec>(spec);
  if (state.m.empty() && state.v.empty() && state.step == 0) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidInput("optimizer_step: state size mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = adam.beta1 * state.m[i] + (1.0 - adam.beta1) * g;
    state.v[i] = adam.beta2 * state.v[i] + (1.0 - adam.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= adam.lr * m_hat / (std::sqrt(v_hat) + adam.eps);
  }
}

void validate(const TrainConfig& cfg) {
  validate(cfg.loss_weights);
  const double lr = learning_rate(cfg.optimizer);
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidConfig("learning rate must be > 0");
  if (const auto* adam = std::get_if<AdamSpec>(&cfg.optimizer)) {
    if (!(adam->beta1 >= 0.0 && adam->beta1 < 1.0 && adam->beta2 >= 0.0 && adam->beta2 < 1.0)) {
      throw InvalidConfig("adam betas must lie in [0, 1)");
    }
    if (!(adam->eps > 0.0)) throw InvalidConfig("adam eps must be > 0");
  }
  if (const auto* fixed = std::get_if<FixedMargin>(&cfg.margin_mode)) {
    if (!std::isfinite(fixed->m) || fixed->m < 0.0 || fixed->m > 2.0) {
      throw InvalidConfig("fixed margin must lie in [0, 2]");
    }
  }
  if (cfg.batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (cfg.epochs < 0) throw InvalidConfig("epochs must be >= 0");
  if (!(cfg.collapse_variance_eps > 0.0)) throw InvalidConfig("collapse_variance_eps must be > 0");
  if (cfg.collapse_patience < 1) throw InvalidConfig("collapse_patience must be >= 1");
  if (cfg.loss_weights.beta > 0.0 && !cfg.regression) {
    throw InvalidConfig("beta > 0 requires a regression kind");
  }
  if (cfg.architecture.embed_dim == 0) throw InvalidConfig("embed_dim must be positive");
}

double RegressionHead::predict(std::span<const double> embedding) const {
  if (embedding.size() != w.size()) throw InvalidInput("regression head: dimension mismatch");
  double acc = b;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * embedding[i];
  return acc;
}

RegressionHead init_head(std::size_t embed_dim) {
  return RegressionHead{DenseVector(embed_dim, 0.0), 0.0};
}

double mean_coordinate_variance(const std::vector<DenseVector>& embeddings) {
  if (embeddings.empty()) throw InvalidInput("variance of an empty embedding list");
  const std::size_t dim = embeddings.front().size();
  if (dim == 0) return 0.0;
  const double count = static_cast<double>(embeddings.size());
  double total = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (const auto& e : embeddings) mean += e[c];
    mean /= count;
    double var = 0.0;
    for (const auto& e : embeddings) var += (e[c] - mean) * (e[c] - mean);
    total += var / count;
  }
  return total / static_cast<double>(dim);
}

bool detect_collapse(const std::vector<DenseVector>& embeddings, double eps) {
  for (const auto& e : embeddings) {
    if (e.size() != embeddings.front().size()) throw InvalidInput("detect_collapse: mixed dimensions");
  }
  return mean_coordinate_variance(embeddings) < eps;
}

QuadrupletTerms accumulate_quadruplet(const EmbeddingNet& net, const RegressionHead* head,
                                      const ForwardTrace& anchor, const ForwardTrace& positive,
                                      const ForwardTrace& negative, double margin, double target,
                                      const LossWeights& w, std::optional<RegressionKind> kind,
                                      GradientBundle& acc, std::span<double> head_grad) {
  const bool use_regression = w.beta > 0.0;
  if (use_regression && (!head || !kind || head_grad.size() != head->w.size() + 1)) {
    throw InvalidInput("accumulate_quadruplet: regression term needs a head, a kind and a gradient slot");
  }
  QuadrupletTerms terms;
  TripletGrads tg;
  if (w.alpha > 0.0) {
    tg = triplet_loss_grads(anchor.embedding, positive.embedding, negative.embedding, margin);
  } else {
    tg.d_ap = embedding_distance(anchor.embedding, positive.embedding);
    tg.d_an = embedding_distance(anchor.embedding, negative.embedding);
    tg.loss = triplet_loss(tg.d_ap, tg.d_an, margin);
  }
  terms.triplet_loss = tg.loss;
  terms.active = tg.active();

  RegressionLoss rl;
  if (use_regression) rl = regression_loss(head->predict(anchor.embedding), target, *kind);
  terms.regression_loss = rl.loss;

  const bool triplet_grad = w.alpha > 0.0 && tg.active();
  const bool regression_grad = use_regression && rl.dpred != 0.0;
  if (!triplet_grad && !regression_grad) return terms;

  DenseVector up_anchor(net.embed_dim(), 0.0);
  if (triplet_grad) {
    for (std::size_t i = 0; i < up_anchor.size(); ++i) up_anchor[i] = w.alpha * tg.g_anchor[i];
  }
  if (regression_grad) {
    const double g = w.beta * rl.dpred;
    for (std::size_t i = 0; i < up_anchor.size(); ++i) {
      up_anchor[i] += g * head->w[i];
      head_grad[i] += g * anchor.embedding[i];
    }
    head_grad.back() += g;
  }
  backward_into(net, anchor, up_anchor, acc);
  if (triplet_grad) {
    backward_into(net, positive, tg.g_positive, acc, w.alpha);
    backward_into(net, negative, tg.g_negative, acc, w.alpha);
  }
  return terms;
}

TrainResult train(EmbeddingNet net, std::optional<RegressionHead> head, const FeatureDataset& ds,
                  const std::vector<Quadruplet>& quads, const TrainConfig& cfg) {
  validate(cfg);
  validate(net);
  const LossWeights w = cfg.loss_weights;
  const bool use_regression = w.beta > 0.0;
  if (use_regression && !head) throw InvalidConfig("beta > 0 requires a regression head");
  if (head && head->w.size() != net.embed_dim()) throw InvalidInput("regression head dimension != embed_dim");

  const IdIndex index = index_items(ds, use_regression);
  if (!ds.items.empty() && ds.feature_dim() != net.in_dim()) {
    throw InvalidInput("dataset feature dimension does not match network in_dim");
  }
  const std::vector<ResolvedQuad> resolved = resolve(quads, index);

  TrainResult result{std::move(net), std::move(head), {}};
  EmbeddingNet& model = result.net;
  TrainReport& report = result.report;
  if (cfg.epochs == 0 || ds.items.empty()) return result;

  std::vector<double> targets;
  if (use_regression) {
    targets.reserve(ds.items.size());
    for (const auto& item : ds.items) targets.push_back(normalize_mos(item.mos, ds.scale_n));
  }

  const std::size_t net_params = model.num_params();
  const std::size_t head_params = use_regression ? result.head->w.size() + 1 : 0;
  std::vector<double> params(net_params + head_params);
  std::vector<double> grads(params.size());
  OptimizerState opt_state;
  std::vector<double> head_grad(head_params, 0.0);

  const std::vector<std::size_t> probe = probe_indices(ds.items.size(), cfg.probe_size, cfg.seed);
  std::vector<std::size_t> order(resolved.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  int collapse_streak = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double sum_triplet = 0.0;
    double sum_regression = 0.0;
    std::size_t n_active = 0;
    std::size_t n_used = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      GradientBundle acc = GradientBundle::zeros_like(model);
      std::fill(head_grad.begin(), head_grad.end(), 0.0);
      std::size_t batch_used = 0;

      for (std::size_t k = start; k < stop; ++k) {
        const ResolvedQuad& q = resolved[order[k]];
        const ForwardTrace ta = trace_forward(model, ds.items[q.a].features);
        const ForwardTrace tp = trace_forward(model, ds.items[q.p].features);
        const ForwardTrace tn = trace_forward(model, ds.items[q.n].features);
        for (const ForwardTrace* t : {&ta, &tp, &tn}) {
          if (!std::all_of(t->embedding.begin(), t->embedding.end(), [](double v) { return std::isfinite(v); })) {
            throw NumericFailure("non-finite embedding in epoch " + std::to_string(epoch), report);
          }
        }
        const double m = resolve_margin(cfg.margin_mode, q.margin);
        QuadrupletTerms terms;
        try {
          terms = accumulate_quadruplet(model, use_regression ? &*result.head : nullptr, ta, tp, tn, m,
                                        use_regression ? targets[q.a] : 0.0, w, cfg.regression, acc, head_grad);
        } catch (const DegeneratePair&) {
          ++report.skipped_degenerate;
          continue;
        }
        if (!std::isfinite(terms.triplet_loss) || !std::isfinite(terms.regression_loss)) {
          throw NumericFailure("non-finite loss in epoch " + std::to_string(epoch), report);
        }
        sum_triplet += terms.triplet_loss;
        sum_regression += terms.regression_loss;
        ++batch_used;
        if (terms.active) ++n_active;
      }

      n_used += batch_used;
      if (batch_used == 0) continue;
      const double inv = 1.0 / static_cast<double>(batch_used);
      const std::vector<double> net_grads = flatten(acc);
      const std::vector<double> net_values = flatten(model);
      std::copy(net_values.begin(), net_values.end(), params.begin());
      for (std::size_t i = 0; i < net_params; ++i) grads[i] = net_grads[i] * inv;
      if (use_regression) {
        std::copy(result.head->w.begin(), result.head->w.end(), params.begin() + net_params);
        params.back() = result.head->b;
        for (std::size_t i = 0; i < head_params; ++i) grads[net_params + i] = head_grad[i] * inv;
      }
      optimizer_step(params, grads, opt_state, cfg.optimizer);
      unflatten(std::span<const double>(params).first(net_params), model);
      if (use_regression) {
        std::copy_n(params.begin() + net_params, result.head->w.size(), result.head->w.begin());
        result.head->b = params.back();
      }
    }

    EpochStats stats;
    if (n_used > 0) {
      stats.triplet_loss = sum_triplet / static_cast<double>(n_used);
      stats.regression_loss = sum_regression / static_cast<double>(n_used);
      stats.active_fraction = static_cast<double>(n_active) / static_cast<double>(n_used);
    }
    std::vector<DenseVector> probe_embeddings;
    probe_embeddings.reserve(probe.size());
    for (std::size_t i : probe) probe_embeddings.push_back(embed(model, ds.items[i].features));
    stats.probe_variance = mean_coordinate_variance(probe_embeddings);
    if (!std::isfinite(stats.probe_variance)) {
      throw NumericFailure("non-finite embeddings after epoch " + std::to_string(epoch), report);
    }
    report.epochs.push_back(stats);

    collapse_streak = stats.probe_variance < cfg.collapse_variance_eps ? collapse_streak + 1 : 0;
    if (collapse_streak >= cfg.collapse_patience) {
      report.collapsed = true;
      report.collapse_epoch = epoch;
      break;
    }
  }
  return result;
}

}  // namespace amtl
