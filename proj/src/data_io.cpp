#include "amtl/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_set>

#include "amtl/errors.hpp"

namespace amtl {

using nlohmann::json;

void validate(const SyntheticSpec& spec) {
  if (spec.n_items < 10) throw InvalidConfig("synthetic n_items must be >= 10");
  if (spec.feature_dim < 2) throw InvalidConfig("synthetic feature_dim must be >= 2");
  if (spec.scale_n < 2) throw InvalidConfig("synthetic scale_n must be >= 2");
  if (!std::isfinite(spec.noise_sigma) || spec.noise_sigma < 0.0 || !std::isfinite(spec.feature_noise_sigma) ||
      spec.feature_noise_sigma < 0.0) {
    throw InvalidConfig("synthetic noise sigmas must be finite and nonnegative");
  }
}

namespace {

std::string item_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item%06d", i);
  return buf;
}

double gaussian(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(rng);
}

}  // namespace

SyntheticData generate_synthetic_with_latent(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix mix(static_cast<std::size_t>(spec.feature_dim), 3);
  for (double& r : mix.data) r = standard(rng);

  const double n = spec.scale_n;
  SyntheticData out;
  out.dataset.scale_n = spec.scale_n;
  out.dataset.items.reserve(static_cast<std::size_t>(spec.n_items));
  out.latent.reserve(static_cast<std::size_t>(spec.n_items));
  for (int i = 0; i < spec.n_items; ++i) {
    const double z = unit(rng);
    const double mos = std::clamp(1.0 + z * (n - 1.0) + gaussian(rng, spec.noise_sigma), 1.0, n);
    const double basis[3] = {z, z * z, std::sin(2.0 * std::numbers::pi * z)};
    DenseVector features(static_cast<std::size_t>(spec.feature_dim));
    for (std::size_t r = 0; r < features.size(); ++r) {
      features[r] = mix(r, 0) * basis[0] + mix(r, 1) * basis[1] + mix(r, 2) * basis[2] +
                    gaussian(rng, spec.feature_noise_sigma);
    }
    out.dataset.items.push_back({item_id(i), std::move(features), mos});
    out.latent.push_back(z);
  }
  return out;
}

FeatureDataset generate_synthetic(const SyntheticSpec& spec) {
  return generate_synthetic_with_latent(spec).dataset;
}

PairRatingDataset generate_synthetic_pairwise(const SyntheticSpec& spec, int refs, int evals_per_ref) {
  validate(spec);
  if (refs < 1 || evals_per_ref < 2) throw InvalidConfig("pairwise generation needs refs >= 1 and evals_per_ref >= 2");
  if (static_cast<long long>(refs) * (evals_per_ref + 1) > spec.n_items) {
    throw InvalidConfig("refs * (evals_per_ref + 1) exceeds n_items");
  }
  SyntheticData base = generate_synthetic_with_latent(spec);
  PairRatingDataset out;
  out.items = std::move(base.dataset);
  std::mt19937_64 rng(spec.seed ^ 0x5bd1e9955bd1e995ULL);
  const double n = spec.scale_n;
  const std::size_t stride = static_cast<std::size_t>(evals_per_ref) + 1;
  out.pairs.reserve(static_cast<std::size_t>(refs) * static_cast<std::size_t>(evals_per_ref));
  for (std::size_t r = 0; r < static_cast<std::size_t>(refs); ++r) {
    const std::size_t ref = r * stride;
    for (std::size_t e = ref + 1; e < ref + stride; ++e) {
      const double gap = std::fabs(base.latent[ref] - base.latent[e]);
      const double s = std::clamp(n - gap * (n - 1.0) + gaussian(rng, spec.noise_sigma), 1.0, n);
      out.pairs.push_back({out.items.items[ref].id, out.items.items[e].id, s});
    }
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_ids(const FeatureDataset& ds,
                                                                        double test_fraction,
                                                                        std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidConfig("test fraction must lie in (0, 1)");
  std::vector<std::string> ids;
  ids.reserve(ds.items.size());
  for (const auto& item : ds.items) ids.push_back(item.id);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ids.size())));
  std::vector<std::string> test(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::string> train(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

FeatureDataset subset(const FeatureDataset& ds, const std::vector<std::string>& ids) {
  const IdIndex index = index_items(ds, false);
  FeatureDataset out;
  out.scale_n = ds.scale_n;
  out.items.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw InvalidInput("subset: unknown id '" + id + "'");
    out.items.push_back(ds.items[it->second]);
  }
  return out;
}

// ---- CSV ----------------------------------------------------------------

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Splits into lines, dropping a trailing '\r' and a final empty line.
std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

double parse_double(std::string_view field, const std::string& source, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError(source, line, std::string(what) + ": not a number '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, std::string(what) + ": non-finite value");
  return v;
}

void check_id(std::string_view id, const std::string& source, std::size_t line) {
  if (id.empty()) throw ParseError(source, line, "empty id");
}

void check_writable_id(const std::string& id) {
  if (id.empty() || id.find_first_of(",\r\n") != std::string::npos) {
    throw InvalidInput("id '" + id + "' cannot be written to CSV");
  }
}

void check_header(std::string_view header, std::string_view expected, const std::string& source) {
  if (header != expected) {
    throw ParseError(source, 1, "expected header '" + std::string(expected) + "', got '" + std::string(header) + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string feature_dataset_to_csv(const FeatureDataset& ds) {
  std::string out = "id,mos";
  const std::size_t dim = ds.feature_dim();
  for (std::size_t i = 0; i < dim; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const auto& item : ds.items) {
    check_writable_id(item.id);
    if (item.features.size() != dim) throw InvalidInput("item '" + item.id + "': feature dimension differs");
    out += item.id;
    out += ',';
    out += format_double(item.mos);
    for (double f : item.features) {
      out += ',';
      out += format_double(f);
    }
    out += '\n';
  }
  return out;
}

FeatureDataset feature_dataset_from_csv(const std::string& text, int scale_n, bool require_mos,
                                        const std::string& source) {
  if (scale_n < 2) throw InvalidInput("rating scale n must be >= 2");
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  const auto header = split_fields(lines[0]);
  if (header.size() < 2 || header[0] != "id" || header[1] != "mos") {
    throw ParseError(source, 1, "header must start with 'id,mos'");
  }
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i] != "f" + std::to_string(i - 2)) {
      throw ParseError(source, 1, "feature column " + std::to_string(i - 2) + " must be named 'f" +
                                      std::to_string(i - 2) + "'");
    }
  }
  FeatureDataset ds;
  ds.scale_n = scale_n;
  std::unordered_set<std::string> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (lines[ln].empty()) {
      if (ln + 1 == lines.size()) break;
      throw ParseError(source, line_no, "empty row");
    }
    const auto fields = split_fields(lines[ln]);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                            std::to_string(fields.size()));
    }
    check_id(fields[0], source, line_no);
    RatedItem item;
    item.id = std::string(fields[0]);
    if (!seen.insert(item.id).second) throw ParseError(source, line_no, "duplicate id '" + item.id + "'");
    item.mos = parse_double(fields[1], source, line_no, "mos");
    if (require_mos && (item.mos < 1.0 || item.mos > scale_n)) {
      throw ParseError(source, line_no, "mos outside [1, " + std::to_string(scale_n) + "]");
    }
    item.features.reserve(fields.size() - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      item.features.push_back(parse_double(fields[i], source, line_no, "feature"));
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

std::string pairs_to_csv(const std::vector<RatedPair>& pairs) {
  std::string out = "ref_id,eval_id,similarity\n";
  for (const auto& p : pairs) {
    check_writable_id(p.ref_id);
    check_writable_id(p.eval_id);
    out += p.ref_id + ',' + p.eval_id + ',' + format_double(p.similarity) + '\n';
  }
  return out;
}

std::vector<RatedPair> pairs_from_csv(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  check_header(lines[0], "ref_id,eval_id,similarity", source);
  std::vector<RatedPair> pairs;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (lines[ln].empty()) {
      if (ln + 1 == lines.size()) break;
      throw ParseError(source, line_no, "empty row");
    }
    const auto f = split_fields(lines[ln]);
    if (f.size() != 3) throw ParseError(source, line_no, "expected 3 fields");
    check_id(f[0], source, line_no);
    check_id(f[1], source, line_no);
    pairs.push_back({std::string(f[0]), std::string(f[1]), parse_double(f[2], source, line_no, "similarity")});
  }
  return pairs;
}

std::string quadruplets_to_csv(const std::vector<Quadruplet>& quads) {
  std::string out = "anchor_id,positive_id,negative_id,margin\n";
  out.reserve(out.size() + quads.size() * 48);
  for (const auto& q : quads) {
    check_writable_id(q.anchor_id);
    check_writable_id(q.positive_id);
    check_writable_id(q.negative_id);
    out += q.anchor_id;
    out += ',';
    out += q.positive_id;
    out += ',';
    out += q.negative_id;
    out += ',';
    out += format_double(q.margin);
    out += '\n';
  }
  return out;
}

std::vector<Quadruplet> quadruplets_from_csv(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing header");
  check_header(lines[0], "anchor_id,positive_id,negative_id,margin", source);
  std::vector<Quadruplet> quads;
  quads.reserve(lines.size());
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (lines[ln].empty()) {
      if (ln + 1 == lines.size()) break;
      throw ParseError(source, line_no, "empty row");
    }
    const auto f = split_fields(lines[ln]);
    if (f.size() != 4) throw ParseError(source, line_no, "expected 4 fields");
    for (int i = 0; i < 3; ++i) check_id(f[i], source, line_no);
    Quadruplet q{std::string(f[0]), std::string(f[1]), std::string(f[2]),
                 parse_double(f[3], source, line_no, "margin")};
    if (q.anchor_id == q.positive_id || q.anchor_id == q.negative_id || q.positive_id == q.negative_id) {
      throw ParseError(source, line_no, "anchor, positive and negative ids must be distinct");
    }
    if (q.margin < 0.0 || q.margin > 1.0) throw ParseError(source, line_no, "margin outside [0, 1]");
    quads.push_back(std::move(q));
  }
  return quads;
}

std::string histogram_to_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_double(h.edges[i]) + ',' + format_double(h.edges[i + 1]) + ',' + std::to_string(h.counts[i]) + '\n';
  }
  return out;
}

std::string ids_to_text(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + '\n';
  return out;
}

std::vector<std::string> ids_from_text(const std::string& text) {
  std::vector<std::string> ids;
  for (auto line : split_lines(text)) {
    if (!line.empty()) ids.emplace_back(line);
  }
  return ids;
}

// ---- JSON ---------------------------------------------------------------

namespace {

void require_finite_json(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite value cannot be serialized");
  }
}

}  // namespace

json to_json(const EmbeddingNet& net) {
  validate(net);
  json layers = json::array();
  for (const auto& l : net.layers) {
    json rows = json::array();
    for (std::size_t r = 0; r < l.w.rows; ++r) {
      rows.push_back(std::vector<double>(l.w.data.begin() + static_cast<std::ptrdiff_t>(r * l.w.cols),
                                         l.w.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * l.w.cols)));
    }
    layers.push_back({{"w", std::move(rows)}, {"b", l.b}});
  }
  return {{"layers", std::move(layers)},
          {"activation", std::string(to_string(net.activation))},
          {"embed_dim", net.embed_dim()}};
}

EmbeddingNet net_from_json(const json& j) {
  try {
    EmbeddingNet net;
    net.activation = activation_from_string(j.at("activation").get<std::string>());
    for (const auto& jl : j.at("layers")) {
      const auto rows = jl.at("w").get<std::vector<std::vector<double>>>();
      Layer layer;
      layer.b = jl.at("b").get<std::vector<double>>();
      const std::size_t cols = rows.empty() ? 0 : rows.front().size();
      layer.w = Matrix(rows.size(), cols);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw InvalidInput("ragged weight matrix");
        std::copy(rows[r].begin(), rows[r].end(), layer.w.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
      }
      net.layers.push_back(std::move(layer));
    }
    validate(net);
    if (j.at("embed_dim").get<std::size_t>() != net.embed_dim()) {
      throw InvalidInput("embed_dim does not match the last layer");
    }
    return net;
  } catch (const json::exception& e) {
    throw ParseError("<network>", 0, e.what());
  } catch (const InvalidInput& e) {
    throw ParseError("<network>", 0, e.what());
  }
}

json to_json(const RegressionHead& head) {
  require_finite_json(head.w, "regression head");
  require_finite_json(std::span<const double>(&head.b, 1), "regression head");
  return {{"w", head.w}, {"b", head.b}};
}

RegressionHead head_from_json(const json& j) {
  try {
    return {j.at("w").get<std::vector<double>>(), j.at("b").get<double>()};
  } catch (const json::exception& e) {
    throw ParseError("<head>", 0, e.what());
  }
}

json to_json(const TrainConfig& cfg) {
  json j;
  if (const auto* fixed = std::get_if<FixedMargin>(&cfg.margin_mode)) {
    j["margin_mode"] = "fixed";
    j["margin"] = fixed->m;
  } else {
    j["margin_mode"] = "adaptive";
  }
  j["loss_weights"] = {{"alpha", cfg.loss_weights.alpha}, {"beta", cfg.loss_weights.beta}};
  if (cfg.regression) {
    j["regression"] = *cfg.regression == RegressionKind::MAE ? "mae" : "mse";
  } else {
    j["regression"] = nullptr;
  }
  if (const auto* sgd = std::get_if<SgdSpec>(&cfg.optimizer)) {
    j["optimizer"] = {{"type", "sgd"}, {"lr", sgd->lr}};
  } else {
    const auto& a = std::get<AdamSpec>(cfg.optimizer);
    j["optimizer"] = {{"type", "adam"}, {"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
  }
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["shuffle"] = cfg.shuffle;
  j["collapse_variance_eps"] = cfg.collapse_variance_eps;
  j["collapse_patience"] = cfg.collapse_patience;
  j["probe_size"] = cfg.probe_size;
  j["architecture"] = {{"hidden", cfg.architecture.hidden},
                       {"embed_dim", cfg.architecture.embed_dim},
                       {"activation", std::string(to_string(cfg.architecture.activation))}};
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  try {
    const std::string mode = j.value("margin_mode", std::string("adaptive"));
    if (mode == "fixed") {
      cfg.margin_mode = FixedMargin{j.value("margin", 0.5)};
    } else if (mode == "adaptive") {
      cfg.margin_mode = AdaptiveMargin{};
    } else {
      throw InvalidConfig("margin_mode must be 'fixed' or 'adaptive'");
    }
    if (j.contains("loss_weights")) {
      const auto& w = j.at("loss_weights");
      cfg.loss_weights = {w.value("alpha", 1.0), w.value("beta", 0.0)};
    }
    if (j.contains("regression") && !j.at("regression").is_null()) {
      const std::string kind = j.at("regression").get<std::string>();
      if (kind == "mae") {
        cfg.regression = RegressionKind::MAE;
      } else if (kind == "mse") {
        cfg.regression = RegressionKind::MSE;
      } else {
        throw InvalidConfig("regression must be 'mae', 'mse' or null");
      }
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      const std::string type = o.value("type", std::string("adam"));
      if (type == "sgd") {
        cfg.optimizer = SgdSpec{o.value("lr", SgdSpec{}.lr)};
      } else if (type == "adam") {
        const AdamSpec d;
        cfg.optimizer = AdamSpec{o.value("lr", d.lr), o.value("beta1", d.beta1), o.value("beta2", d.beta2),
                                 o.value("eps", d.eps)};
      } else {
        throw InvalidConfig("optimizer type must be 'sgd' or 'adam'");
      }
    }
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.shuffle = j.value("shuffle", cfg.shuffle);
    cfg.collapse_variance_eps = j.value("collapse_variance_eps", cfg.collapse_variance_eps);
    cfg.collapse_patience = j.value("collapse_patience", cfg.collapse_patience);
    cfg.probe_size = j.value("probe_size", cfg.probe_size);
    if (j.contains("architecture")) {
      const auto& a = j.at("architecture");
      cfg.architecture.hidden = a.value("hidden", cfg.architecture.hidden);
      cfg.architecture.embed_dim = a.value("embed_dim", cfg.architecture.embed_dim);
      cfg.architecture.activation =
          activation_from_string(a.value("activation", std::string(to_string(cfg.architecture.activation))));
    }
  } catch (const json::exception& e) {
    throw ParseError("<config>", 0, e.what());
  }
  validate(cfg);
  return cfg;
}

json to_json(const TrainReport& report) {
  std::vector<double> triplet;
  std::vector<double> regression;
  std::vector<double> active;
  std::vector<double> variance;
  for (const auto& e : report.epochs) {
    triplet.push_back(e.triplet_loss);
    regression.push_back(e.regression_loss);
    active.push_back(e.active_fraction);
    variance.push_back(e.probe_variance);
  }
  json j;
  j["epochs_run"] = report.epochs.size();
  j["triplet_loss"] = triplet;
  j["regression_loss"] = regression;
  j["active_fraction"] = active;
  j["probe_variance"] = variance;
  j["collapsed"] = report.collapsed;
  j["collapse_epoch"] = report.collapse_epoch ? json(*report.collapse_epoch) : json(nullptr);
  j["skipped_degenerate"] = report.skipped_degenerate;
  return j;
}

TrainReport train_report_from_json(const json& j) {
  try {
    TrainReport r;
    const auto triplet = j.at("triplet_loss").get<std::vector<double>>();
    const auto regression = j.at("regression_loss").get<std::vector<double>>();
    const auto active = j.at("active_fraction").get<std::vector<double>>();
    const auto variance = j.at("probe_variance").get<std::vector<double>>();
    const std::size_t n = j.at("epochs_run").get<std::size_t>();
    if (triplet.size() != n || regression.size() != n || active.size() != n || variance.size() != n) {
      throw ParseError("<report>", 0, "per-epoch arrays disagree with epochs_run");
    }
    for (std::size_t i = 0; i < n; ++i) r.epochs.push_back({triplet[i], regression[i], active[i], variance[i]});
    r.collapsed = j.at("collapsed").get<bool>();
    if (!j.at("collapse_epoch").is_null()) r.collapse_epoch = j.at("collapse_epoch").get<int>();
    r.skipped_degenerate = j.at("skipped_degenerate").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError("<report>", 0, e.what());
  }
}

json to_json(const RankResult& r) {
  return {{"method", std::string(to_string(r.method))}, {"srocc", r.srocc}, {"n", r.n}};
}

json to_json(const SyntheticSpec& spec) {
  return {{"n_items", spec.n_items},
          {"feature_dim", spec.feature_dim},
          {"scale_n", spec.scale_n},
          {"noise_sigma", spec.noise_sigma},
          {"feature_noise_sigma", spec.feature_noise_sigma},
          {"seed", spec.seed}};
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec spec;
  try {
    spec.n_items = j.value("n_items", spec.n_items);
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.scale_n = j.value("scale_n", spec.scale_n);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.feature_noise_sigma = j.value("feature_noise_sigma", spec.feature_noise_sigma);
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    throw ParseError("<synthetic spec>", 0, e.what());
  }
  validate(spec);
  return spec;
}

std::string format_rank_table(const std::vector<RankResult>& results) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s %10s %8s\n", "method", "srocc", "n");
  out += buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-12s %10.6f %8zu\n", std::string(to_string(r.method)).c_str(), r.srocc, r.n);
    out += buf;
  }
  return out;
}

// ---- files --------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

std::string dump_json(const json& j) {
  return j.dump(2) + "\n";
}

FeatureDataset load_feature_dataset(const std::filesystem::path& path, int scale_n, bool require_mos) {
  return feature_dataset_from_csv(read_file(path), scale_n, require_mos, path.string());
}

void save_feature_dataset(const std::filesystem::path& path, const FeatureDataset& ds) {
  write_file_atomic(path, feature_dataset_to_csv(ds));
}

PairRatingDataset load_pair_dataset(const std::filesystem::path& items, const std::filesystem::path& pairs,
                                    int scale_n) {
  PairRatingDataset ds;
  ds.items = load_feature_dataset(items, scale_n, false);
  ds.pairs = pairs_from_csv(read_file(pairs), pairs.string());
  validate(ds);
  return ds;
}

std::vector<Quadruplet> load_quadruplets(const std::filesystem::path& path) {
  return quadruplets_from_csv(read_file(path), path.string());
}

void save_quadruplets(const std::filesystem::path& path, const std::vector<Quadruplet>& quads) {
  write_file_atomic(path, quadruplets_to_csv(quads));
}

}  // namespace amtl
