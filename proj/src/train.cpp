#include "mentor/train.hpp"

#include "mentor/checkpoint.hpp"
#include "mentor/error.hpp"
#include "mentor/optim.hpp"
#include "mentor/stats.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace mentor {

using nlohmann::json;

Precision precision_from_string(const std::string& name) {
  if (name == "f32") return Precision::F32;
  if (name == "f64") return Precision::F64;
  throw ValidationError("unknown precision '" + name + "' (expected f32 or f64)");
}

const char* to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision precision_from_env(Precision fallback) {
  const char* v = std::getenv("MENTOR_PRECISION");
  if (v == nullptr || *v == '\0') return fallback;
  return precision_from_string(v);
}

json TrainConfig::to_json() const {
  return {
      {"model", model.to_json()},
      {"lr", lr},
      {"epochs", epochs},
      {"patience", patience},
      {"swa", {{"enabled", swa.enabled}, {"lr", swa.lr}, {"start_fraction", swa.start_fraction}, {"frequency", swa.frequency}}},
      {"normalization", mentor::to_string(normalization)},
      {"resample_anchors", resample_anchors},
      {"validation_fold", validation_fold},
      {"seed", seed},
      {"precision", mentor::to_string(precision)},
  };
}

TrainConfig TrainConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model = ModelConfig::from_json(v);
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "patience") c.patience = v.get<int>();
      else if (key == "swa") {
        for (const auto& [sk, sv] : v.items()) {
          if (sk == "enabled") c.swa.enabled = sv.get<bool>();
          else if (sk == "lr") c.swa.lr = sv.get<double>();
          else if (sk == "start_fraction") c.swa.start_fraction = sv.get<double>();
          else if (sk == "frequency") c.swa.frequency = sv.get<int>();
          else throw ValidationError("unknown swa key '" + sk + "'");
        }
      }
      else if (key == "normalization") c.normalization = scaling_from_string(v.get<std::string>());
      else if (key == "resample_anchors") c.resample_anchors = v.get<bool>();
      else if (key == "validation_fold") c.validation_fold = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "precision") c.precision = precision_from_string(v.get<std::string>());
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0.0) || !(swa.lr > 0.0)) throw ValidationError("learning rates must be positive");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (patience < 0) throw ValidationError("patience must be >= 0");
  if (!(swa.start_fraction >= 0.0 && swa.start_fraction <= 1.0)) throw ValidationError("swa start fraction must be in [0,1]");
  if (swa.frequency < 1) throw ValidationError("swa frequency must be >= 1");
  if (validation_fold < 0 || validation_fold >= 5) throw ValidationError("validation_fold must be in [0,5)");
}

std::vector<std::string> TrainConfig::range_warnings() const {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  const int d = model.hidden;
  check(d == 16 || d == 32 || d == 64 || d == 128, "hidden dimension outside {16,32,64,128}");
  check(epochs >= 20 && epochs <= 100, "epochs outside [20,100]");
  check(lr >= 1e-5 && lr <= 1e-1, "learning rate outside [1e-5,1e-1]");
  check(swa.lr >= 1e-5 && swa.lr <= 1e-1, "SWA learning rate outside [1e-5,1e-1]");
  check(swa.start_fraction >= 0.6 && swa.start_fraction <= 0.95, "SWA start outside [0.6,0.95]");
  check(swa.frequency >= 1 && swa.frequency <= 20, "SWA frequency outside [1,20]");
  for (double p : {model.dropout_topology, model.dropout_centrality, model.dropout_classifier}) {
    check(p >= 0.2 && p <= 0.8, "dropout outside [0.2,0.8]");
  }
  return out;
}

json RunReport::metrics_json() const {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json class_auroc = json::array();
  for (double a : test.class_auroc) class_auroc.push_back(finite_or_null(a));
  json confusion = json::array();
  for (Eigen::Index r = 0; r < test.confusion.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < test.confusion.cols(); ++c) row.push_back(test.confusion(r, c));
    confusion.push_back(row);
  }
  json gamma = json::object();
  for (auto c : kAllChannels) {
    if (!channels[c] || test_indices.empty()) continue;
    std::vector<double> g;
    for (auto i : test_indices) g.push_back(artifacts.gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    std::sort(g.begin(), g.end());
    gamma[channel_letter(c)] = sorted_quantile(g, 0.5);
  }
  return {
      {"accuracy", test.accuracy},
      {"auroc", finite_or_null(test.auroc)},
      {"class_auroc", class_auroc},
      {"confusion", confusion},
      {"test_size", test_indices.size()},
      {"channels", channels.to_string()},
      {"median_gamma", gamma},
      {"best_epoch", best_epoch},
      {"best_val_loss", finite_or_null(best_val_loss)},
      {"epochs_run", history.size()},
      {"swa_snapshots", swa_snapshots},
      {"swa_val_loss", swa_val_loss},
      {"final_weights", final_weights},
  };
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Prepared {
  SplitPlan split;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  ModelInputs inputs;
};

Prepared prepare(const Bundle& bundle, const TrainConfig& cfg, int fold) {
  Prepared p;
  const auto labels = bundle.teams.labels();
  p.split = make_split(labels, bundle.teams.num_classes(), cfg.seed);
  p.train_idx = p.split.train_without_fold(static_cast<std::size_t>(fold));
  p.val_idx = p.split.folds()[static_cast<std::size_t>(fold)];

  std::vector<char> in_train(bundle.graph.num_nodes(), 0);
  for (auto t : p.train_idx) {
    for (NodeId v : bundle.teams[t].members) in_train[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<NodeId> rows;
  for (std::size_t v = 0; v < in_train.size(); ++v) {
    if (in_train[v]) rows.push_back(static_cast<NodeId>(v));
  }
  FeatureScaler scaler(cfg.normalization);
  scaler.fit(bundle.graph.features(), rows);
  p.inputs = ModelInputs::build(bundle, cfg.model, scaler.transform(bundle.graph.features()), mix(cfg.seed, 1));
  return p;
}

std::vector<diff::Index> as_index(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

std::vector<int> pick(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

template <typename T>
double mean_nll(const diff::Mat<T>& logits, const std::vector<std::size_t>& idx, const std::vector<int>& labels) {
  double loss = 0.0;
  for (auto i : idx) {
    const auto r = static_cast<Eigen::Index>(i);
    const double m = static_cast<double>(logits.row(r).maxCoeff());
    double z = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(static_cast<double>(logits(r, c)) - m);
    loss -= static_cast<double>(logits(r, labels[i])) - m - std::log(z);
  }
  return idx.empty() ? 0.0 : loss / static_cast<double>(idx.size());
}

template <typename T>
double accuracy_of(const diff::Mat<T>& logits, const std::vector<std::size_t>& idx, const std::vector<int>& labels) {
  long correct = 0;
  for (auto i : idx) {
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    correct += best == labels[i];
  }
  return idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
}

template <typename T>
std::vector<diff::Mat<T>> snapshot(const diff::ParameterStore<T>& ps) {
  std::vector<diff::Mat<T>> out;
  for (const auto* p : ps.all()) out.push_back(p->value);
  return out;
}

template <typename T>
void restore(diff::ParameterStore<T>& ps, const std::vector<diff::Mat<T>>& values) {
  auto all = ps.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = values[i];
}

json checkpoint_header(const TrainConfig& cfg, const Prepared& p, std::size_t feature_dim) {
  return {{"config", cfg.to_json()},
          {"feature_dim", feature_dim},
          {"num_classes", p.inputs.num_classes},
          {"num_anchor_sets", p.inputs.anchors.num_sets()}};
}

template <typename T>
void finish_report(Mentor<T>& model, Prepared& p, const TrainConfig& cfg, RunReport& report) {
  auto& in = p.inputs;
  report.config = cfg;
  report.channels = cfg.model.channels;
  report.labels = in.labels;
  report.team_ids = in.team_ids;
  report.artifacts = model.evaluate(in);
  report.test_indices = p.split.test();
  FeatureMatrix test_prob(static_cast<Eigen::Index>(report.test_indices.size()), report.artifacts.probabilities.cols());
  std::vector<int> test_labels;
  for (std::size_t k = 0; k < report.test_indices.size(); ++k) {
    test_prob.row(static_cast<Eigen::Index>(k)) = report.artifacts.probabilities.row(static_cast<Eigen::Index>(report.test_indices[k]));
    test_labels.push_back(in.labels[report.test_indices[k]]);
  }
  report.test = compute_metrics(test_labels, test_prob);

  if (cfg.model.channels[Channel::Topology]) {
    report.forest_original = in.forest.original;
    report.forest_team = in.forest.team_of;
    report.importance = node_importance(in.topology_plan, report.artifacts.alpha);
    report.team_gini.assign(in.num_teams, 0.0);
    for (std::size_t t = 0; t < in.num_teams; ++t) {
      const auto b = in.forest.team_offsets[t];
      const auto e = in.forest.team_offsets[t + 1];
      if (e > b) report.team_gini[t] = gini(std::span<const double>(report.importance.data() + b, e - b));
    }
  }
}

struct FitResult {
  RunReport report;
  double best_val_loss{std::numeric_limits<double>::infinity()};
};

template <typename T>
FitResult fit(const Bundle& bundle, const TrainConfig& cfg, int fold, bool final_eval,
              const std::optional<std::filesystem::path>& checkpoint) {
  cfg.validate();
  for (const auto& w : cfg.range_warnings()) spdlog::warn("config: {}", w);
  Prepared p = prepare(bundle, cfg, fold);
  auto& in = p.inputs;
  const auto feature_dim = static_cast<std::size_t>(in.topology_features.cols());
  Mentor<T> model(cfg.model, feature_dim, in.num_classes, in.anchors.num_sets(), mix(cfg.seed, 2));
  std::mt19937_64 rng(mix(cfg.seed, 3));

  const auto train_rows = as_index(p.train_idx);
  const auto train_labels = pick(in.labels, p.train_idx);
  AdamState<T> adam;
  SwaState<T> swa;
  FitResult out;
  auto best = snapshot(model.params());
  auto last_good = best;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_anchors) in.resample_anchors(cfg.model, mix(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
    model.params().zero_grad();
    double train_loss = 0.0;
    {
      diff::Tape<T> tape;
      auto fp = model.forward(tape, in, true, rng);
      auto loss = tape.cross_entropy(tape.gather_rows(fp.logits, train_rows), train_labels);
      train_loss = static_cast<double>(loss.value()(0, 0));
      if (!std::isfinite(train_loss)) {
        if (checkpoint) {
          restore(model.params(), last_good);
          save_checkpoint(*checkpoint, checkpoint_header(cfg, p, feature_dim), model.params());
        }
        throw DivergenceError("training loss is not finite at epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
    }
    const bool in_swa = cfg.swa.enabled && epoch >= static_cast<int>(std::ceil(cfg.swa.start_fraction * cfg.epochs));
    try {
      adam_step(model.params(), adam, AdamOptions{in_swa ? cfg.swa.lr : cfg.lr});
    } catch (const DivergenceError&) {
      if (checkpoint) {
        restore(model.params(), last_good);
        save_checkpoint(*checkpoint, checkpoint_header(cfg, p, feature_dim), model.params());
      }
      throw;
    }
    for (const auto* prm : model.params().all()) {
      if (!prm->value.allFinite()) throw DivergenceError("parameter '" + prm->name + "' became non-finite");
    }
    last_good = snapshot(model.params());
    if (cfg.swa.enabled && swa_due(epoch, cfg.epochs, cfg.swa.start_fraction, cfg.swa.frequency)) swa_update(swa, model.params());

    if (cfg.resample_anchors) in.resample_anchors(cfg.model, mix(cfg.seed, 1));
    diff::Tape<T> eval_tape(false);
    std::mt19937_64 unused(0);
    auto fp = model.forward(eval_tape, in, false, unused);
    const auto& logits = fp.logits.value();
    EpochRecord rec{epoch, train_loss, mean_nll(logits, p.val_idx, in.labels), accuracy_of(logits, p.val_idx, in.labels)};
    out.report.history.push_back(rec);
    if (rec.val_loss < out.best_val_loss) {
      out.best_val_loss = rec.val_loss;
      out.report.best_epoch = epoch;
      best = last_good;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      spdlog::debug("early stop at epoch {}", epoch);
      break;
    }
  }
  out.report.best_val_loss = out.best_val_loss;
  out.report.swa_snapshots = swa.count;
  restore(model.params(), best);
  out.report.final_weights = "best_val";
  if (cfg.swa.enabled && swa.count > 0) {
    swa_apply(swa, model.params());
    diff::Tape<T> eval_tape(false);
    std::mt19937_64 unused(0);
    const double swa_loss = mean_nll(model.forward(eval_tape, in, false, unused).logits.value(), p.val_idx, in.labels);
    out.report.swa_val_loss = swa_loss;
    if (swa_loss <= out.best_val_loss) {
      out.report.final_weights = "swa";
    } else {
      spdlog::debug("averaged weights lose on validation ({} > {}), keeping epoch {}", swa_loss, out.best_val_loss,
                    out.report.best_epoch);
      restore(model.params(), best);
    }
  }
  if (checkpoint) save_checkpoint(*checkpoint, checkpoint_header(cfg, p, feature_dim), model.params());
  if (final_eval) finish_report(model, p, cfg, out.report);
  return out;
}

template <typename T>
RunReport evaluate_impl(const Bundle& bundle, const CheckpointData& data) {
  const auto cfg = TrainConfig::from_json(data.header.at("config"));
  Prepared p = prepare(bundle, cfg, cfg.validation_fold);
  const auto feature_dim = static_cast<std::size_t>(p.inputs.topology_features.cols());
  if (data.header.at("feature_dim").get<std::size_t>() != feature_dim ||
      data.header.at("num_classes").get<int>() != p.inputs.num_classes) {
    throw ValidationError("checkpoint does not match the dataset");
  }
  Mentor<T> model(cfg.model, feature_dim, p.inputs.num_classes, p.inputs.anchors.num_sets(), mix(cfg.seed, 2));
  load_parameters(data, model.params());
  RunReport report;
  report.final_weights = "checkpoint";
  finish_report(model, p, cfg, report);
  return report;
}

}  // namespace

RunReport train(const Bundle& bundle, const TrainConfig& cfg, const std::optional<std::filesystem::path>& checkpoint) {
  if (cfg.precision == Precision::F64) return fit<double>(bundle, cfg, cfg.validation_fold, true, checkpoint).report;
  return fit<float>(bundle, cfg, cfg.validation_fold, true, checkpoint).report;
}

double cross_validate(const Bundle& bundle, const TrainConfig& cfg) {
  double total = 0.0;
  constexpr int kFolds = 5;
  for (int k = 0; k < kFolds; ++k) {
    total += cfg.precision == Precision::F64 ? fit<double>(bundle, cfg, k, false, {}).best_val_loss
                                             : fit<float>(bundle, cfg, k, false, {}).best_val_loss;
  }
  return total / kFolds;
}

double model_grad_check(const Bundle& bundle, ModelConfig cfg, std::uint64_t seed, double step) {
  cfg.dropout_topology = cfg.dropout_centrality = cfg.dropout_classifier = 0.0;
  FeatureScaler scaler(Scaling::Standard);
  scaler.fit(bundle.graph.features());
  const auto in = ModelInputs::build(bundle, cfg, scaler.transform(bundle.graph.features()), mix(seed, 1));
  Mentor<double> model(cfg, static_cast<std::size_t>(in.topology_features.cols()), in.num_classes, in.anchors.num_sets(),
                       mix(seed, 2));
  // zero biases put ReLUs exactly on their kink at initialization; check at a generic point
  std::mt19937_64 rng(mix(seed, 4));
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (auto* param : model.params().all()) {
    for (Eigen::Index i = 0; i < param->value.size(); ++i) param->value.data()[i] += jitter(rng);
  }
  return diff::grad_check(
      [&](diff::Tape<double>& t) {
        std::mt19937_64 rng(0);
        auto fp = model.forward(t, in, false, rng);
        return t.cross_entropy(fp.logits, in.labels);
      },
      model.params(), step);
}

void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 256 << 20);
#endif
}

RunReport evaluate_checkpoint(const Bundle& bundle, const std::filesystem::path& checkpoint) {
  const auto data = read_checkpoint(checkpoint);
  return data.scalar_size == 4 ? evaluate_impl<float>(bundle, data) : evaluate_impl<double>(bundle, data);
}

}  // namespace mentor
