#include "mentor/baselines.hpp"

#include "mentor/error.hpp"
#include "mentor/optim.hpp"
#include "mentor/split.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace mentor {

using nlohmann::json;

std::vector<std::string> team_feature_names(std::size_t attribute_dim, diff::Reduce aggr) {
  auto names = kStructuralFeatures;
  for (std::size_t i = 0; i < attribute_dim; ++i) names.push_back(std::string(diff::to_string(aggr)) + "_f" + std::to_string(i));
  return names;
}

std::vector<double> subgraph_features(const Graph& graph, const Team& team, diff::Reduce aggr) {
  std::vector<NodeId> members = team.members;
  std::sort(members.begin(), members.end());
  const auto k = members.size();
  auto local = [&](NodeId v) -> long {
    auto it = std::lower_bound(members.begin(), members.end(), v);
    return it != members.end() && *it == v ? it - members.begin() : -1;
  };

  double internal = 0.0;
  double followers_total = 0.0;
  double followings_total = 0.0;
  std::set<NodeId> followers;
  std::set<NodeId> followings;
  std::vector<std::set<long>> adj(k);
  for (std::size_t i = 0; i < k; ++i) {
    const NodeId v = members[i];
    for (NodeId u : graph.out_neighbors(v)) {
      const long j = local(u);
      if (j < 0) {
        followings_total += 1.0;
        followings.insert(u);
        continue;
      }
      if (graph.directed() || v < u) internal += 1.0;
      adj[i].insert(j);
      adj[static_cast<std::size_t>(j)].insert(static_cast<long>(i));
    }
    for (NodeId u : graph.in_neighbors(v)) {
      if (local(u) >= 0) continue;
      followers_total += 1.0;
      followers.insert(u);
    }
  }

  double undirected_edges = 0.0;
  for (const auto& a : adj) undirected_edges += static_cast<double>(a.size());
  undirected_edges /= 2.0;
  const double kd = static_cast<double>(k);
  const double density = k < 2 ? 0.0 : 2.0 * undirected_edges / (kd * (kd - 1.0));

  double clustering = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto deg = adj[i].size();
    if (deg < 2) continue;
    double links = 0.0;
    for (long a : adj[i]) {
      for (long b : adj[i]) {
        if (a < b && adj[static_cast<std::size_t>(a)].count(b)) links += 1.0;
      }
    }
    clustering += links / (static_cast<double>(deg) * static_cast<double>(deg - 1) / 2.0);
  }
  if (k > 0) clustering /= kd;

  // degree Pearson correlation over both orientations of every undirected internal edge
  double assort = std::numeric_limits<double>::quiet_NaN();
  if (undirected_edges >= 2.0) {
    double sx = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto di = static_cast<double>(adj[i].size());
      for (long j : adj[i]) {
        const auto dj = static_cast<double>(adj[static_cast<std::size_t>(j)].size());
        sx += di;
        sxx += di * di;
        sxy += di * dj;
        n += 1.0;
      }
    }
    const double mean = sx / n;
    const double var = sxx / n - mean * mean;
    if (var > 1e-12) assort = (sxy / n - mean * mean) / var;
  }
  const bool imputed = std::isnan(assort);

  std::vector<double> out{internal,
                          static_cast<double>(followers.size()),
                          followers_total,
                          static_cast<double>(followings.size()),
                          followings_total,
                          imputed ? 0.0 : assort,
                          imputed ? 1.0 : 0.0,
                          density,
                          clustering,
                          kd};
  const auto& x = graph.features();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double v = x(members[i], c);
      if (i == 0) acc = v;
      else if (aggr == diff::Reduce::Max) acc = std::max(acc, v);
      else if (aggr == diff::Reduce::Min) acc = std::min(acc, v);
      else acc += v;
    }
    if (aggr == diff::Reduce::Mean && k > 0) acc /= kd;
    out.push_back(acc);
  }
  return out;
}

FeatureMatrix team_feature_matrix(const Graph& graph, const TeamSet& teams, diff::Reduce aggr) {
  teams.validate_against(graph);
  const auto cols = static_cast<Eigen::Index>(kStructuralFeatures.size() + graph.feature_dim());
  FeatureMatrix x(static_cast<Eigen::Index>(teams.size()), cols);
  for (std::size_t t = 0; t < teams.size(); ++t) {
    const auto row = subgraph_features(graph, teams[t], aggr);
    for (Eigen::Index c = 0; c < cols; ++c) x(static_cast<Eigen::Index>(t), c) = row[static_cast<std::size_t>(c)];
  }
  return x;
}

void write_features_csv(const std::filesystem::path& file, const TeamSet& teams, const FeatureMatrix& x,
                        const std::vector<std::string>& names) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << "team_id,label";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t t = 0; t < teams.size(); ++t) {
    out << teams[t].id << ',' << teams[t].label;
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << format_real(x(static_cast<Eigen::Index>(t), c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------------------

namespace {

FeatureMatrix softmax(const FeatureMatrix& z) {
  FeatureMatrix p(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    p.row(r) = (z.row(r).array() - z.row(r).maxCoeff()).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

}  // namespace

LogRegModel logreg_fit(const FeatureMatrix& x, std::span<const int> labels, int num_classes, double c_reg,
                       int max_iter, double tol) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows() || x.rows() == 0) throw ValidationError("logreg: label count mismatch");
  if (!(c_reg > 0.0)) throw ValidationError("logreg: C must be positive");
  const auto n = static_cast<double>(x.rows());
  FeatureMatrix y = FeatureMatrix::Zero(x.rows(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ValidationError("logreg: label out of range");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  const double lambda = 1.0 / (c_reg * n);
  // the softmax loss Hessian is bounded by 0.5 * X^T X / n; its trace bounds the top eigenvalue
  const double lipschitz = 0.5 * (x.squaredNorm() + n) / n + lambda;
  const double step = 1.0 / lipschitz;

  LogRegModel m;
  m.weights = FeatureMatrix::Zero(x.cols(), num_classes);
  m.bias = Eigen::RowVectorXd::Zero(num_classes);
  // Nesterov momentum on the smooth convex objective
  FeatureMatrix w_prev = m.weights;
  Eigen::RowVectorXd b_prev = m.bias;
  for (m.iterations = 0; m.iterations < max_iter; ++m.iterations) {
    const double mom = static_cast<double>(m.iterations) / (m.iterations + 3.0);
    FeatureMatrix w_look = m.weights + mom * (m.weights - w_prev);
    Eigen::RowVectorXd b_look = m.bias + mom * (m.bias - b_prev);
    FeatureMatrix z = x * w_look;
    z.rowwise() += b_look;
    const FeatureMatrix diff = (softmax(z) - y) / n;
    const FeatureMatrix gw = x.transpose() * diff + lambda * w_look;
    const Eigen::RowVectorXd gb = diff.colwise().sum();
    w_prev = m.weights;
    b_prev = m.bias;
    m.weights = w_look - step * gw;
    m.bias = b_look - step * gb;
    if (std::sqrt(gw.squaredNorm() + gb.squaredNorm()) < tol) {
      m.converged = true;
      break;
    }
  }
  if (!m.converged) spdlog::warn("logistic regression did not converge in {} iterations", max_iter);
  return m;
}

FeatureMatrix logreg_predict(const LogRegModel& model, const FeatureMatrix& x) {
  FeatureMatrix z = x * model.weights;
  z.rowwise() += model.bias;
  return softmax(z);
}

// ---------------------------------------------------------------------------------------

Mlp::Mlp(std::size_t input_dim, int num_classes, const MlpConfig& cfg) : cfg_(cfg) {
  if (cfg.layers < 1 || cfg.hidden < 1) throw ValidationError("mlp needs at least one hidden layer of width >= 1");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ValidationError("mlp dropout must be in [0,1)");
  std::mt19937_64 rng(cfg.seed);
  auto glorot = [&](Eigen::Index r, Eigen::Index c) {
    const double b = std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> u(-b, b);
    diff::Mat<double> m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  auto in = static_cast<Eigen::Index>(input_dim);
  for (int l = 0; l < cfg.layers; ++l) {
    params_.add("W" + std::to_string(l), glorot(in, cfg.hidden));
    params_.add("b" + std::to_string(l), diff::Mat<double>::Zero(1, cfg.hidden));
    in = cfg.hidden;
  }
  params_.add("Wout", glorot(in, num_classes));
  params_.add("bout", diff::Mat<double>::Zero(1, num_classes));
}

diff::Var<double> Mlp::logits(diff::Tape<double>& t, const FeatureMatrix& x, bool training, std::mt19937_64& rng) {
  auto h = t.constant(x);
  for (int l = 0; l < cfg_.layers; ++l) {
    h = t.relu(t.linear(h, t.param(params_.get("W" + std::to_string(l))), t.param(params_.get("b" + std::to_string(l)))));
    if (training) h = t.dropout(h, cfg_.dropout, rng);
  }
  return t.linear(h, t.param(params_.get("Wout")), t.param(params_.get("bout")));
}

void Mlp::fit(const FeatureMatrix& x, std::span<const int> labels) {
  std::mt19937_64 rng(cfg_.seed + 1);
  AdamState<double> adam;
  for (int e = 0; e < cfg_.epochs; ++e) {
    params_.zero_grad();
    diff::Tape<double> t;
    auto loss = t.cross_entropy(logits(t, x, true, rng), labels);
    if (!std::isfinite(loss.value()(0, 0))) throw DivergenceError("mlp loss is not finite at epoch " + std::to_string(e));
    t.backward(loss);
    adam_step(params_, adam, AdamOptions{cfg_.lr});
  }
}

FeatureMatrix Mlp::predict(const FeatureMatrix& x) {
  diff::Tape<double> t(false);
  std::mt19937_64 rng(0);
  return softmax(logits(t, x, false, rng).value());
}

// ---------------------------------------------------------------------------------------

json BaselineConfig::to_json() const {
  return {{"model", model},
          {"aggr", diff::to_string(aggr)},
          {"normalization", mentor::to_string(normalization)},
          {"c_reg", c_reg},
          {"mlp", {{"hidden", mlp.hidden}, {"layers", mlp.layers}, {"dropout", mlp.dropout}, {"lr", mlp.lr}, {"epochs", mlp.epochs}}},
          {"seed", seed},
          {"aggregate_before_normalize", true}};
}

BaselineConfig BaselineConfig::from_json(const json& j) {
  BaselineConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model = v.get<std::string>();
      else if (key == "aggr") c.aggr = diff::reduce_from_string(v.get<std::string>());
      else if (key == "normalization") c.normalization = scaling_from_string(v.get<std::string>());
      else if (key == "c_reg") c.c_reg = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "aggregate_before_normalize") continue;
      else if (key == "mlp") {
        for (const auto& [mk, mv] : v.items()) {
          if (mk == "hidden") c.mlp.hidden = mv.get<int>();
          else if (mk == "layers") c.mlp.layers = mv.get<int>();
          else if (mk == "dropout") c.mlp.dropout = mv.get<double>();
          else if (mk == "lr") c.mlp.lr = mv.get<double>();
          else if (mk == "epochs") c.mlp.epochs = mv.get<int>();
          else throw ValidationError("unknown mlp key '" + mk + "'");
        }
      } else {
        throw ValidationError("unknown baseline config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad baseline config value: ") + e.what());
  }
  if (c.model != "lr" && c.model != "mlp") throw ValidationError("baseline model must be lr or mlp");
  return c;
}

BaselineReport run_baseline(const Bundle& bundle, const BaselineConfig& cfg) {
  BaselineReport r;
  r.features = team_feature_matrix(bundle.graph, bundle.teams, cfg.aggr);
  r.feature_names = team_feature_names(bundle.graph.feature_dim(), cfg.aggr);
  const auto labels = bundle.teams.labels();
  const auto split = make_split(labels, bundle.teams.num_classes(), cfg.seed);
  const auto train_idx = split.train_pool();

  std::vector<NodeId> rows(train_idx.begin(), train_idx.end());
  FeatureScaler scaler(cfg.normalization);
  scaler.fit(r.features, rows);
  const FeatureMatrix x = scaler.transform(r.features);
  auto take = [&](const std::vector<std::size_t>& idx, FeatureMatrix& xs, std::vector<int>& ys) {
    xs.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
    ys.clear();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
      ys.push_back(labels[idx[i]]);
    }
  };
  FeatureMatrix x_train;
  std::vector<int> y_train;
  take(train_idx, x_train, y_train);

  r.test_indices = split.test();
  FeatureMatrix x_test;
  std::vector<int> y_test;
  take(r.test_indices, x_test, y_test);

  FeatureMatrix prob;
  const int classes = bundle.teams.num_classes();
  if (cfg.model == "lr") {
    auto m = logreg_fit(x_train, y_train, classes, cfg.c_reg);
    prob = logreg_predict(m, x_test);
  } else {
    auto mc = cfg.mlp;
    mc.seed = cfg.seed;
    Mlp mlp(static_cast<std::size_t>(x.cols()), classes, mc);
    mlp.fit(x_train, y_train);
    prob = mlp.predict(x_test);
  }
  r.test = compute_metrics(y_test, prob);
  return r;
}

}  // namespace mentor
