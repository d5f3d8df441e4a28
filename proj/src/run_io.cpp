#include "mentor/run_io.hpp"

#include "mentor/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace mentor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  return out;
}

void write_json(const fs::path& file, const json& j) {
  auto out = open_out(file);
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("missing " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed " + file.string() + ": " + e.what());
  }
}

void write_confusion(const fs::path& file, const ConfusionMatrix& m) {
  auto out = open_out(file);
  out << "true";
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << ",pred_" << c;
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << m(r, c);
    out << '\n';
  }
}

using Table = std::vector<std::vector<std::string>>;

Table read_csv(const fs::path& file, const std::vector<std::string>& expected_header) {
  std::ifstream in(file);
  if (!in) throw ValidationError("missing " + file.string());
  Table rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      if (cells != expected_header) throw ValidationError("unexpected header in " + file.string());
      header = false;
      continue;
    }
    if (cells.size() != expected_header.size()) throw ValidationError("ragged row in " + file.string());
    rows.push_back(std::move(cells));
  }
  if (header) throw ValidationError("empty table " + file.string());
  return rows;
}

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + s + "'");
  }
}

}  // namespace

std::string format_mean_std(const std::vector<double>& fractions) {
  if (fractions.empty()) return "n/a";
  double mean = 0.0;
  for (double f : fractions) mean += f;
  mean /= static_cast<double>(fractions.size());
  double var = 0.0;
  for (double f : fractions) var += (f - mean) * (f - mean);
  const double sd = fractions.size() > 1 ? std::sqrt(var / static_cast<double>(fractions.size() - 1)) : 0.0;
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * mean << " ± " << 100.0 * sd;
  return os.str();
}

void write_run_dir(const fs::path& dir, const RunReport& report, const json& extra) {
  fs::create_directories(dir);
  write_json(dir / "config.json", report.config.to_json());
  {
    auto out = open_out(dir / "history.csv");
    out << "epoch,train_loss,val_loss,val_acc\n";
    for (const auto& h : report.history) {
      out << h.epoch << ',' << format_real(h.train_loss) << ',' << format_real(h.val_loss) << ',' << format_real(h.val_acc) << '\n';
    }
  }
  json metrics = report.metrics_json();
  for (const auto& [k, v] : extra.items()) metrics[k] = v;
  write_json(dir / "metrics.json", metrics);
  write_confusion(dir / "confusion.csv", report.test.confusion);
  {
    auto out = open_out(dir / "channel_attention.csv");
    out << "team_id,gamma_T,gamma_C,gamma_L\n";
    for (auto t : report.test_indices) {
      const auto r = static_cast<Eigen::Index>(t);
      out << report.team_ids[t] << ',' << format_real(report.artifacts.gamma(r, 0)) << ','
          << format_real(report.artifacts.gamma(r, 1)) << ',' << format_real(report.artifacts.gamma(r, 2)) << '\n';
    }
  }
  std::vector<char> is_test(report.team_ids.size(), 0);
  for (auto t : report.test_indices) is_test[t] = 1;
  {
    auto out = open_out(dir / "node_importance.csv");
    out << "team_id,node_id,importance\n";
    for (std::size_t i = 0; i < report.importance.size(); ++i) {
      const auto t = static_cast<std::size_t>(report.forest_team[i]);
      if (!is_test[t]) continue;
      out << report.team_ids[t] << ',' << report.forest_original[i] << ',' << format_real(report.importance[i]) << '\n';
    }
  }
  {
    auto out = open_out(dir / "gini.csv");
    out << "team_id,gini\n";
    for (std::size_t t = 0; t < report.team_gini.size(); ++t) {
      if (is_test[t]) out << report.team_ids[t] << ',' << format_real(report.team_gini[t]) << '\n';
    }
  }
}

void write_baseline_dir(const fs::path& dir, const Bundle& bundle, const BaselineConfig& cfg,
                        const BaselineReport& report, const json& extra) {
  fs::create_directories(dir);
  write_json(dir / "config.json", cfg.to_json());
  json class_auroc = json::array();
  for (double a : report.test.class_auroc) class_auroc.push_back(std::isfinite(a) ? json(a) : json(nullptr));
  json metrics = {{"kind", "baseline"},
                  {"accuracy", report.test.accuracy},
                  {"auroc", std::isfinite(report.test.auroc) ? json(report.test.auroc) : json(nullptr)},
                  {"class_auroc", class_auroc},
                  {"test_size", report.test_indices.size()}};
  for (const auto& [k, v] : extra.items()) metrics[k] = v;
  write_json(dir / "metrics.json", metrics);
  write_confusion(dir / "confusion.csv", report.test.confusion);
  write_features_csv(dir / "features.csv", bundle.teams, report.features, report.feature_names);
}

void write_report(const std::vector<fs::path>& runs, const fs::path& out, int gini_bins) {
  if (runs.empty()) throw ValidationError("report needs at least one run directory");
  if (gini_bins < 1) throw ValidationError("gini_bins must be >= 1");

  struct Loaded {
    std::string name;
    json metrics;
    Table gamma;
    Table gini;
    std::vector<std::vector<long>> confusion;
  };
  std::vector<Loaded> loaded;
  for (const auto& dir : runs) {
    Loaded l;
    l.name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    l.metrics = read_json(dir / "metrics.json");
    if (!l.metrics.contains("accuracy")) throw ValidationError(dir.string() + "/metrics.json lacks accuracy");
    // baseline runs carry no attention tables
    if (l.metrics.value("kind", std::string("mentor")) != "baseline") {
      l.gamma = read_csv(dir / "channel_attention.csv", {"team_id", "gamma_T", "gamma_C", "gamma_L"});
      l.gini = read_csv(dir / "gini.csv", {"team_id", "gini"});
    }
    std::ifstream conf(dir / "confusion.csv");
    if (!conf) throw ValidationError("missing " + (dir / "confusion.csv").string());
    std::string line;
    std::getline(conf, line);
    while (std::getline(conf, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      std::vector<long> row;
      while (std::getline(ss, cell, ',')) row.push_back(static_cast<long>(to_double(cell)));
      l.confusion.push_back(std::move(row));
    }
    for (const auto& row : l.gamma) {
      for (std::size_t c = 1; c < 4; ++c) to_double(row[c]);
    }
    for (const auto& row : l.gini) to_double(row[1]);
    loaded.push_back(std::move(l));
  }

  fs::create_directories(out);
  {
    auto f = open_out(out / "ternary.csv");
    f << "run,team_id,gamma_T,gamma_C,gamma_L\n";
    for (const auto& l : loaded) {
      for (const auto& row : l.gamma) f << l.name << ',' << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << '\n';
    }
  }
  {
    auto f = open_out(out / "gini_hist.csv");
    f << "run,bin_lo,bin_hi,count\n";
    for (const auto& l : loaded) {
      std::vector<long> counts(static_cast<std::size_t>(gini_bins), 0);
      for (const auto& row : l.gini) {
        const double g = to_double(row[1]);
        auto b = static_cast<long>(std::floor(g * gini_bins));
        b = std::clamp<long>(b, 0, gini_bins - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < gini_bins; ++b) {
        f << l.name << ',' << format_real(static_cast<double>(b) / gini_bins) << ','
          << format_real(static_cast<double>(b + 1) / gini_bins) << ',' << counts[static_cast<std::size_t>(b)] << '\n';
      }
    }
  }
  {
    // confusion counts summed over runs with matching class count
    std::vector<std::vector<long>> total;
    for (const auto& l : loaded) {
      if (total.empty()) total.assign(l.confusion.size(), std::vector<long>(l.confusion.empty() ? 0 : l.confusion[0].size(), 0));
      if (l.confusion.size() != total.size()) throw ValidationError("runs disagree on class count");
      for (std::size_t r = 0; r < total.size(); ++r) {
        if (l.confusion[r].size() != total[r].size()) throw ValidationError("runs disagree on class count");
        for (std::size_t c = 0; c < total[r].size(); ++c) total[r][c] += l.confusion[r][c];
      }
    }
    auto f = open_out(out / "confusion.csv");
    f << "true";
    for (std::size_t c = 0; c < (total.empty() ? 0 : total[0].size()); ++c) f << ",pred_" << c;
    f << '\n';
    for (std::size_t r = 0; r < total.size(); ++r) {
      f << r;
      for (long v : total[r]) f << ',' << v;
      f << '\n';
    }
  }
  {
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> rows;
    for (const auto& l : loaded) {
      const auto dataset = l.metrics.value("dataset", std::string("?"));
      const auto model = l.metrics.value("model", std::string("?"));
      auto& entry = rows[{dataset, model}];
      entry.first.push_back(l.metrics.at("accuracy").get<double>());
      if (l.metrics.contains("auroc") && l.metrics["auroc"].is_number()) entry.second.push_back(l.metrics["auroc"].get<double>());
    }
    auto f = open_out(out / "summary.txt");
    f << std::left << std::setw(12) << "dataset" << std::setw(14) << "model" << std::setw(16) << "accuracy"
      << std::setw(16) << "auroc" << "runs\n";
    for (const auto& [key, vals] : rows) {
      f << std::left << std::setw(12) << key.first << std::setw(14) << key.second << std::setw(16)
        << format_mean_std(vals.first) << std::setw(16) << format_mean_std(vals.second) << vals.first.size() << '\n';
    }
  }
}

}  // namespace mentor
