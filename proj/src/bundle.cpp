#include "mentor/bundle.hpp"

#include "mentor/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mentor {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  return in;
}

template <typename T>
T parse_number(std::string_view text, const fs::path& file, std::size_t line) {
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError(file.string() + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view chomp(const std::string& s) {
  std::string_view v(s);
  while (!v.empty() && (v.back() == '\r' || v.back() == '\n')) v.remove_suffix(1);
  return v;
}

}  // namespace

void write_bundle(const fs::path& dir, const Bundle& bundle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create " + dir.string() + ": " + ec.message());

  const auto& g = bundle.graph;
  {
    auto out = open_out(dir / "edges.tsv");
    out << "src\tdst\n";
    for (const auto& e : g.edges()) out << e.src << '\t' << e.dst << '\n';
  }
  {
    auto out = open_out(dir / "nodes.csv");
    out << "node_id";
    for (std::size_t c = 0; c < g.feature_dim(); ++c) out << ",f" << c;
    out << '\n';
    const auto& x = g.features();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out << r;
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << format_real(x(r, c));
      out << '\n';
    }
  }
  {
    json teams = json::array();
    for (const auto& t : bundle.teams.teams()) {
      teams.push_back({{"id", t.id}, {"members", t.members}, {"label", t.label}});
    }
    auto out = open_out(dir / "teams.json");
    out << teams.dump() << '\n';
  }
  {
    json meta = bundle.meta;
    meta["directed"] = g.directed();
    meta["num_classes"] = bundle.teams.num_classes();
    if (!meta.contains("generator")) meta["generator"] = "external";
    if (!meta.contains("seed")) meta["seed"] = 0;
    if (!meta.contains("params")) meta["params"] = json::object();
    auto out = open_out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
}

Bundle read_bundle(const fs::path& dir, bool dedup_edges) {
  Bundle bundle;
  {
    auto in = open_in(dir / "meta.json");
    try {
      bundle.meta = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError("meta.json: " + std::string(e.what()));
    }
  }
  if (!bundle.meta.contains("directed") || !bundle.meta.contains("num_classes")) {
    throw ValidationError("meta.json requires 'directed' and 'num_classes'");
  }
  const bool directed = bundle.meta["directed"].get<bool>();
  const int num_classes = bundle.meta["num_classes"].get<int>();

  std::vector<std::vector<double>> rows;
  {
    const auto path = dir / "nodes.csv";
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("nodes.csv: missing header");
    const auto header = split(chomp(line), ',');
    if (header.empty() || header[0] != "node_id") throw ValidationError("nodes.csv: header must start with node_id");
    const std::size_t dim = header.size() - 1;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      auto text = chomp(line);
      if (text.empty()) continue;
      auto cols = split(text, ',');
      if (cols.size() != dim + 1) throw ValidationError("nodes.csv:" + std::to_string(lineno) + ": wrong column count");
      auto id = parse_number<long long>(cols[0], path, lineno);
      if (id != static_cast<long long>(rows.size())) {
        throw ValidationError("nodes.csv:" + std::to_string(lineno) + ": node ids must be 0..n-1 in order");
      }
      std::vector<double> row(dim);
      for (std::size_t c = 0; c < dim; ++c) row[c] = parse_number<double>(cols[c + 1], path, lineno);
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  const std::size_t dim = n ? rows[0].size() : 0;
  FeatureMatrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }

  std::vector<Edge> edges;
  {
    const auto path = dir / "edges.tsv";
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || chomp(line) != "src\tdst") throw ValidationError("edges.tsv: header must be 'src\\tdst'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      auto text = chomp(line);
      if (text.empty()) continue;
      auto cols = split(text, '\t');
      if (cols.size() != 2) throw ValidationError("edges.tsv:" + std::to_string(lineno) + ": expected two columns");
      edges.push_back({parse_number<NodeId>(cols[0], path, lineno), parse_number<NodeId>(cols[1], path, lineno)});
    }
  }
  bundle.graph = Graph::build(n, std::move(edges), std::move(features), directed, dedup_edges);

  {
    auto in = open_in(dir / "teams.json");
    std::vector<Team> teams;
    try {
      auto arr = json::parse(in);
      for (const auto& t : arr) {
        teams.push_back({t.at("id").get<TeamId>(), t.at("members").get<std::vector<NodeId>>(), t.at("label").get<int>()});
      }
    } catch (const json::exception& e) {
      throw ValidationError("teams.json: " + std::string(e.what()));
    }
    bundle.teams = TeamSet(std::move(teams), num_classes);
  }
  bundle.teams.validate_against(bundle.graph);
  return bundle;
}

}  // namespace mentor
