#pragma once

#include "mentor/graph.hpp"
#include "mentor/teams.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace mentor {

/// A dataset on disk:
///   edges.tsv   header "src\tdst", one edge per line
///   nodes.csv   header "node_id,f0,f1,...", one row per node
///   teams.json  [{"id": int, "members": [int], "label": int}, ...]
///   meta.json   {"directed", "num_classes", "generator", "seed", "params"}
struct Bundle {
  Graph graph;
  TeamSet teams;
  nlohmann::json meta = nlohmann::json::object();
};

void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);
Bundle read_bundle(const std::filesystem::path& dir, bool dedup_edges = true);

// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

}  // namespace mentor
