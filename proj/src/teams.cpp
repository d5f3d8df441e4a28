#include "mentor/teams.hpp"

#include "mentor/error.hpp"

#include <algorithm>
#include <string>

namespace mentor {

TeamSet::TeamSet(std::vector<Team> teams, int num_classes) : teams_(std::move(teams)), num_classes_(num_classes) {
  if (num_classes_ < 1) throw ValidationError("num_classes must be >= 1");
  for (const auto& t : teams_) {
    if (t.label < 0 || t.label >= num_classes_) {
      throw ValidationError("team " + std::to_string(t.id) + " label " + std::to_string(t.label) +
                            " outside [0," + std::to_string(num_classes_) + ")");
    }
    auto sorted = t.members;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("team " + std::to_string(t.id) + " has repeated members");
    }
  }
}

std::vector<int> TeamSet::labels() const {
  std::vector<int> out;
  out.reserve(teams_.size());
  for (const auto& t : teams_) out.push_back(t.label);
  return out;
}

void TeamSet::validate_against(const Graph& graph) const {
  for (const auto& t : teams_) {
    for (NodeId v : t.members) {
      if (v < 0 || static_cast<std::size_t>(v) >= graph.num_nodes()) {
        throw ValidationError("team " + std::to_string(t.id) + " member " + std::to_string(v) + " not in graph");
      }
    }
  }
}

std::vector<std::vector<std::size_t>> TeamSet::memberships(std::size_t num_nodes) const {
  std::vector<std::vector<std::size_t>> out(num_nodes);
  for (std::size_t i = 0; i < teams_.size(); ++i) {
    for (NodeId v : teams_[i].members) out[static_cast<std::size_t>(v)].push_back(i);
  }
  return out;
}

}  // namespace mentor
