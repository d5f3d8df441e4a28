#pragma once

#include "mentor/graph.hpp"

#include <cstdint>
#include <vector>

namespace mentor {

using TeamId = std::int64_t;

struct Team {
  TeamId id{0};
  std::vector<NodeId> members;
  int label{0};
};

/// Labelled, possibly overlapping node subsets. Members are distinct within a team;
/// nodes may belong to several teams or to none.
class TeamSet {
 public:
  TeamSet() = default;
  TeamSet(std::vector<Team> teams, int num_classes);

  std::size_t size() const { return teams_.size(); }
  int num_classes() const { return num_classes_; }
  const Team& operator[](std::size_t i) const { return teams_[i]; }
  const std::vector<Team>& teams() const { return teams_; }
  std::vector<int> labels() const;

  /// Throws ValidationError when a member id does not exist in `graph`.
  void validate_against(const Graph& graph) const;

  /// For every node of an n-node graph, the indices of the teams containing it.
  std::vector<std::vector<std::size_t>> memberships(std::size_t num_nodes) const;

 private:
  std::vector<Team> teams_;
  int num_classes_{0};
};

}  // namespace mentor
