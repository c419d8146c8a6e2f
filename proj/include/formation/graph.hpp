#pragma once

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "formation/types.hpp"

namespace formation {

using NeighborSet = std::set<AgentId>;
using Edge = std::pair<AgentId, AgentId>;

/// Range-induced undirected graph among followers.
class CommGraph {
 public:
  CommGraph() = default;
  /// Builds from an undirected edge list; both orientations are inserted.
  CommGraph(int n, const std::vector<Edge>& edges);

  int size() const { return static_cast<int>(neighbors_.size()); }
  const NeighborSet& neighbors(AgentId i) const;
  bool connected(AgentId i, AgentId j) const;
  /// Edges with first < second, sorted.
  std::vector<Edge> edges() const;

  bool operator==(const CommGraph&) const = default;

 private:
  std::vector<NeighborSet> neighbors_;
};

/// The subgraph actually used by the estimator and controller: symmetric
/// follower neighbor sets plus the directed leader edges (0 -> i).
class ControlGraph {
 public:
  ControlGraph() = default;
  /// Throws InvariantError on self-loops, out-of-range ids or asymmetry.
  ControlGraph(std::vector<NeighborSet> follower_neighbors, std::vector<bool> leader_flags);

  static ControlGraph from_edges(int n, const std::vector<Edge>& edges,
                                 const std::vector<AgentId>& leader_neighbors);

  int size() const { return static_cast<int>(neighbors_.size()); }
  const NeighborSet& neighbors(AgentId i) const;
  bool leader_flag(AgentId i) const;
  const std::vector<NeighborSet>& follower_neighbors() const { return neighbors_; }
  const std::vector<bool>& leader_flags() const { return leader_flags_; }
  std::vector<Edge> edges() const;
  std::vector<AgentId> leader_neighbors() const;

  bool operator==(const ControlGraph&) const = default;

 private:
  std::vector<NeighborSet> neighbors_;
  std::vector<bool> leader_flags_;
};

struct GraphMatrices {
  Mat adjacency;  // A_F
  Mat laplacian;  // L_F
  Mat leader;     // B (diagonal)
  Mat h;          // L_F + B
};

/// Edge (i,j) iff ||p_i - p_j|| <= range. Throws InputError on non-finite input.
CommGraph build_comm_graph(std::span<const Vec> positions, double range);
/// Row i of `positions` is follower i+1.
CommGraph build_comm_graph(const Mat& positions, double range);

GraphMatrices graph_matrices(const ControlGraph& ctrl);

/// Breadth-first reachability from the leader through leader edges and then
/// undirected follower edges.
bool has_spanning_tree(const ControlGraph& ctrl);

/// Smallest eigenvalue of the symmetric matrix H = L_F + B.
double h_min_eigenvalue(const GraphMatrices& m);

/// Control edges that are not present in the communication graph.
std::vector<Edge> stretched_edges(const ControlGraph& ctrl, const CommGraph& comm);
bool is_subgraph_of(const ControlGraph& ctrl, const CommGraph& comm);

/// (N̄_a - {b}) ⊆ N_b and (N̄_b - {a}) ⊆ N_a.
bool check_assumption6(const CommGraph& comm, const ControlGraph& ctrl, AgentId a, AgentId b);

/// Rewires the control graph when agents a and b trade goal slots. Leader
/// flags travel with the slot. Throws AssumptionError if check_assumption6
/// fails against `comm`.
ControlGraph exchange_neighbors(const CommGraph& comm, const ControlGraph& ctrl, AgentId a,
                                AgentId b);

}  // namespace formation
