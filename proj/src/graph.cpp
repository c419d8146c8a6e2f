#include "formation/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include <Eigen/Eigenvalues>

#include "formation/errors.hpp"

namespace formation {

namespace {

void require_id(AgentId id, int n, const char* what) {
  if (id < 1 || id > n) {
    throw InputError(std::string(what) + ": agent id " + std::to_string(id) +
                     " outside 1.." + std::to_string(n));
  }
}

bool subset_without(const NeighborSet& set, AgentId removed, const NeighborSet& super) {
  return std::all_of(set.begin(), set.end(),
                     [&](AgentId j) { return j == removed || super.count(j) > 0; });
}

}  // namespace

CommGraph::CommGraph(int n, const std::vector<Edge>& edges) : neighbors_(n) {
  if (n < 0) throw InputError("CommGraph: negative agent count");
  for (auto [i, j] : edges) {
    require_id(i, n, "CommGraph");
    require_id(j, n, "CommGraph");
    if (i == j) throw InvariantError("CommGraph: self-loop at agent " + std::to_string(i));
    neighbors_[i - 1].insert(j);
    neighbors_[j - 1].insert(i);
  }
}

const NeighborSet& CommGraph::neighbors(AgentId i) const {
  require_id(i, size(), "CommGraph::neighbors");
  return neighbors_[i - 1];
}

bool CommGraph::connected(AgentId i, AgentId j) const { return neighbors(i).count(j) > 0; }

std::vector<Edge> CommGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 1; i <= size(); ++i) {
    for (AgentId j : neighbors_[i - 1]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

ControlGraph::ControlGraph(std::vector<NeighborSet> follower_neighbors,
                           std::vector<bool> leader_flags)
    : neighbors_(std::move(follower_neighbors)), leader_flags_(std::move(leader_flags)) {
  const int n = size();
  if (static_cast<int>(leader_flags_.size()) != n) {
    throw InvariantError("ControlGraph: " + std::to_string(leader_flags_.size()) +
                         " leader flags for " + std::to_string(n) + " followers");
  }
  for (int i = 1; i <= n; ++i) {
    for (AgentId j : neighbors_[i - 1]) {
      if (j < 1 || j > n) {
        throw InvariantError("ControlGraph: agent " + std::to_string(i) +
                             " lists unknown neighbor " + std::to_string(j));
      }
      if (j == i) throw InvariantError("ControlGraph: self-loop at agent " + std::to_string(i));
      if (neighbors_[j - 1].count(i) == 0) {
        throw InvariantError("ControlGraph: asymmetric neighbor sets, " + std::to_string(j) +
                             " in N(" + std::to_string(i) + ") but not the reverse");
      }
    }
  }
}

ControlGraph ControlGraph::from_edges(int n, const std::vector<Edge>& edges,
                                      const std::vector<AgentId>& leader_neighbors) {
  if (n < 0) throw InputError("ControlGraph: negative agent count");
  std::vector<NeighborSet> nbrs(n);
  std::vector<bool> flags(n, false);
  for (auto [i, j] : edges) {
    require_id(i, n, "ControlGraph edge");
    require_id(j, n, "ControlGraph edge");
    nbrs[i - 1].insert(j);
    nbrs[j - 1].insert(i);
  }
  for (AgentId i : leader_neighbors) {
    require_id(i, n, "ControlGraph leader edge");
    flags[i - 1] = true;
  }
  return ControlGraph(std::move(nbrs), std::move(flags));
}

const NeighborSet& ControlGraph::neighbors(AgentId i) const {
  require_id(i, size(), "ControlGraph::neighbors");
  return neighbors_[i - 1];
}

bool ControlGraph::leader_flag(AgentId i) const {
  require_id(i, size(), "ControlGraph::leader_flag");
  return leader_flags_[i - 1];
}

std::vector<Edge> ControlGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 1; i <= size(); ++i) {
    for (AgentId j : neighbors_[i - 1]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<AgentId> ControlGraph::leader_neighbors() const {
  std::vector<AgentId> out;
  for (int i = 1; i <= size(); ++i) {
    if (leader_flags_[i - 1]) out.push_back(i);
  }
  return out;
}

CommGraph build_comm_graph(std::span<const Vec> positions, double range) {
  if (positions.empty()) throw InputError("build_comm_graph: no agents");
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw InputError("build_comm_graph: range must be positive and finite");
  }
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i) {
    if (!positions[i].allFinite()) {
      throw InputError("build_comm_graph: non-finite position for agent " + std::to_string(i + 1));
    }
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[i] - positions[j]).norm() <= range) edges.emplace_back(i + 1, j + 1);
    }
  }
  return CommGraph(n, edges);
}

CommGraph build_comm_graph(const Mat& positions, double range) {
  std::vector<Vec> rows;
  rows.reserve(positions.rows());
  for (Eigen::Index i = 0; i < positions.rows(); ++i) rows.emplace_back(positions.row(i).transpose());
  return build_comm_graph(std::span<const Vec>(rows), range);
}

GraphMatrices graph_matrices(const ControlGraph& ctrl) {
  const int n = ctrl.size();
  GraphMatrices m;
  m.adjacency = Mat::Zero(n, n);
  m.leader = Mat::Zero(n, n);
  for (int i = 1; i <= n; ++i) {
    for (AgentId j : ctrl.neighbors(i)) m.adjacency(i - 1, j - 1) = 1.0;
    m.leader(i - 1, i - 1) = ctrl.leader_flag(i) ? 1.0 : 0.0;
  }
  m.laplacian = -m.adjacency;
  m.laplacian.diagonal() = m.adjacency.rowwise().sum();
  m.h = m.laplacian + m.leader;
  return m;
}

bool has_spanning_tree(const ControlGraph& ctrl) {
  const int n = ctrl.size();
  std::vector<bool> seen(n, false);
  std::queue<AgentId> frontier;
  for (AgentId i : ctrl.leader_neighbors()) {
    seen[i - 1] = true;
    frontier.push(i);
  }
  int reached = static_cast<int>(frontier.size());
  while (!frontier.empty()) {
    const AgentId i = frontier.front();
    frontier.pop();
    for (AgentId j : ctrl.neighbors(i)) {
      if (!seen[j - 1]) {
        seen[j - 1] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

double h_min_eigenvalue(const GraphMatrices& m) {
  if (m.h.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver(m.h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("h_min_eigenvalue: eigensolver failed");
  return solver.eigenvalues().minCoeff();
}

std::vector<Edge> stretched_edges(const ControlGraph& ctrl, const CommGraph& comm) {
  if (ctrl.size() != comm.size()) throw InputError("stretched_edges: graph sizes differ");
  std::vector<Edge> out;
  for (const Edge& e : ctrl.edges()) {
    if (!comm.connected(e.first, e.second)) out.push_back(e);
  }
  return out;
}

bool is_subgraph_of(const ControlGraph& ctrl, const CommGraph& comm) {
  return stretched_edges(ctrl, comm).empty();
}

bool check_assumption6(const CommGraph& comm, const ControlGraph& ctrl, AgentId a, AgentId b) {
  if (ctrl.size() != comm.size()) throw InputError("check_assumption6: graph sizes differ");
  require_id(a, ctrl.size(), "check_assumption6");
  require_id(b, ctrl.size(), "check_assumption6");
  if (a == b) throw InputError("check_assumption6: a pair needs two distinct agents");
  return subset_without(ctrl.neighbors(a), b, comm.neighbors(b)) &&
         subset_without(ctrl.neighbors(b), a, comm.neighbors(a));
}

ControlGraph exchange_neighbors(const CommGraph& comm, const ControlGraph& ctrl, AgentId a,
                                AgentId b) {
  if (!check_assumption6(comm, ctrl, a, b)) {
    throw AssumptionError("exchange_neighbors: neighbor-visibility assumption fails for (" +
                          std::to_string(a) + "," + std::to_string(b) + ")");
  }
  const NeighborSet& na = ctrl.neighbors(a);
  const NeighborSet& nb = ctrl.neighbors(b);

  NeighborSet new_a = nb;
  if (nb.count(a)) {
    new_a.erase(a);
    new_a.insert(b);
  }
  NeighborSet new_b = na;
  if (na.count(b)) {
    new_b.erase(b);
    new_b.insert(a);
  }

  std::vector<NeighborSet> next = ctrl.follower_neighbors();
  NeighborSet third_parties;
  std::set_union(na.begin(), na.end(), nb.begin(), nb.end(),
                 std::inserter(third_parties, third_parties.end()));
  third_parties.erase(a);
  third_parties.erase(b);
  for (AgentId m : third_parties) {
    NeighborSet& nm = next[m - 1];
    nm.erase(a);
    nm.erase(b);
    if (new_a.count(m)) nm.insert(a);
    if (new_b.count(m)) nm.insert(b);
  }
  next[a - 1] = std::move(new_a);
  next[b - 1] = std::move(new_b);

  std::vector<bool> flags = ctrl.leader_flags();
  const bool flag_a = flags[a - 1];
  flags[a - 1] = flags[b - 1];
  flags[b - 1] = flag_a;

  try {
    return ControlGraph(std::move(next), std::move(flags));
  } catch (const InvariantError& e) {
    throw InvariantError(std::string("exchange_neighbors produced an invalid graph: ") + e.what());
  }
}

}  // namespace formation
