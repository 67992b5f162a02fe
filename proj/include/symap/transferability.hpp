#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "symap/error.hpp"
#include "symap/kinematics.hpp"

namespace symap {

// Workspace-scale penalty: the destination's scale divided by the larger of
// the two.  Equal sizes give 1; hopping into the smaller agent of a pair is
// discounted while hopping into the larger one is not.
inline double length_ratio(double length_from, double length_to) {
  detail::require(length_from > 0.0 && length_to > 0.0,
                  "agent lengths must be positive");
  return length_to / std::max(length_from, length_to);
}

namespace detail {

inline void require_comparable(const WorkspaceGrid& a, const WorkspaceGrid& b) {
  a.validate();
  b.validate();
  require(a.compatible_with(b),
          "workspace grids were sampled on different lattices and cannot "
          "be compared cell by cell");
  require(!a.cells.empty(), "source workspace grid has no occupied cells");
}

}  // namespace detail

// Fraction of the source agent's occupied cells where the destination is at
// least as manipulable.  Cells the destination never reached count as zero
// manipulability there.
inline double sufficient_ratio(const WorkspaceGrid& from,
                               const WorkspaceGrid& to) {
  detail::require_comparable(from, to);
  long long sufficient = 0;
  for (const auto& [cell, m_from] : from.cells) {
    const auto it = to.cells.find(cell);
    const double m_to = it == to.cells.end() ? 0.0 : it->second;
    if (m_to - m_from >= 0.0) ++sufficient;
  }
  return static_cast<double>(sufficient) /
         static_cast<double>(from.cells.size());
}

// How badly the destination underperforms on the cells it loses: a
// manipulability-weighted log ratio summed over the lack region and squashed
// through a sigmoid.  An empty lack region means nothing is missing at all,
// which reports as 0 rather than sigmoid(0).
inline double dissimilarity(const WorkspaceGrid& from,
                            const WorkspaceGrid& to) {
  constexpr double absent_floor = 1e-6;
  detail::require_comparable(from, to);
  double sum = 0.0;
  bool any_lack = false;
  for (const auto& [cell, m_from] : from.cells) {
    const auto it = to.cells.find(cell);
    const double m_to = it == to.cells.end() ? 0.0 : it->second;
    if (m_to - m_from >= 0.0) continue;
    any_lack = true;
    sum += m_from * std::log(m_from / std::max(m_to, absent_floor));
  }
  if (!any_lack) return 0.0;
  const double sig = 1.0 / (1.0 + std::exp(-sum));
  // The sigmoid saturates to exactly 1.0 in double arithmetic for large
  // sums; keep the value strictly below 1 so downstream algebra (and the
  // documented range) stays honest.
  return std::min(sig, std::nexttoward(1.0, 0.0));
}

// Sensing-quality discount: the best sensor in the system against the worst
// sensor in this pair.
inline double alpha_for_pair(double sigma_a, double sigma_b,
                             double sigma_best) {
  detail::require(sigma_a > 0.0 && sigma_b > 0.0 && sigma_best > 0.0,
                  "sensor noise levels must be positive");
  detail::require(sigma_best <= std::min(sigma_a, sigma_b),
                  "the system-best sensor cannot be worse than this pair");
  return sigma_best / std::max(sigma_a, sigma_b);
}

inline double transferability_value(double alpha, double length,
                                    double sufficient, double dissim) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  detail::require(length > 0.0 && length <= 1.0,
                  "length ratio must lie in (0, 1]");
  detail::require(sufficient >= 0.0 && sufficient <= 1.0,
                  "sufficient ratio must lie in [0, 1]");
  detail::require(dissim >= 0.0 && dissim < 1.0,
                  "dissimilarity must lie in [0, 1)");
  return alpha * length * (sufficient + (1.0 - dissim) * (1.0 - sufficient));
}

// One directed hop with every factor that produced its value, so the number
// can be audited: value == alpha * length * (S + (1 - D)(1 - S)) always
// holds to within 1e-12.
struct TransferabilityReport {
  std::string from_agent, to_agent;
  double alpha = 1.0;
  double length = 1.0;       // L
  double sufficient = 0.0;   // S
  double dissim = 0.0;       // D
  double value = 0.0;        // T

  static constexpr double invariant_tolerance = 1e-12;

  void validate() const {
    detail::require(!from_agent.empty() && !to_agent.empty(),
                    "transferability report must name both agents");
    const double expected =
        transferability_value(alpha, length, sufficient, dissim);
    detail::require(std::abs(value - expected) <= invariant_tolerance,
                    "transferability report fails its defining identity");
  }
};

inline TransferabilityReport transferability(const AgentModel& from,
                                             const AgentModel& to,
                                             const WorkspaceGrid& grid_from,
                                             const WorkspaceGrid& grid_to,
                                             double sigma_best) {
  detail::require(grid_from.agent == from.name && grid_to.agent == to.name,
                  "grids do not belong to the given agents");
  TransferabilityReport r;
  r.from_agent = from.name;
  r.to_agent = to.name;
  r.alpha =
      alpha_for_pair(from.sensor_noise_sigma, to.sensor_noise_sigma, sigma_best);
  r.length = length_ratio(from.total_length(), to.total_length());
  r.sufficient = sufficient_ratio(grid_from, grid_to);
  r.dissim = dissimilarity(grid_from, grid_to);
  r.value = transferability_value(r.alpha, r.length, r.sufficient, r.dissim);
  r.validate();
  return r;
}

// Multi-hop transfer quality: the product of the hop values, multiplied
// left to right in hop order.
inline double chain_transferability(const std::vector<double>& hop_values) {
  detail::require(!hop_values.empty(), "chain has no hops");
  double product = 1.0;
  for (const double t : hop_values) {
    detail::require(t >= 0.0 && t <= 1.0, "hop values must lie in [0, 1]");
    product *= t;
  }
  return product;
}

// Model-count economics of a mixed fleet: training one model per
// human-robot pair versus chaining every agent along one path.
inline std::pair<long long, long long> min_models(long long n_humans,
                                                  long long n_robots) {
  detail::require(n_humans >= 1 && n_robots >= 1,
                  "a fleet needs at least one agent of each kind");
  return {n_humans * n_robots, n_humans + n_robots - 1};
}

// ---------------------------------------------------------------------------
// Fleet planning: where to attach a new agent.

enum class AgentKind { human, robot };

inline const char* to_string(AgentKind k) {
  return k == AgentKind::human ? "human" : "robot";
}

inline AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "human") return AgentKind::human;
  if (s == "robot") return AgentKind::robot;
  throw ValidationError("unknown agent kind: '" + s + "'");
}

struct FleetAgent {
  std::string id;
  AgentKind kind = AgentKind::robot;
};

// A trained pair model: usable in both directions, each with its own
// transferability.
struct FleetEdge {
  std::string agent_a, agent_b;
  double t_ab = 0.0;  // transferability a -> b
  double t_ba = 0.0;  // transferability b -> a
};

struct FleetGraph {
  std::vector<FleetAgent> agents;
  std::vector<FleetEdge> edges;

  bool has_agent(const std::string& id) const {
    for (const auto& a : agents)
      if (a.id == id) return true;
    return false;
  }

  const FleetAgent& agent(const std::string& id) const {
    for (const auto& a : agents)
      if (a.id == id) return a;
    throw ValidationError("fleet has no agent '" + id + "'");
  }

  void validate() const {
    detail::require(!agents.empty(), "fleet has no agents");
    std::set<std::string> ids;
    for (const auto& a : agents) {
      detail::require(!a.id.empty(), "fleet agent ids must not be empty");
      detail::require(ids.insert(a.id).second,
                      "duplicate fleet agent '" + a.id + "'");
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : edges) {
      detail::require(ids.count(e.agent_a) && ids.count(e.agent_b),
                      "fleet edge references an unknown agent");
      detail::require(e.agent_a != e.agent_b, "fleet edges must join two agents");
      detail::require(e.t_ab >= 0.0 && e.t_ab <= 1.0 && e.t_ba >= 0.0 &&
                          e.t_ba <= 1.0,
                      "edge transferability must lie in [0, 1]");
      auto key = std::minmax(e.agent_a, e.agent_b);
      detail::require(seen.insert({key.first, key.second}).second,
                      "duplicate fleet edge between '" + e.agent_a + "' and '" +
                          e.agent_b + "'");
    }
  }

  // Connected components over the undirected edge set, each sorted.
  std::vector<std::vector<std::string>> components() const {
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& a : agents) adjacency[a.id];
    for (const auto& e : edges) {
      adjacency[e.agent_a].push_back(e.agent_b);
      adjacency[e.agent_b].push_back(e.agent_a);
    }
    std::set<std::string> unseen;
    for (const auto& a : agents) unseen.insert(a.id);
    std::vector<std::vector<std::string>> comps;
    while (!unseen.empty()) {
      std::vector<std::string> comp;
      std::vector<std::string> frontier{*unseen.begin()};
      unseen.erase(unseen.begin());
      while (!frontier.empty()) {
        const std::string node = frontier.back();
        frontier.pop_back();
        comp.push_back(node);
        for (const auto& next : adjacency[node]) {
          const auto it = unseen.find(next);
          if (it != unseen.end()) {
            unseen.erase(it);
            frontier.push_back(next);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end());
    return comps;
  }
};

// A prospective pairing for the agent being added, with the transferability
// of both directions of the would-be model.
struct CandidateAttachment {
  std::string attach_to;
  double t_existing_to_new = 0.0;
  double t_new_to_existing = 0.0;
};

// worst_counterpart: maximize the weakest counterpart's best route, so every
// operator/device keeps a usable connection.  best_counterpart: maximize the
// single strongest route instead.
enum class PlanObjective { worst_counterpart, best_counterpart };

inline const char* to_string(PlanObjective o) {
  return o == PlanObjective::worst_counterpart ? "worst_counterpart"
                                               : "best_counterpart";
}

struct PathResult {
  std::vector<std::string> nodes;  // source first
  double product = 0.0;

  int hops() const { return static_cast<int>(nodes.size()) - 1; }
};

struct CandidateAudit {
  std::string attach_to;
  std::vector<std::pair<std::string, PathResult>> per_counterpart;
  double objective_value = 0.0;
  bool long_path = false;  // some counterpart's best route needs > 2 hops
};

struct ChainPlan {
  std::string new_agent;
  AgentKind new_kind = AgentKind::robot;
  PlanObjective objective = PlanObjective::worst_counterpart;
  std::string chosen;
  double chosen_value = 0.0;
  bool chosen_long_path = false;
  std::vector<CandidateAudit> audits;  // sorted by candidate id
};

namespace detail {

struct DirectedEdge {
  std::string to;
  double t = 0.0;
};

// Best simple-path product between two nodes, ties broken toward fewer hops
// and then the lexicographically smaller node sequence.  Max-product
// Dijkstra is exact while products stay positive: a positive suffix factor
// preserves the preference order between any two prefixes.  A zero edge
// breaks that monotonicity (a strictly better prefix and a worse one both
// collapse to zero), but the best product is zero only when every route is
// zero -- and then the preference degenerates to fewest hops + lex order,
// which a second pass resolves exactly.
inline PathResult best_path(
    const std::map<std::string, std::vector<DirectedEdge>>& graph,
    const std::string& source, const std::string& target) {
  struct Entry {
    double product;
    std::vector<std::string> nodes;

    bool operator<(const Entry& other) const {  // priority: worse < better
      if (product != other.product) return product < other.product;
      if (nodes.size() != other.nodes.size())
        return nodes.size() > other.nodes.size();
      return nodes > other.nodes;
    }
  };
  const auto search = [&](bool by_product) -> PathResult {
    std::priority_queue<Entry> queue;
    std::set<std::string> settled;
    queue.push({1.0, {source}});
    while (!queue.empty()) {
      Entry entry = queue.top();
      queue.pop();
      const std::string& node = entry.nodes.back();
      if (settled.count(node)) continue;
      settled.insert(node);
      if (node == target) return {entry.nodes, entry.product};
      const auto it = graph.find(node);
      if (it == graph.end()) continue;
      for (const auto& edge : it->second) {
        if (settled.count(edge.to)) continue;
        Entry next{by_product ? entry.product * edge.t : 1.0, entry.nodes};
        next.nodes.push_back(edge.to);
        queue.push(std::move(next));
      }
    }
    return {};  // unreachable
  };

  PathResult best = search(true);
  if (best.product > 0.0 || best.nodes.empty()) return best;
  PathResult shortest = search(false);
  shortest.product = 0.0;
  return shortest;
}

}  // namespace detail

// Evaluates every candidate pairing for a new agent.  Routes always run in
// drive direction -- human toward robot -- so a new robot is judged by the
// paths from each human into it, a new human by its paths out to each robot.
inline ChainPlan plan_chain(const FleetGraph& fleet,
                            const std::string& new_agent, AgentKind new_kind,
                            std::vector<CandidateAttachment> candidates,
                            PlanObjective objective = PlanObjective::worst_counterpart) {
  fleet.validate();
  detail::require(!fleet.has_agent(new_agent),
                  "agent '" + new_agent + "' is already part of the fleet");
  detail::require(!candidates.empty(), "no candidate attachments given");

  const auto comps = fleet.components();
  if (comps.size() > 1) {
    std::string msg = "fleet is disconnected:";
    for (const auto& comp : comps) {
      msg += " {";
      for (std::size_t i = 0; i < comp.size(); ++i)
        msg += (i ? "," : "") + comp[i];
      msg += "}";
    }
    throw ValidationError(msg);
  }

  std::set<std::string> seen_candidates;
  for (const auto& c : candidates) {
    detail::require(fleet.has_agent(c.attach_to),
                    "candidate attachment '" + c.attach_to +
                        "' is not in the fleet");
    detail::require(seen_candidates.insert(c.attach_to).second,
                    "duplicate candidate attachment '" + c.attach_to + "'");
    detail::require(c.t_existing_to_new >= 0.0 && c.t_existing_to_new <= 1.0 &&
                        c.t_new_to_existing >= 0.0 && c.t_new_to_existing <= 1.0,
                    "candidate transferability must lie in [0, 1]");
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.attach_to < b.attach_to; });

  std::vector<std::string> counterparts;
  for (const auto& a : fleet.agents)
    if (a.kind != new_kind) counterparts.push_back(a.id);
  std::sort(counterparts.begin(), counterparts.end());
  detail::require(!counterparts.empty(),
                  "fleet has no agents of the opposite kind to serve");

  std::map<std::string, std::vector<detail::DirectedEdge>> base_graph;
  for (const auto& e : fleet.edges) {
    base_graph[e.agent_a].push_back({e.agent_b, e.t_ab});
    base_graph[e.agent_b].push_back({e.agent_a, e.t_ba});
  }
  for (auto& [node, edges] : base_graph)
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) { return a.to < b.to; });

  ChainPlan plan;
  plan.new_agent = new_agent;
  plan.new_kind = new_kind;
  plan.objective = objective;

  for (const auto& candidate : candidates) {
    auto graph = base_graph;
    graph[candidate.attach_to].push_back({new_agent, candidate.t_existing_to_new});
    graph[new_agent].push_back({candidate.attach_to, candidate.t_new_to_existing});

    CandidateAudit audit;
    audit.attach_to = candidate.attach_to;
    bool first = true;
    for (const auto& counterpart : counterparts) {
      const PathResult path =
          new_kind == AgentKind::robot
              ? detail::best_path(graph, counterpart, new_agent)
              : detail::best_path(graph, new_agent, counterpart);
      if (path.hops() > 2) audit.long_path = true;
      if (first) {
        audit.objective_value = path.product;
        first = false;
      } else if (objective == PlanObjective::worst_counterpart) {
        audit.objective_value = std::min(audit.objective_value, path.product);
      } else {
        audit.objective_value = std::max(audit.objective_value, path.product);
      }
      audit.per_counterpart.emplace_back(counterpart, path);
    }
    plan.audits.push_back(std::move(audit));
  }

  const CandidateAudit* best = nullptr;
  for (const auto& audit : plan.audits)
    if (!best || audit.objective_value > best->objective_value) best = &audit;
  plan.chosen = best->attach_to;
  plan.chosen_value = best->objective_value;
  plan.chosen_long_path = best->long_path;
  return plan;
}

}  // namespace symap
