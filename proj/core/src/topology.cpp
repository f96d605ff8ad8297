#include "aimvqe/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "aimvqe/errors.hpp"

namespace aimvqe {

namespace {

std::vector<std::vector<int>> adjacency(const CouplingMap& map) {
  std::vector<std::vector<int>> adj;
  adj.resize(size_t(map.n_physical));
  for (const auto& [a, b] : map.edges) {
    adj[size_t(a)].push_back(b);
    adj[size_t(b)].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

// Distances from src to every node; unreachable nodes stay at -1.
std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj,
                               int src) {
  std::vector<int> dist(adj.size(), -1);
  dist[size_t(src)] = 0;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[size_t(u)]) {
      if (dist[size_t(v)] < 0) {
        dist[size_t(v)] = dist[size_t(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

void check_connected(const CouplingMap& map,
                     const std::vector<std::vector<int>>& adj) {
  if (map.n_physical == 0) return;
  const auto dist = bfs_distances(adj, 0);
  for (int q = 0; q < map.n_physical; ++q) {
    if (dist[size_t(q)] < 0) {
      throw DisconnectedMap("physical qubit " + std::to_string(q) +
                            " is unreachable from qubit 0");
    }
  }
}

// Shortest path src -> dst as a vertex list, neighbors explored in ascending
// order so the result is deterministic.
std::vector<int> bfs_path(const std::vector<std::vector<int>>& adj, int src,
                          int dst) {
  std::vector<int> parent(adj.size(), -1);
  std::vector<char> seen(adj.size(), 0);
  seen[size_t(src)] = 1;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (u == dst) break;
    for (int v : adj[size_t(u)]) {
      if (!seen[size_t(v)]) {
        seen[size_t(v)] = 1;
        parent[size_t(v)] = u;
        queue.push_back(v);
      }
    }
  }
  if (!seen[size_t(dst)]) {
    throw DisconnectedMap("no path between physical qubits " +
                          std::to_string(src) + " and " + std::to_string(dst));
  }
  std::vector<int> path;
  for (int v = dst; v != -1; v = parent[size_t(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

constexpr std::pair<int, int> kImpurityPairs[4] = {
    {0, 2}, {0, 3}, {1, 2}, {1, 3}};

// Visits every injection of 6 logical qubits into the physical register in
// lexicographic mapping order.
template <typename Visit>
void enumerate_injections(int n_physical, Visit&& visit) {
  std::vector<int> mapping(6, -1);
  std::vector<char> used(size_t(n_physical), 0);
  auto recurse = [&](auto&& self, int position) -> void {
    if (position == 6) {
      visit(mapping);
      return;
    }
    for (int phys = 0; phys < n_physical; ++phys) {
      if (used[size_t(phys)]) continue;
      used[size_t(phys)] = 1;
      mapping[size_t(position)] = phys;
      self(self, position + 1);
      used[size_t(phys)] = 0;
    }
  };
  recurse(recurse, 0);
}

}  // namespace

CouplingMap make_coupling_map(int n_physical,
                              std::vector<std::pair<int, int>> edges) {
  if (n_physical < 0) {
    throw IndexOutOfRange("physical qubit count must be non-negative, got " +
                          std::to_string(n_physical));
  }
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_physical || b >= n_physical) {
      throw IndexOutOfRange("edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") outside register of " +
                            std::to_string(n_physical) + " qubits");
    }
    if (a == b) {
      throw IndexOutOfRange("self-loop on physical qubit " +
                            std::to_string(a));
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  CouplingMap map;
  map.n_physical = n_physical;
  map.edges = std::move(edges);
  check_connected(map, adjacency(map));
  return map;
}

CouplingMap default_heavy_hex_map() {
  return make_coupling_map(7, {{0, 1}, {1, 2}, {1, 3}, {3, 5}, {4, 5}, {5, 6}});
}

int graph_distance(const CouplingMap& map, int a, int b) {
  if (a < 0 || b < 0 || a >= map.n_physical || b >= map.n_physical) {
    throw IndexOutOfRange("physical qubit outside register of " +
                          std::to_string(map.n_physical));
  }
  if (a == b) return 0;
  const auto dist = bfs_distances(adjacency(map), a);
  if (dist[size_t(b)] < 0) {
    throw DisconnectedMap("no path between physical qubits " +
                          std::to_string(a) + " and " + std::to_string(b));
  }
  return dist[size_t(b)];
}

int placement_score(const CouplingMap& map, const std::vector<int>& mapping) {
  if (mapping.size() < 4) {
    throw DimensionMismatch("placement must cover the four impurity qubits");
  }
  const auto adj = adjacency(map);
  int score = 0;
  for (const auto& [la, lb] : kImpurityPairs) {
    const auto dist = bfs_distances(adj, mapping[size_t(la)]);
    const int d = dist[size_t(mapping[size_t(lb)])];
    if (d < 0) {
      throw DisconnectedMap("impurity qubits lie in different components");
    }
    score += d;
  }
  return score;
}

PresetPlacements preset_placements(const CouplingMap& map) {
  if (map.n_physical < 6) {
    throw TooSmallMap("placement presets need at least 6 physical qubits, "
                      "got " + std::to_string(map.n_physical));
  }
  const auto adj = adjacency(map);
  check_connected(map, adj);
  std::vector<std::vector<int>> dist;
  dist.reserve(size_t(map.n_physical));
  for (int q = 0; q < map.n_physical; ++q) {
    dist.push_back(bfs_distances(adj, q));
  }
  auto score_of = [&dist](const std::vector<int>& mapping) {
    int score = 0;
    for (const auto& [la, lb] : kImpurityPairs) {
      score += dist[size_t(mapping[size_t(la)])][size_t(mapping[size_t(lb)])];
    }
    return score;
  };

  // First pass: min/max scorers (lexicographic iteration order makes the
  // first hit the lexicographically smallest) and the full score multiset.
  std::vector<int> scores;
  std::vector<int> best_min, best_max;
  int min_score = std::numeric_limits<int>::max();
  int max_score = std::numeric_limits<int>::min();
  enumerate_injections(map.n_physical, [&](const std::vector<int>& mapping) {
    const int s = score_of(mapping);
    scores.push_back(s);
    if (s < min_score) {
      min_score = s;
      best_min = mapping;
    }
    if (s > max_score) {
      max_score = s;
      best_max = mapping;
    }
  });

  // Median score over all injections (lower middle for even counts), then the
  // lexicographically smallest mapping achieving it.
  std::vector<int> sorted_scores = scores;
  const size_t mid = (sorted_scores.size() - 1) / 2;
  std::nth_element(sorted_scores.begin(), sorted_scores.begin() + long(mid),
                   sorted_scores.end());
  const int median_score = sorted_scores[mid];
  std::vector<int> best_median;
  enumerate_injections(map.n_physical, [&](const std::vector<int>& mapping) {
    if (best_median.empty() && score_of(mapping) == median_score) {
      best_median = mapping;
    }
  });

  PresetPlacements presets;
  presets.config_a = Placement{"Config-A", best_min};
  presets.config_b = Placement{"Config-B", best_median};
  presets.config_c = Placement{"Config-C", best_max};
  return presets;
}

RoutedCircuit route_circuit(const Circuit& c, const CouplingMap& map,
                            const Placement& placement) {
  if (c.n_qubits > map.n_physical) {
    throw WidthMismatch("circuit needs " + std::to_string(c.n_qubits) +
                        " qubits but the map has " +
                        std::to_string(map.n_physical));
  }
  if (int(placement.mapping.size()) != c.n_qubits) {
    throw DimensionMismatch("placement covers " +
                            std::to_string(placement.mapping.size()) +
                            " logical qubits, circuit has " +
                            std::to_string(c.n_qubits));
  }
  const auto adj = adjacency(map);
  check_connected(map, adj);

  std::vector<int> l2p = placement.mapping;
  std::vector<int> p2l(size_t(map.n_physical), -1);
  for (int l = 0; l < c.n_qubits; ++l) {
    const int p = l2p[size_t(l)];
    if (p < 0 || p >= map.n_physical) {
      throw IndexOutOfRange("placement maps logical qubit " +
                            std::to_string(l) + " outside the register");
    }
    if (p2l[size_t(p)] != -1) {
      throw DimensionMismatch("placement is not injective at physical qubit " +
                              std::to_string(p));
    }
    p2l[size_t(p)] = l;
  }

  // Expand multi-qubit evolutions so only CNOT/SWAP need adjacency.
  Circuit expanded(c.n_qubits);
  expanded.param_names = c.param_names;
  for (const Gate& g : c.gates) {
    if (g.kind == GateKind::PauliEvolution) {
      Circuit holder(c.n_qubits);
      holder.param_names = c.param_names;
      holder.gates.push_back(g);
      const Circuit native = transpile_to_native(holder);
      expanded.gates.insert(expanded.gates.end(), native.gates.begin(),
                            native.gates.end());
    } else {
      expanded.gates.push_back(g);
    }
  }

  RoutedCircuit out;
  out.circuit = Circuit(map.n_physical);
  out.circuit.param_names = c.param_names;

  auto swap_physical = [&](int pa, int pb) {
    Gate g;
    g.kind = GateKind::SWAP;
    g.q0 = pa;
    g.q1 = pb;
    out.circuit.gates.push_back(g);
    const int la = p2l[size_t(pa)], lb = p2l[size_t(pb)];
    p2l[size_t(pa)] = lb;
    p2l[size_t(pb)] = la;
    if (la >= 0) l2p[size_t(la)] = pb;
    if (lb >= 0) l2p[size_t(lb)] = pa;
  };

  for (const Gate& g : expanded.gates) {
    if (!g.is_two_qubit()) {
      Gate mapped = g;
      mapped.q0 = l2p[size_t(g.q0)];
      out.circuit.gates.push_back(mapped);
      continue;
    }
    // Walk the control toward the target until they are adjacent.
    std::vector<int> path =
        bfs_path(adj, l2p[size_t(g.q0)], l2p[size_t(g.q1)]);
    while (path.size() > 2) {
      swap_physical(path[0], path[1]);
      path.erase(path.begin());
    }
    Gate mapped = g;
    mapped.q0 = l2p[size_t(g.q0)];
    mapped.q1 = l2p[size_t(g.q1)];
    out.circuit.gates.push_back(mapped);
  }
  out.final_permutation = l2p;
  return out;
}

}  // namespace aimvqe
