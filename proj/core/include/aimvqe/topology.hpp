#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aimvqe/circuit.hpp"

namespace aimvqe {

// Undirected hardware connectivity graph. Build through make_coupling_map,
// which normalizes edges and rejects self-loops and disconnected graphs.
struct CouplingMap {
  int n_physical = 0;
  std::vector<std::pair<int, int>> edges;  // a < b, sorted, unique
};

CouplingMap make_coupling_map(int n_physical,
                              std::vector<std::pair<int, int>> edges);

// Seven-qubit heavy-hex style default: 0-1-2 row, 1-3-5 column, 4-5-6 row.
CouplingMap default_heavy_hex_map();

// Shortest-path edge count by breadth-first search.
int graph_distance(const CouplingMap& map, int a, int b);

// Injective logical -> physical assignment.
struct Placement {
  std::string name;
  std::vector<int> mapping;
};

struct PresetPlacements {
  Placement config_a;  // impurity blocks closest
  Placement config_b;  // median separation
  Placement config_c;  // impurity blocks farthest
};

// Sum of graph distances between the impurity blocks {0,1} and {2,3} of a
// six-qubit logical register under the given mapping.
int placement_score(const CouplingMap& map, const std::vector<int>& mapping);

// Exhaustive search over injections of six logical qubits: Config-A minimizes
// the impurity-block score, Config-C maximizes it, Config-B takes the median
// score; ties always break to the lexicographically smallest mapping.
PresetPlacements preset_placements(const CouplingMap& map);

struct RoutedCircuit {
  Circuit circuit;                     // on n_physical qubits
  std::vector<int> final_permutation;  // logical -> physical at circuit end
};

// Maps the circuit onto hardware: single-qubit gates relabel to their current
// physical home; distant two-qubit gates get SWAPs inserted greedily along a
// BFS shortest path (control moves toward target). Multi-qubit Pauli
// evolutions are expanded to native gates first so only CNOTs need routing.
RoutedCircuit route_circuit(const Circuit& c, const CouplingMap& map,
                            const Placement& placement);

}  // namespace aimvqe
