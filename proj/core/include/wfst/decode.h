// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Shortest distances, best paths, beam search over lazy cascades, lattice
// pruning and rescoring. Everything here works in the tropical semiring.

#ifndef WFST_DECODE_H_
#define WFST_DECODE_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

enum class ShortestDistanceAlgo { kAcyclic, kDijkstra, kBellmanFord };

// d[s] for every state id discovered from the start; unreached ids hold
// infinity. Indexed by state id.
using DistanceMap = std::vector<Weight>;

// Single-source distances from the start.
//   kAcyclic: topological order, O(V + E); ContractError on a cycle.
//   kDijkstra: best-first, O(E log V); ContractError on a negative weight.
//   kBellmanFord: FIFO relaxation, O(V E); ContractError on a negative cycle.
DistanceMap ShortestDistance(Fsm &m, ShortestDistanceAlgo algo);
DistanceMap ShortestDistance(const Machine &m, ShortestDistanceAlgo algo);

// Distance from every state to a final state.
DistanceMap ShortestDistanceToFinal(const Machine &m);

struct Path {
  std::vector<Label> input;   // Epsilons removed.
  std::vector<Label> output;  // Epsilons removed.
  std::vector<StateId> states;
  Weight weight = 0.0;
};

// Lowest-cost accepting path; nullopt when no final state is reachable.
// Ties go to the smaller final state id, then along the path to the smaller
// predecessor id and then the smaller arc labels.
std::optional<Path> BestPath(Fsm &m);
std::optional<Path> BestPath(const Machine &m);

// Observation acceptor O followed by the model stages (A, D, M, ...).
struct CascadeSpec {
  std::vector<std::shared_ptr<const Machine>> stages;
};

struct DecodeStats {
  size_t expanded_states = 0;  // States whose arcs were requested.
  size_t pruned_states = 0;    // Popped states dropped by the beam.
  size_t frames = 0;
};

struct DecodeResult {
  std::optional<Path> best;  // nullopt: nothing survived the beam.
  DecodeStats stats;
};

// Frame-synchronous Viterbi beam search. A frame is the number of
// observation symbols consumed (non-epsilon input labels on the composed
// machine). Within a frame states are popped in (cost, state id) order, the
// first pop is the frame's best, and any later state costing more than
// best + beam is dropped. beam = infinity gives the exact best path.
DecodeResult BeamDecode(Fsm &m, Weight beam);
// Builds (((O o A) o D) o M) from lazy pairwise compositions and searches it.
DecodeResult BeamDecode(const CascadeSpec &c, Weight beam);

// Keeps exactly the states and arcs on some accepting path whose cost is at
// most best + threshold. l must be acyclic.
Machine LatticePrune(const Machine &l, Weight threshold);

// BestPath(Compose(l, full)); nullopt when the composition is empty.
std::optional<Path> Rescore(const Machine &l, const Machine &full);

}  // namespace wfst

#endif  // WFST_DECODE_H_
