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
// Determinization, local determinization, pushing, minimization and
// equivalence for boolean and tropical machines.

#ifndef WFST_OPTIMIZE_H_
#define WFST_OPTIMIZE_H_

#include <optional>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

inline constexpr int kDefaultExpansionCap = 10000;

// Weighted subset construction. Acceptors may contain epsilon arcs (they
// are closed over during construction). Transducers must be functional and
// epsilon-free on the input side; outputs are delayed through residual
// strings, and multi-symbol outputs are emitted as chains of epsilon-input
// arcs (see IsSubsequential).
//
// Throws CapExceededError when more than expansion_cap subsets are created,
// UnsupportedError over REAL.
Machine Determinize(const Machine &m, int expansion_cap = kDefaultExpansionCap);

struct TwinWitness {
  StateId p = kNoState;
  StateId q = kNoState;
  // Common input cycle read from (p, q) back to (p, q).
  std::vector<Label> cycle;
  // Cycle weight at q minus cycle weight at p.
  Weight weight_mismatch = 0.0;
  // The cycle outputs differ (transducers).
  bool output_mismatch = false;
};

struct TwinReport {
  bool has_twin_property = true;
  std::optional<TwinWitness> witness;
};

// Polynomial test of the twins property on the input-synchronized square of
// m: every strongly connected component of co-reachable pairs must admit a
// consistent weight (and output-delay) potential. Acyclic machines pass
// without inspection; cyclic ones must be free of epsilon inputs.
TwinReport TwinsTest(const Machine &m);

// Applies the subset construction only at states with more than k outgoing
// arcs. Arcs sharing an input label at such a state are merged into one arc
// to a new state that fans out through epsilon-input arcs carrying the
// residual weights (and outputs). Always terminates; the result is
// equivalent to m.
Machine LocalDeterminize(const Machine &m, int k);

enum class PushMode { kWeights, kStrings };

// Weight pushing (tropical): reweights by the shortest distance to a final
// state so that each state's cheapest continuation costs 0; the start
// distance is folded into the start state's arcs and final weight.
// String pushing (functional transducers): hoists the longest common prefix
// of every state's future outputs toward the start.
// m must be trim (ContractError otherwise).
Machine Push(const Machine &m, PushMode mode);

// Minimal equivalent deterministic machine: trim, push weights (and output
// strings for transducers), then partition refinement over (ilabel, olabel,
// weight) triples. m must be deterministic (or subsequential for
// transducers).
Machine Minimize(const Machine &m);

// The label-encoded partition refinement step on its own (no pushing).
Machine MinimizeEncoded(const Machine &m);

// Canonical form comparison: determinize, minimize, renumber by BFS over
// sorted arcs, compare with a relative weight tolerance.
bool Equivalent(const Machine &a, const Machine &b, double tol = 1e-9);

// Removes arcs with epsilon on both sides (boolean/tropical).
Machine RemoveEpsilon(const Machine &m);

// BFS renumbering with arcs sorted by (ilabel, olabel, weight, nextstate
// discovery order). Two minimal deterministic machines are equivalent iff
// their canonical forms are equal.
Machine Canonicalize(const Machine &m);

}  // namespace wfst

#endif  // WFST_OPTIMIZE_H_
