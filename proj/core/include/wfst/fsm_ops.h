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
// Text serialization, trimming, basic constructors and the path-enumeration
// reference evaluator.
//
// Text format (whitespace separated, '#' starts a comment line):
//   src dst isym osym [weight]     transducer arc
//   src dst sym [weight]           acceptor arc
//   state [weight]                 final state
// The source of the first line is the start state; an omitted weight is One.

#ifndef WFST_FSM_OPS_H_
#define WFST_FSM_OPS_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

struct TextOptions {
  bool acceptor = false;
  // When a table is given, arc tokens are symbols resolved through it;
  // otherwise they are integer labels.
  std::shared_ptr<SymbolTable> isyms;
  std::shared_ptr<SymbolTable> osyms;
  // Unknown symbols are added to the tables instead of raising
  // ResolutionError.
  bool add_symbols = false;
};

Machine ReadText(std::string_view text, SemiringKind kind,
                 const TextOptions &opts = {});

// Canonical text: the start state's block first, then the other states in
// ascending order; each block lists the state's arcs in stored order and then
// its final line. Weights equal to One are omitted. Symbols are printed
// through the machine's tables when present.
std::string WriteText(const Machine &m, bool acceptor_format = false);

// Graphviz rendering for inspection.
std::string WriteDot(const Machine &m);

// Restricts m to states that are both accessible and coaccessible.
Machine Connect(const Machine &m);
std::vector<bool> AccessibleStates(const Machine &m);
std::vector<bool> CoaccessibleStates(const Machine &m);

// True iff no arc has an epsilon input and no state has two arcs sharing an
// input label.
bool IsDeterministic(const Machine &m);

// Like IsDeterministic, but also admits output chains: an epsilon-input arc
// is allowed as the single arc of a non-final state, or as a state's only
// epsilon arc when it leads through such chain states to an arcless final
// state. Transducer determinization emits multi-symbol outputs this way.
bool IsSubsequential(const Machine &m);

// Sum over all accepting paths whose input is `input` and (unless `output`
// is nullopt) whose output is `output`, of the path weight times the final
// weight. Computed by layer-by-layer path enumeration, so every distinct path
// contributes exactly once.
//
// max_path_len bounds the number of arcs in a path; when omitted a bound is
// derived that is exact for boolean and tropical machines without negative
// cycles. Under REAL, if paths longer than the bound can still contribute,
// DivergenceError is thrown.
Weight WeightOf(const Machine &m, std::span<const Label> input,
                std::optional<std::span<const Label>> output = std::nullopt,
                std::optional<int> max_path_len = std::nullopt);

// Topological order of an acyclic machine; throws ContractError on a cycle.
std::vector<StateId> TopologicalOrder(const Machine &m);

// Machine accepting exactly the given label string (input == output).
Machine LinearAcceptor(std::span<const Label> labels, SemiringKind kind);
// Single-path transducer mapping input to output; the shorter side is padded
// with epsilons at the end.
Machine LinearTransducer(std::span<const Label> input, std::span<const Label> output,
                         SemiringKind kind, Weight w);
// One-state identity transducer over the given labels.
Machine IdentityMachine(std::span<const Label> labels, SemiringKind kind);
// Acceptor for the empty language.
Machine EmptyMachine(SemiringKind kind);

// Re-weights m into another semiring: Zero maps to Zero, everything else to
// One (for targets that are boolean or from boolean sources) or is copied.
Machine ConvertKind(const Machine &m, SemiringKind kind);

// Labels appearing on the input (and output) side of any arc, epsilon
// excluded, ascending.
std::vector<Label> InputAlphabet(const Machine &m);
std::vector<Label> OutputAlphabet(const Machine &m);

// Sorts each state's arcs by (ilabel, olabel, nextstate, weight).
void ArcSortInput(Machine &m);

}  // namespace wfst

#endif  // WFST_FSM_OPS_H_
