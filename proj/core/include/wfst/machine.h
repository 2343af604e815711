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
// The machine data model. A Machine is a weighted transducer with dense
// state ids, a single start state and a final-weight vector; an acceptor is
// a machine whose arcs all carry ilabel == olabel. Multiple initial states
// and initial weights are expressed with a super-start and epsilon arcs.

#ifndef WFST_MACHINE_H_
#define WFST_MACHINE_H_

#include <cstdint>
#include <memory>
#include <vector>

#include "wfst/semiring.h"
#include "wfst/symbol_table.h"

namespace wfst {

using StateId = int32_t;
inline constexpr StateId kNoState = -1;

struct Arc {
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight weight = 0.0;
  StateId nextstate = kNoState;

  friend bool operator==(const Arc &, const Arc &) = default;
};

class Machine {
 public:
  explicit Machine(SemiringKind kind = SemiringKind::kTropical) : kind_(kind) {}

  SemiringKind Kind() const { return kind_; }

  StateId AddState();
  // Adds states until NumStates() > s.
  void EnsureState(StateId s);
  void SetStart(StateId s);
  void SetFinal(StateId s, Weight w);
  void AddArc(StateId s, const Arc &arc);
  void AddArc(StateId s, Label ilabel, Label olabel, Weight w, StateId next) {
    AddArc(s, Arc{ilabel, olabel, w, next});
  }

  StateId Start() const { return start_; }
  Weight Final(StateId s) const { return finals_[s]; }
  bool IsFinal(StateId s) const { return !IsZero(kind_, finals_[s]); }
  const std::vector<Arc> &Arcs(StateId s) const { return arcs_[s]; }
  std::vector<Arc> &MutableArcs(StateId s) { return arcs_[s]; }
  StateId NumStates() const { return static_cast<StateId>(arcs_.size()); }
  size_t NumArcs() const;
  size_t NumArcs(StateId s) const { return arcs_[s].size(); }

  const std::shared_ptr<const SymbolTable> &InputSymbols() const { return isyms_; }
  const std::shared_ptr<const SymbolTable> &OutputSymbols() const { return osyms_; }
  void SetInputSymbols(std::shared_ptr<const SymbolTable> syms) { isyms_ = std::move(syms); }
  void SetOutputSymbols(std::shared_ptr<const SymbolTable> syms) { osyms_ = std::move(syms); }
  // Copies both symbol tables from another machine.
  void CopySymbols(const Machine &other) {
    isyms_ = other.isyms_;
    osyms_ = other.osyms_;
  }

  // Removes every state not marked in keep and renumbers the rest in
  // ascending order. Arcs into removed states are dropped.
  void KeepStates(const std::vector<bool> &keep);

  // Properties, computed on demand.
  bool IsAcceptor() const;
  bool IsAcyclic() const;
  bool HasInputEpsilons() const;

  friend bool operator==(const Machine &a, const Machine &b);

 private:
  SemiringKind kind_;
  StateId start_ = kNoState;
  std::vector<Weight> finals_;
  std::vector<std::vector<Arc>> arcs_;
  std::shared_ptr<const SymbolTable> isyms_;
  std::shared_ptr<const SymbolTable> osyms_;
};

// On-demand access contract: a start state, final weights and arcs per state.
// Implementations may expand states lazily, but repeated calls with the same
// state must return the same arc sequence.
class Fsm {
 public:
  virtual ~Fsm() = default;
  virtual SemiringKind Kind() const = 0;
  virtual StateId Start() = 0;
  virtual Weight Final(StateId s) = 0;
  virtual std::vector<Arc> Arcs(StateId s) = 0;
};

// Fsm view over a frozen Machine. The machine must outlive the view unless
// it is held through the shared_ptr constructor.
class MachineFsm : public Fsm {
 public:
  explicit MachineFsm(const Machine &m) : m_(&m) {}
  explicit MachineFsm(std::shared_ptr<const Machine> m)
      : owned_(std::move(m)), m_(owned_.get()) {}

  SemiringKind Kind() const override { return m_->Kind(); }
  StateId Start() override { return m_->Start(); }
  Weight Final(StateId s) override { return m_->Final(s); }
  std::vector<Arc> Arcs(StateId s) override { return m_->Arcs(s); }

 private:
  std::shared_ptr<const Machine> owned_;
  const Machine *m_;
};

// Breadth-first expansion of every state reachable in f. Ids are assigned in
// discovery order, so the result is isomorphic to f's accessible part.
Machine Expand(Fsm &f);

}  // namespace wfst

#endif  // WFST_MACHINE_H_
