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

#include "wfst/machine.h"

#include <deque>
#include <string>
#include <unordered_map>

#include "wfst/errors.h"

namespace wfst {

StateId Machine::AddState() {
  arcs_.emplace_back();
  finals_.push_back(Zero(kind_));
  return NumStates() - 1;
}

void Machine::EnsureState(StateId s) {
  while (NumStates() <= s) AddState();
}

void Machine::SetStart(StateId s) {
  if (s != kNoState && (s < 0 || s >= NumStates())) {
    throw ContractError("start state " + std::to_string(s) + " out of range");
  }
  start_ = s;
}

void Machine::SetFinal(StateId s, Weight w) {
  CheckWeight(kind_, w);
  finals_.at(s) = w;
}

void Machine::AddArc(StateId s, const Arc &arc) {
  if (arc.nextstate < 0 || arc.nextstate >= NumStates()) {
    throw ContractError("arc to nonexistent state " + std::to_string(arc.nextstate));
  }
  CheckWeight(kind_, arc.weight);
  arcs_.at(s).push_back(arc);
}

size_t Machine::NumArcs() const {
  size_t n = 0;
  for (const auto &a : arcs_) n += a.size();
  return n;
}

void Machine::KeepStates(const std::vector<bool> &keep) {
  std::vector<StateId> remap(arcs_.size(), kNoState);
  StateId next = 0;
  for (size_t s = 0; s < arcs_.size(); ++s) {
    if (keep[s]) remap[s] = next++;
  }
  std::vector<std::vector<Arc>> arcs(next);
  std::vector<Weight> finals(next);
  for (size_t s = 0; s < arcs_.size(); ++s) {
    if (remap[s] == kNoState) continue;
    finals[remap[s]] = finals_[s];
    auto &out = arcs[remap[s]];
    for (const Arc &a : arcs_[s]) {
      if (remap[a.nextstate] == kNoState) continue;
      Arc b = a;
      b.nextstate = remap[a.nextstate];
      out.push_back(b);
    }
  }
  start_ = start_ == kNoState ? kNoState : remap[start_];
  arcs_ = std::move(arcs);
  finals_ = std::move(finals);
}

bool Machine::IsAcceptor() const {
  for (const auto &as : arcs_) {
    for (const Arc &a : as) {
      if (a.ilabel != a.olabel) return false;
    }
  }
  return true;
}

bool Machine::HasInputEpsilons() const {
  for (const auto &as : arcs_) {
    for (const Arc &a : as) {
      if (a.ilabel == kEpsilon) return true;
    }
  }
  return false;
}

bool Machine::IsAcyclic() const {
  // Iterative three-colour DFS.
  enum : uint8_t { kWhite, kGrey, kBlack };
  std::vector<uint8_t> colour(arcs_.size(), kWhite);
  std::vector<std::pair<StateId, size_t>> stack;
  for (StateId root = 0; root < NumStates(); ++root) {
    if (colour[root] != kWhite) continue;
    stack.emplace_back(root, 0);
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto &[s, i] = stack.back();
      if (i < arcs_[s].size()) {
        StateId n = arcs_[s][i++].nextstate;
        if (colour[n] == kGrey) return false;
        if (colour[n] == kWhite) {
          colour[n] = kGrey;
          stack.emplace_back(n, 0);
        }
      } else {
        colour[s] = kBlack;
        stack.pop_back();
      }
    }
  }
  return true;
}

bool operator==(const Machine &a, const Machine &b) {
  return a.kind_ == b.kind_ && a.start_ == b.start_ && a.finals_ == b.finals_ &&
         a.arcs_ == b.arcs_;
}

Machine Expand(Fsm &f) {
  Machine out(f.Kind());
  const StateId start = f.Start();
  if (start == kNoState) return out;
  std::unordered_map<StateId, StateId> ids;
  std::deque<StateId> queue;
  auto id_of = [&](StateId s) {
    auto [it, inserted] = ids.emplace(s, kNoState);
    if (inserted) {
      it->second = out.AddState();
      queue.push_back(s);
    }
    return it->second;
  };
  out.SetStart(id_of(start));
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    const StateId q = ids[s];
    out.SetFinal(q, f.Final(s));
    for (const Arc &a : f.Arcs(s)) {
      const StateId n = id_of(a.nextstate);
      out.AddArc(q, a.ilabel, a.olabel, a.weight, n);
    }
  }
  return out;
}

}  // namespace wfst
