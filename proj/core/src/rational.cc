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

#include "wfst/rational.h"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <unordered_map>

#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/optimize.h"

namespace wfst {
namespace {

void CheckSameKind(const Machine &a, const Machine &b, const char *op) {
  if (a.Kind() != b.Kind()) {
    throw KindError(std::string(op) + ": semiring mismatch (" +
                    std::string(KindName(a.Kind())) + " vs " +
                    std::string(KindName(b.Kind())) + ")");
  }
}

// Copies b's states into out with ids shifted by out.NumStates(); returns the
// offset.
StateId AppendStates(Machine &out, const Machine &b, bool keep_finals) {
  const StateId offset = out.NumStates();
  for (StateId s = 0; s < b.NumStates(); ++s) out.AddState();
  for (StateId s = 0; s < b.NumStates(); ++s) {
    if (keep_finals) out.SetFinal(s + offset, b.Final(s));
    for (Arc a : b.Arcs(s)) {
      a.nextstate += offset;
      out.AddArc(s + offset, a);
    }
  }
  return offset;
}

struct PairKey {
  StateId a, b;
  FilterState f;
  bool operator==(const PairKey &o) const { return a == o.a && b == o.b && f == o.f; }
};

struct PairKeyHash {
  size_t operator()(const PairKey &k) const {
    return (static_cast<size_t>(k.a) * 7853) ^ (static_cast<size_t>(k.b) * 1000003) ^
           static_cast<size_t>(k.f);
  }
};

}  // namespace

std::optional<FilterState> FilterTransition(FilterState f, EpsilonMove move) {
  switch (move) {
    case EpsilonMove::kMatch:
      return FilterState::kStart;
    case EpsilonMove::kBoth:
      if (f == FilterState::kStart) return FilterState::kStart;
      return std::nullopt;
    case EpsilonMove::kLeftOnly:
      if (f != FilterState::kRightOnly) return FilterState::kLeftOnly;
      return std::nullopt;
    case EpsilonMove::kRightOnly:
      if (f != FilterState::kLeftOnly) return FilterState::kRightOnly;
      return std::nullopt;
  }
  return std::nullopt;
}

void CheckComposable(const Machine &a, const Machine &b) {
  CheckSameKind(a, b, "compose");
  const auto &as = a.OutputSymbols();
  const auto &bs = b.InputSymbols();
  if (as && bs && as != bs && !Compatible(*as, *bs)) {
    throw ResolutionError("compose: output symbols of the left machine disagree with "
                          "input symbols of the right machine");
  }
}

Machine Compose(const Machine &a, const Machine &b, const ComposeOptions &opts) {
  CheckComposable(a, b);
  const SemiringKind kind = a.Kind();
  Machine out(kind);
  out.SetInputSymbols(a.InputSymbols());
  out.SetOutputSymbols(b.OutputSymbols());
  if (a.Start() == kNoState || b.Start() == kNoState) return EmptyMachine(kind);

  // Right-hand arcs sorted by input label for binary search.
  std::vector<std::vector<Arc>> sorted(b.NumStates());
  for (StateId s = 0; s < b.NumStates(); ++s) {
    sorted[s] = b.Arcs(s);
    std::stable_sort(sorted[s].begin(), sorted[s].end(),
                     [](const Arc &x, const Arc &y) { return x.ilabel < y.ilabel; });
  }
  auto range = [&](StateId s, Label l) {
    return std::equal_range(sorted[s].begin(), sorted[s].end(), Arc{l, 0, 0, 0},
                            [](const Arc &x, const Arc &y) { return x.ilabel < y.ilabel; });
  };

  std::unordered_map<PairKey, StateId, PairKeyHash> ids;
  std::deque<PairKey> queue;
  auto id_of = [&](PairKey k) {
    if (opts.unfiltered) k.f = FilterState::kStart;
    auto [it, inserted] = ids.emplace(k, kNoState);
    if (inserted) {
      it->second = out.AddState();
      queue.push_back(k);
    }
    return it->second;
  };
  auto allowed = [&](FilterState f, EpsilonMove move) -> std::optional<FilterState> {
    if (opts.unfiltered) return FilterState::kStart;
    return FilterTransition(f, move);
  };

  out.SetStart(id_of({a.Start(), b.Start(), FilterState::kStart}));
  while (!queue.empty()) {
    const PairKey k = queue.front();
    queue.pop_front();
    const StateId src = ids[k];
    out.SetFinal(src, TimesFast(kind, a.Final(k.a), b.Final(k.b)));

    for (const Arc &x : a.Arcs(k.a)) {
      if (x.olabel != kEpsilon) {
        auto [lo, hi] = range(k.b, x.olabel);
        for (auto it = lo; it != hi; ++it) {
          const StateId dst = id_of({x.nextstate, it->nextstate, FilterState::kStart});
          out.AddArc(src, x.ilabel, it->olabel, TimesFast(kind, x.weight, it->weight), dst);
        }
        continue;
      }
      // Left machine emits nothing: move alone, or together with a right
      // epsilon-input arc.
      if (auto f = allowed(k.f, EpsilonMove::kLeftOnly)) {
        const StateId dst = id_of({x.nextstate, k.b, *f});
        out.AddArc(src, x.ilabel, kEpsilon, x.weight, dst);
      }
      if (auto f = allowed(k.f, EpsilonMove::kBoth)) {
        auto [lo, hi] = range(k.b, kEpsilon);
        for (auto it = lo; it != hi; ++it) {
          const StateId dst = id_of({x.nextstate, it->nextstate, *f});
          out.AddArc(src, x.ilabel, it->olabel, TimesFast(kind, x.weight, it->weight), dst);
        }
      }
    }
    if (auto f = allowed(k.f, EpsilonMove::kRightOnly)) {
      auto [lo, hi] = range(k.b, kEpsilon);
      for (auto it = lo; it != hi; ++it) {
        const StateId dst = id_of({k.a, it->nextstate, *f});
        out.AddArc(src, kEpsilon, it->olabel, it->weight, dst);
      }
    }
  }
  return opts.connect ? Connect(out) : out;
}

Machine Intersect(const Machine &a, const Machine &b) {
  if (!a.IsAcceptor() || !b.IsAcceptor()) {
    throw ContractError("intersect: both operands must be acceptors");
  }
  return Compose(a, b);
}

Machine Union(const Machine &a, const Machine &b) {
  CheckSameKind(a, b, "union");
  const SemiringKind kind = a.Kind();
  Machine out(kind);
  out.CopySymbols(a);
  const StateId start = out.AddState();
  out.SetStart(start);
  const StateId oa = AppendStates(out, a, true);
  const StateId ob = AppendStates(out, b, true);
  if (a.Start() != kNoState) out.AddArc(start, kEpsilon, kEpsilon, One(kind), a.Start() + oa);
  if (b.Start() != kNoState) out.AddArc(start, kEpsilon, kEpsilon, One(kind), b.Start() + ob);
  return out;
}

Machine Concat(const Machine &a, const Machine &b) {
  CheckSameKind(a, b, "concat");
  const SemiringKind kind = a.Kind();
  if (a.Start() == kNoState || b.Start() == kNoState) return EmptyMachine(kind);
  Machine out(kind);
  out.CopySymbols(a);
  AppendStates(out, a, false);
  const StateId ob = AppendStates(out, b, true);
  out.SetStart(a.Start());
  for (StateId s = 0; s < a.NumStates(); ++s) {
    if (a.IsFinal(s)) out.AddArc(s, kEpsilon, kEpsilon, a.Final(s), b.Start() + ob);
  }
  return out;
}

Machine Closure(const Machine &a) {
  if (a.Kind() == SemiringKind::kReal) {
    throw UnsupportedError("closure: cyclic sums over the real semiring are not supported");
  }
  const SemiringKind kind = a.Kind();
  Machine out(kind);
  out.CopySymbols(a);
  const StateId start = out.AddState();
  out.SetStart(start);
  out.SetFinal(start, One(kind));
  if (a.Start() == kNoState) return out;
  const StateId oa = AppendStates(out, a, true);
  out.AddArc(start, kEpsilon, kEpsilon, One(kind), a.Start() + oa);
  for (StateId s = 0; s < a.NumStates(); ++s) {
    if (a.IsFinal(s)) {
      out.AddArc(s + oa, kEpsilon, kEpsilon, a.Final(s), a.Start() + oa);
    }
  }
  return out;
}

Machine Reverse(const Machine &a) {
  const SemiringKind kind = a.Kind();
  Machine out(kind);
  out.SetInputSymbols(a.InputSymbols());
  out.SetOutputSymbols(a.OutputSymbols());
  const StateId start = out.AddState();
  out.SetStart(start);
  for (StateId s = 0; s < a.NumStates(); ++s) out.AddState();
  if (a.Start() == kNoState) return out;
  out.SetFinal(a.Start() + 1, One(kind));
  for (StateId s = 0; s < a.NumStates(); ++s) {
    if (a.IsFinal(s)) out.AddArc(start, kEpsilon, kEpsilon, a.Final(s), s + 1);
    for (const Arc &x : a.Arcs(s)) {
      out.AddArc(x.nextstate + 1, x.ilabel, x.olabel, x.weight, s + 1);
    }
  }
  return out;
}

Machine Project(const Machine &a, ProjectSide side) {
  Machine out = a;
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc &x : out.MutableArcs(s)) {
      if (side == ProjectSide::kInput) {
        x.olabel = x.ilabel;
      } else {
        x.ilabel = x.olabel;
      }
    }
  }
  if (side == ProjectSide::kInput) {
    out.SetOutputSymbols(a.InputSymbols());
  } else {
    out.SetInputSymbols(a.OutputSymbols());
  }
  return out;
}

Machine Complement(const Machine &a, std::span<const Label> alphabet) {
  if (a.Kind() != SemiringKind::kBoolean) {
    throw UnsupportedError("complement is only defined for boolean acceptors");
  }
  if (!a.IsAcceptor()) throw ContractError("complement: operand must be an acceptor");
  std::set<Label> sigma(alphabet.begin(), alphabet.end());
  if (sigma.empty()) {
    if (a.InputSymbols()) {
      for (Label l : a.InputSymbols()->Labels()) sigma.insert(l);
    }
    for (Label l : InputAlphabet(a)) sigma.insert(l);
  }
  sigma.erase(kEpsilon);

  Machine det = Determinize(a);
  const SemiringKind kind = det.Kind();
  if (det.Start() == kNoState) det = EmptyMachine(kind);
  Machine out(kind);
  out.CopySymbols(a);
  for (StateId s = 0; s < det.NumStates(); ++s) out.AddState();
  const StateId sink = out.AddState();
  out.SetStart(det.Start());
  for (StateId s = 0; s < det.NumStates(); ++s) {
    out.SetFinal(s, det.IsFinal(s) ? Zero(kind) : One(kind));
    std::set<Label> seen;
    for (const Arc &x : det.Arcs(s)) {
      if (!sigma.count(x.ilabel)) continue;
      out.AddArc(s, x);
      seen.insert(x.ilabel);
    }
    for (Label l : sigma) {
      if (!seen.count(l)) out.AddArc(s, l, l, One(kind), sink);
    }
  }
  out.SetFinal(sink, One(kind));
  for (Label l : sigma) out.AddArc(sink, l, l, One(kind), sink);
  return out;
}

Machine Difference(const Machine &a, const Machine &b, std::span<const Label> alphabet) {
  CheckSameKind(a, b, "difference");
  std::set<Label> sigma(alphabet.begin(), alphabet.end());
  if (sigma.empty()) {
    for (const Machine *m : {&a, &b}) {
      if (m->InputSymbols()) {
        for (Label l : m->InputSymbols()->Labels()) sigma.insert(l);
      }
      for (Label l : InputAlphabet(*m)) sigma.insert(l);
    }
    sigma.erase(kEpsilon);
  }
  std::vector<Label> labels(sigma.begin(), sigma.end());
  return Intersect(a, Complement(b, labels));
}

}  // namespace wfst
