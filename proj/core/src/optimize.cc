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

#include "wfst/optimize.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>

#include "wfst/decode.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"

namespace wfst {
namespace {

using LabelString = std::vector<Label>;

void RequirePathSemiring(const Machine &m, const char *op) {
  if (!IsPathSemiring(m.Kind())) {
    throw UnsupportedError(std::string(op) + " requires an idempotent semiring "
                           "(boolean or tropical), got " + std::string(KindName(m.Kind())));
  }
}

// Weights are compared through a fixed-point key so that float noise from
// residual subtraction does not split otherwise identical subsets.
int64_t WeightKey(Weight w) {
  if (w == kInfinity) return INT64_MAX;
  if (w == -kInfinity) return INT64_MIN;
  return std::llround(w * 1e8);
}

LabelString Lcp(const LabelString &a, const LabelString &b) {
  size_t n = 0;
  while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
  return LabelString(a.begin(), a.begin() + n);
}

// Adds an arc from src emitting `out` (possibly several labels) after reading
// ilabel; extra labels are spelled out through fresh chain states.
void AddChainArc(Machine &m, StateId src, Label ilabel, const LabelString &out, Weight w,
                 StateId dst) {
  const SemiringKind kind = m.Kind();
  if (out.size() <= 1) {
    m.AddArc(src, ilabel, out.empty() ? kEpsilon : out[0], w, dst);
    return;
  }
  StateId cur = src;
  for (size_t i = 0; i < out.size(); ++i) {
    const StateId next = i + 1 == out.size() ? dst : m.AddState();
    m.AddArc(cur, i == 0 ? ilabel : kEpsilon, out[i], i == 0 ? w : One(kind), next);
    cur = next;
  }
}

// Single-source distances over epsilon:epsilon arcs from src, by FIFO
// relaxation (idempotent semirings only).
std::map<StateId, Weight> EpsilonClosure(const Machine &m, StateId src, Weight start) {
  const SemiringKind kind = m.Kind();
  std::map<StateId, Weight> dist{{src, start}};
  std::deque<StateId> queue{src};
  size_t budget = 64 + 4 * static_cast<size_t>(m.NumStates()) * (m.NumArcs() + 1);
  while (!queue.empty()) {
    if (budget-- == 0) throw ContractError("epsilon closure does not converge (negative cycle)");
    const StateId s = queue.front();
    queue.pop_front();
    const Weight ds = dist[s];
    for (const Arc &a : m.Arcs(s)) {
      if (a.ilabel != kEpsilon || a.olabel != kEpsilon) continue;
      const Weight cand = TimesFast(kind, ds, a.weight);
      auto it = dist.find(a.nextstate);
      if (it == dist.end()) {
        dist.emplace(a.nextstate, cand);
        queue.push_back(a.nextstate);
      } else if (PlusFast(kind, it->second, cand) != it->second) {
        it->second = PlusFast(kind, it->second, cand);
        queue.push_back(a.nextstate);
      }
    }
  }
  return dist;
}

void RequireTrim(const Machine &m, const char *op) {
  auto acc = AccessibleStates(m);
  auto coacc = CoaccessibleStates(m);
  for (StateId s = 0; s < m.NumStates(); ++s) {
    if (!acc[s] || !coacc[s]) {
      throw ContractError(std::string(op) + ": state " + std::to_string(s) +
                          " is not accessible and coaccessible; connect first");
    }
  }
}

struct Element {
  StateId state;
  LabelString residual;
  Weight weight;
};

using Subset = std::vector<Element>;

std::vector<int64_t> SubsetKey(const Subset &subset) {
  std::vector<int64_t> key;
  for (const Element &e : subset) {
    key.push_back(e.state);
    key.push_back(WeightKey(e.weight));
    key.push_back(static_cast<int64_t>(e.residual.size()));
    key.insert(key.end(), e.residual.begin(), e.residual.end());
  }
  return key;
}

}  // namespace

Machine Determinize(const Machine &input, int expansion_cap) {
  RequirePathSemiring(input, "determinize");
  // Dead states would otherwise accumulate ever-growing residuals.
  const Machine m = Connect(input);
  const SemiringKind kind = m.Kind();
  const bool transducer = !m.IsAcceptor();
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) {
      if (a.ilabel == kEpsilon && a.olabel != kEpsilon) {
        throw ContractError("determinize: epsilon-input arcs with output are not supported");
      }
    }
  }
  Machine out(kind);
  out.CopySymbols(m);
  if (m.Start() == kNoState) return out;

  // Closes a subset over epsilon:epsilon arcs and canonicalizes it.
  auto close = [&](std::map<std::pair<StateId, LabelString>, Weight> raw) {
    std::map<std::pair<StateId, LabelString>, Weight> closed;
    for (const auto &[key, w] : raw) {
      for (const auto &[s, d] : EpsilonClosure(m, key.first, w)) {
        auto [it, inserted] = closed.emplace(std::make_pair(s, key.second), d);
        if (!inserted) it->second = PlusFast(kind, it->second, d);
      }
    }
    Subset subset;
    for (auto &[key, w] : closed) {
      if (!subset.empty() && subset.back().state == key.first) {
        throw ContractError("determinize: transducer is not functional (state " +
                            std::to_string(key.first) + " reached with two outputs)");
      }
      subset.push_back({key.first, key.second, w});
    }
    return subset;
  };

  std::map<std::vector<int64_t>, StateId> ids;
  std::vector<Subset> subsets;
  std::deque<StateId> queue;
  auto id_of = [&](Subset subset) {
    auto key = SubsetKey(subset);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    if (static_cast<int>(subsets.size()) >= expansion_cap) {
      throw CapExceededError("determinize: more than " + std::to_string(expansion_cap) +
                             " subset states; the machine is probably not "
                             "determinizable (run the twins test)");
    }
    const StateId id = out.AddState();
    ids.emplace(std::move(key), id);
    if (static_cast<size_t>(id) >= subsets.size()) subsets.resize(id + 1);
    subsets[id] = std::move(subset);
    queue.push_back(id);
    return id;
  };

  out.SetStart(id_of(close({{{m.Start(), {}}, One(kind)}})));
  while (!queue.empty()) {
    const StateId src = queue.front();
    queue.pop_front();
    const Subset subset = subsets[src];

    // Final weight and residual output.
    Weight fw = Zero(kind);
    std::optional<LabelString> fres;
    for (const Element &e : subset) {
      if (!m.IsFinal(e.state)) continue;
      if (fres && *fres != e.residual) {
        throw ContractError("determinize: transducer is not functional (final outputs differ)");
      }
      fres = e.residual;
      fw = PlusFast(kind, fw, TimesFast(kind, e.weight, m.Final(e.state)));
    }
    if (fres) {
      if (fres->empty()) {
        out.SetFinal(src, fw);
      } else {
        const StateId flush = out.AddState();
        out.SetFinal(flush, fw);
        AddChainArc(out, src, kEpsilon, *fres, One(kind), flush);
      }
    }

    // Candidates per input label.
    std::map<Label, std::map<std::pair<StateId, LabelString>, Weight>> by_label;
    for (const Element &e : subset) {
      for (const Arc &a : m.Arcs(e.state)) {
        if (a.ilabel == kEpsilon) continue;
        LabelString res = e.residual;
        if (transducer && a.olabel != kEpsilon) res.push_back(a.olabel);
        auto &slot = by_label[a.ilabel];
        const Weight w = TimesFast(kind, e.weight, a.weight);
        auto [it, inserted] = slot.emplace(std::make_pair(a.nextstate, std::move(res)), w);
        if (!inserted) it->second = PlusFast(kind, it->second, w);
      }
    }
    for (auto &[label, cands] : by_label) {
      Weight total = Zero(kind);
      std::optional<LabelString> prefix;
      for (const auto &[key, w] : cands) {
        total = PlusFast(kind, total, w);
        prefix = prefix ? Lcp(*prefix, key.second) : key.second;
      }
      if (IsZero(kind, total)) continue;
      std::map<std::pair<StateId, LabelString>, Weight> next;
      for (const auto &[key, w] : cands) {
        if (IsZero(kind, w)) continue;
        LabelString rest(key.second.begin() + prefix->size(), key.second.end());
        next.emplace(std::make_pair(key.first, std::move(rest)), Divide(kind, w, total));
      }
      const StateId dst = id_of(close(std::move(next)));
      if (transducer) {
        AddChainArc(out, src, label, *prefix, total, dst);
      } else {
        out.AddArc(src, label, label, total, dst);
      }
    }
  }
  return out;
}

TwinReport TwinsTest(const Machine &input) {
  TwinReport report;
  if (input.Kind() == SemiringKind::kBoolean && input.IsAcceptor()) return report;
  RequirePathSemiring(input, "twins test");
  // No cycles, nothing to compare.
  if (input.IsAcyclic()) return report;
  if (input.HasInputEpsilons()) {
    throw ContractError("twins test: epsilon-input arcs are not supported");
  }
  const Machine m = Connect(input);
  if (m.Start() == kNoState || m.NumStates() == 0) return report;
  const SemiringKind kind = m.Kind();
  const bool transducer = !m.IsAcceptor();
  const StateId n = m.NumStates();

  struct SqArc {
    Label label;
    Weight diff;
    Label out1, out2;
    int32_t next;
  };
  // Pair states of the square reachable from (start, start).
  std::unordered_map<int64_t, int32_t> ids;
  std::vector<std::pair<StateId, StateId>> pairs;
  std::vector<std::vector<SqArc>> sq;
  auto id_of = [&](StateId p, StateId q) {
    const int64_t key = static_cast<int64_t>(p) * n + q;
    auto [it, inserted] = ids.emplace(key, static_cast<int32_t>(pairs.size()));
    if (inserted) {
      pairs.emplace_back(p, q);
      sq.emplace_back();
    }
    return it->second;
  };
  id_of(m.Start(), m.Start());
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto [p, q] = pairs[i];
    for (const Arc &a : m.Arcs(p)) {
      for (const Arc &b : m.Arcs(q)) {
        if (a.ilabel != b.ilabel) continue;
        const Weight diff = kind == SemiringKind::kTropical ? b.weight - a.weight : 0.0;
        const int32_t next = id_of(a.nextstate, b.nextstate);
        sq[i].push_back({a.ilabel, diff, a.olabel, b.olabel, next});
      }
    }
  }
  const int32_t np = static_cast<int32_t>(pairs.size());

  // Output delays along a BFS tree from the start pair (transducers only).
  using Delay = std::pair<LabelString, LabelString>;
  auto advance = [](const Delay &d, Label o1, Label o2) {
    Delay r = d;
    if (o1 != kEpsilon) r.first.push_back(o1);
    if (o2 != kEpsilon) r.second.push_back(o2);
    size_t k = 0;
    while (k < r.first.size() && k < r.second.size() && r.first[k] == r.second[k]) ++k;
    r.first.erase(r.first.begin(), r.first.begin() + k);
    r.second.erase(r.second.begin(), r.second.begin() + k);
    return r;
  };
  std::vector<Delay> delay(np);
  if (transducer) {
    std::vector<bool> seen(np, false);
    std::deque<int32_t> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
      const int32_t x = queue.front();
      queue.pop_front();
      for (const SqArc &e : sq[x]) {
        if (seen[e.next]) continue;
        seen[e.next] = true;
        delay[e.next] = advance(delay[x], e.out1, e.out2);
        queue.push_back(e.next);
      }
    }
  }

  // Tarjan SCCs, iteratively.
  std::vector<int32_t> index(np, -1), low(np, 0), comp(np, -1);
  std::vector<bool> on_stack(np, false);
  std::vector<int32_t> stack;
  int32_t counter = 0, ncomp = 0;
  for (int32_t root = 0; root < np; ++root) {
    if (index[root] != -1) continue;
    std::vector<std::pair<int32_t, size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto &[v, i] = call.back();
      if (i < sq[v].size()) {
        const int32_t w = sq[v][i++].next;
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        const int32_t vv = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vv]);
        if (low[vv] == index[vv]) {
          int32_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp[w] = ncomp;
          } while (w != vv);
          ++ncomp;
        }
      }
    }
  }

  // Potential propagation inside each component.
  std::vector<Weight> pot(np, 0.0);
  std::vector<Delay> dpot(np);
  std::vector<bool> assigned(np, false);
  std::vector<int32_t> parent(np, -1);
  std::vector<Label> parent_label(np, kNoLabel);
  for (int32_t root = 0; root < np; ++root) {
    if (assigned[root]) continue;
    assigned[root] = true;
    dpot[root] = delay[root];
    std::deque<int32_t> queue{root};
    while (!queue.empty()) {
      const int32_t x = queue.front();
      queue.pop_front();
      for (const SqArc &e : sq[x]) {
        if (comp[e.next] != comp[root]) continue;
        const Weight cand = pot[x] + e.diff;
        Delay dcand = transducer ? advance(dpot[x], e.out1, e.out2) : Delay{};
        if (!assigned[e.next]) {
          assigned[e.next] = true;
          pot[e.next] = cand;
          dpot[e.next] = std::move(dcand);
          parent[e.next] = x;
          parent_label[e.next] = e.label;
          queue.push_back(e.next);
          continue;
        }
        const bool weight_bad = !ApproxEqual(pot[e.next], cand, 1e-9);
        const bool output_bad = transducer && dpot[e.next] != dcand;
        if (!weight_bad && !output_bad) continue;

        // Witness: tree path root->x, the arc, then a path e.next->root
        // inside the component.
        TwinWitness w;
        w.p = pairs[root].first;
        w.q = pairs[root].second;
        LabelString to_x;
        for (int32_t y = x; y != root; y = parent[y]) to_x.push_back(parent_label[y]);
        std::reverse(to_x.begin(), to_x.end());
        w.cycle = to_x;
        w.cycle.push_back(e.label);
        std::vector<int32_t> back_parent(np, -1);
        std::vector<const SqArc *> back_arc(np, nullptr);
        std::vector<bool> seen(np, false);
        std::deque<int32_t> bq{e.next};
        seen[e.next] = true;
        while (!bq.empty() && !seen[root]) {
          const int32_t y = bq.front();
          bq.pop_front();
          for (const SqArc &f : sq[y]) {
            if (comp[f.next] != comp[root] || seen[f.next]) continue;
            seen[f.next] = true;
            back_parent[f.next] = y;
            back_arc[f.next] = &f;
            bq.push_back(f.next);
          }
        }
        LabelString tail;
        // Tree path diffs sum to pot[x].
        Weight diff = pot[x] + e.diff;
        for (int32_t y = root; y != e.next; y = back_parent[y]) {
          tail.push_back(back_arc[y]->label);
          diff += back_arc[y]->diff;
        }
        std::reverse(tail.begin(), tail.end());
        w.cycle.insert(w.cycle.end(), tail.begin(), tail.end());
        w.weight_mismatch = diff;
        w.output_mismatch = output_bad;
        report.has_twin_property = false;
        report.witness = std::move(w);
        return report;
      }
    }
  }
  return report;
}

Machine LocalDeterminize(const Machine &m, int k) {
  if (k < 1) throw ContractError("local determinization threshold must be >= 1");
  RequirePathSemiring(m, "local determinization");
  const SemiringKind kind = m.Kind();
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < m.NumStates(); ++s) out.AddState();
  if (m.Start() != kNoState) out.SetStart(m.Start());
  for (StateId s = 0; s < m.NumStates(); ++s) {
    out.SetFinal(s, m.Final(s));
    const auto &arcs = m.Arcs(s);
    if (static_cast<int>(arcs.size()) <= k) {
      for (const Arc &a : arcs) out.AddArc(s, a);
      continue;
    }
    // Group by input label, keeping first-occurrence order.
    std::vector<Label> order;
    std::map<Label, std::vector<Arc>> groups;
    for (const Arc &a : arcs) {
      if (a.ilabel == kEpsilon) {
        out.AddArc(s, a);
        continue;
      }
      if (!groups.count(a.ilabel)) order.push_back(a.ilabel);
      groups[a.ilabel].push_back(a);
    }
    for (Label l : order) {
      const auto &group = groups[l];
      if (group.size() == 1) {
        out.AddArc(s, group[0]);
        continue;
      }
      Weight total = Zero(kind);
      bool same_output = true;
      for (const Arc &a : group) {
        total = PlusFast(kind, total, a.weight);
        same_output = same_output && a.olabel == group[0].olabel;
      }
      const StateId fan = out.AddState();
      out.AddArc(s, l, same_output ? group[0].olabel : kEpsilon, total, fan);
      for (const Arc &a : group) {
        out.AddArc(fan, kEpsilon, same_output ? kEpsilon : a.olabel,
                   IsZero(kind, total) ? a.weight : Divide(kind, a.weight, total), a.nextstate);
      }
    }
  }
  return out;
}

namespace {

Machine PushWeights(const Machine &m) {
  const SemiringKind kind = m.Kind();
  if (kind == SemiringKind::kBoolean) return m;
  const auto d = ShortestDistanceToFinal(m);
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < m.NumStates(); ++s) out.AddState();
  for (StateId s = 0; s < m.NumStates(); ++s) {
    out.SetFinal(s, m.IsFinal(s) ? Divide(kind, m.Final(s), d[s]) : Zero(kind));
    for (const Arc &a : m.Arcs(s)) {
      out.AddArc(s, a.ilabel, a.olabel,
                 Divide(kind, TimesFast(kind, a.weight, d[a.nextstate]), d[s]), a.nextstate);
    }
  }
  StateId start = m.Start();
  const Weight lead = d[start];
  bool has_incoming = false;
  for (StateId s = 0; s < m.NumStates() && !has_incoming; ++s) {
    for (const Arc &a : m.Arcs(s)) has_incoming = has_incoming || a.nextstate == start;
  }
  if (!IsOne(kind, lead)) {
    if (has_incoming) {
      const StateId fresh = out.AddState();
      out.SetFinal(fresh, out.Final(start));
      for (const Arc &a : out.Arcs(start)) out.AddArc(fresh, a);
      start = fresh;
    }
    for (Arc &a : out.MutableArcs(start)) a.weight = TimesFast(kind, lead, a.weight);
    if (out.IsFinal(start)) out.SetFinal(start, TimesFast(kind, lead, out.Final(start)));
  }
  out.SetStart(start);
  return out;
}

Machine PushStrings(const Machine &m) {
  const SemiringKind kind = m.Kind();
  const StateId n = m.NumStates();
  // Longest common prefix of all future outputs, by fixpoint iteration from
  // "undefined".
  std::vector<std::optional<LabelString>> pre(n);
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId s = 0; s < n; ++s) {
      std::optional<LabelString> cur;
      if (m.IsFinal(s)) cur = LabelString{};
      for (const Arc &a : m.Arcs(s)) {
        if (!pre[a.nextstate]) continue;
        LabelString cand;
        if (a.olabel != kEpsilon) cand.push_back(a.olabel);
        cand.insert(cand.end(), pre[a.nextstate]->begin(), pre[a.nextstate]->end());
        cur = cur ? Lcp(*cur, cand) : cand;
      }
      if (cur != pre[s]) {
        pre[s] = std::move(cur);
        changed = true;
      }
    }
  }
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < n; ++s) out.AddState();
  for (StateId s = 0; s < n; ++s) {
    out.SetFinal(s, m.Final(s));
    for (const Arc &a : m.Arcs(s)) {
      LabelString full;
      if (a.olabel != kEpsilon) full.push_back(a.olabel);
      full.insert(full.end(), pre[a.nextstate]->begin(), pre[a.nextstate]->end());
      LabelString rest(full.begin() + pre[s]->size(), full.end());
      AddChainArc(out, s, a.ilabel, rest, a.weight, a.nextstate);
    }
  }
  StateId start = m.Start();
  if (!pre[start]->empty()) {
    const StateId fresh = out.AddState();
    AddChainArc(out, fresh, kEpsilon, *pre[start], One(kind), start);
    start = fresh;
  }
  out.SetStart(start);
  return out;
}

}  // namespace

Machine Push(const Machine &m, PushMode mode) {
  RequirePathSemiring(m, "push");
  if (m.Start() == kNoState) return m;
  // The empty language has nothing to push (Connect leaves a lone start).
  if (m.NumStates() == 1 && m.NumArcs() == 0 && !m.IsFinal(m.Start())) return m;
  RequireTrim(m, "push");
  return mode == PushMode::kWeights ? PushWeights(m) : PushStrings(m);
}

Machine MinimizeEncoded(const Machine &input) {
  const Machine &m = input;
  const SemiringKind kind = m.Kind();
  if (m.Start() == kNoState) return m;
  const StateId n = m.NumStates();
  const StateId dead = n;
  const StateId total = n + 1;

  std::map<std::tuple<Label, Label, int64_t>, int32_t> label_ids;
  std::vector<std::vector<std::pair<int32_t, StateId>>> fwd(total);
  for (StateId s = 0; s < n; ++s) {
    for (const Arc &a : m.Arcs(s)) {
      auto key = std::make_tuple(a.ilabel, a.olabel, WeightKey(a.weight));
      auto [it, _] = label_ids.emplace(key, static_cast<int32_t>(label_ids.size()));
      fwd[s].emplace_back(it->second, a.nextstate);
    }
  }
  const int32_t nlabels = static_cast<int32_t>(label_ids.size());
  // Complete the automaton with a dead state.
  std::vector<std::vector<StateId>> delta(total, std::vector<StateId>(nlabels, dead));
  for (StateId s = 0; s < n; ++s) {
    for (auto [l, t] : fwd[s]) {
      if (delta[s][l] != dead) {
        throw ContractError("minimize: machine is not deterministic on encoded labels");
      }
      delta[s][l] = t;
    }
  }
  // inverse[l][t] = predecessors of t on l.
  std::vector<std::vector<std::vector<StateId>>> inverse(
      nlabels, std::vector<std::vector<StateId>>(total));
  for (StateId s = 0; s < total; ++s) {
    for (int32_t l = 0; l < nlabels; ++l) inverse[l][delta[s][l]].push_back(s);
  }

  // Initial partition by final weight.
  std::vector<int32_t> block(total);
  std::vector<std::vector<StateId>> members;
  {
    std::map<int64_t, int32_t> by_final;
    for (StateId s = 0; s < total; ++s) {
      const int64_t key = s == dead ? WeightKey(Zero(kind)) : WeightKey(m.Final(s));
      auto [it, inserted] = by_final.emplace(key, static_cast<int32_t>(members.size()));
      if (inserted) members.emplace_back();
      block[s] = it->second;
      members[it->second].push_back(s);
    }
  }
  // Hopcroft worklist of (block, label) splitters.
  std::deque<std::pair<int32_t, int32_t>> work;
  std::set<std::pair<int32_t, int32_t>> in_work;
  for (int32_t b = 0; b < static_cast<int32_t>(members.size()); ++b) {
    for (int32_t l = 0; l < nlabels; ++l) {
      work.emplace_back(b, l);
      in_work.emplace(b, l);
    }
  }
  while (!work.empty()) {
    auto [splitter, l] = work.front();
    work.pop_front();
    in_work.erase({splitter, l});
    // Predecessors of the splitter block on l.
    std::map<int32_t, std::vector<StateId>> hit;
    for (StateId t : members[splitter]) {
      for (StateId s : inverse[l][t]) hit[block[s]].push_back(s);
    }
    for (auto &[b, states] : hit) {
      if (states.size() == members[b].size()) continue;
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
      if (states.size() == members[b].size()) continue;
      // Split b into (b \ states) and states (new block).
      const int32_t nb = static_cast<int32_t>(members.size());
      members.emplace_back();
      std::vector<StateId> keep;
      std::vector<bool> moving(total, false);
      for (StateId s : states) moving[s] = true;
      for (StateId s : members[b]) {
        if (moving[s]) {
          members[nb].push_back(s);
          block[s] = nb;
        } else {
          keep.push_back(s);
        }
      }
      members[b] = std::move(keep);
      for (int32_t a = 0; a < nlabels; ++a) {
        if (in_work.count({b, a})) {
          work.emplace_back(nb, a);
          in_work.emplace(nb, a);
        } else {
          const int32_t smaller = members[b].size() <= members[nb].size() ? b : nb;
          work.emplace_back(smaller, a);
          in_work.emplace(smaller, a);
        }
      }
    }
  }

  // Quotient machine, dropping the dead block. Block ids are renumbered in
  // order of first state id.
  const int32_t dead_block = block[dead];
  std::vector<int32_t> remap(members.size(), -1);
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < n; ++s) {
    if (block[s] == dead_block) continue;
    if (remap[block[s]] == -1) remap[block[s]] = out.AddState();
  }
  std::vector<bool> done(members.size(), false);
  for (StateId s = 0; s < n; ++s) {
    const int32_t b = block[s];
    if (b == dead_block || done[b]) continue;
    done[b] = true;
    out.SetFinal(remap[b], m.Final(s));
    for (const Arc &a : m.Arcs(s)) {
      if (block[a.nextstate] == dead_block) continue;
      out.AddArc(remap[b], a.ilabel, a.olabel, a.weight, remap[block[a.nextstate]]);
    }
  }
  if (block[m.Start()] == dead_block) return EmptyMachine(kind);
  out.SetStart(remap[block[m.Start()]]);
  return out;
}

Machine Minimize(const Machine &m) {
  RequirePathSemiring(m, "minimize");
  const bool acceptor = m.IsAcceptor();
  if (!IsDeterministic(m) && (acceptor || !IsSubsequential(m))) {
    throw ContractError("minimize: input must be deterministic; determinize first");
  }
  Machine c = Connect(m);
  if (c.NumArcs() == 0 && !c.IsFinal(c.Start())) return c;
  c = Push(c, PushMode::kWeights);
  if (!acceptor) c = Push(c, PushMode::kStrings);
  return MinimizeEncoded(c);
}

Machine Canonicalize(const Machine &m) {
  Machine out(m.Kind());
  out.CopySymbols(m);
  if (m.Start() == kNoState) return out;
  std::vector<StateId> ids(m.NumStates(), kNoState);
  std::deque<StateId> queue{m.Start()};
  ids[m.Start()] = out.AddState();
  out.SetStart(ids[m.Start()]);
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    out.SetFinal(ids[s], m.Final(s));
    std::vector<Arc> arcs = m.Arcs(s);
    std::stable_sort(arcs.begin(), arcs.end(), [](const Arc &a, const Arc &b) {
      return std::make_tuple(a.ilabel, a.olabel, WeightKey(a.weight)) <
             std::make_tuple(b.ilabel, b.olabel, WeightKey(b.weight));
    });
    for (const Arc &a : arcs) {
      if (ids[a.nextstate] == kNoState) {
        ids[a.nextstate] = out.AddState();
        queue.push_back(a.nextstate);
      }
      out.AddArc(ids[s], a.ilabel, a.olabel, a.weight, ids[a.nextstate]);
    }
  }
  return out;
}

bool Equivalent(const Machine &a, const Machine &b, double tol) {
  if (a.Kind() != b.Kind()) return false;
  auto canonical = [](const Machine &m) {
    Machine x = m.IsAcceptor() ? m : RemoveEpsilon(m);
    return Canonicalize(Minimize(Connect(Determinize(x))));
  };
  const Machine ca = canonical(a);
  const Machine cb = canonical(b);
  if (ca.NumStates() != cb.NumStates()) return false;
  const SemiringKind kind = a.Kind();
  auto weq = [&](Weight x, Weight y) {
    if (IsZero(kind, x) || IsZero(kind, y)) return x == y;
    return ApproxEqual(x, y, tol);
  };
  for (StateId s = 0; s < ca.NumStates(); ++s) {
    if (!weq(ca.Final(s), cb.Final(s))) return false;
    const auto &x = ca.Arcs(s);
    const auto &y = cb.Arcs(s);
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i].ilabel != y[i].ilabel || x[i].olabel != y[i].olabel ||
          x[i].nextstate != y[i].nextstate || !weq(x[i].weight, y[i].weight)) {
        return false;
      }
    }
  }
  return true;
}

Machine RemoveEpsilon(const Machine &m) {
  RequirePathSemiring(m, "epsilon removal");
  const SemiringKind kind = m.Kind();
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < m.NumStates(); ++s) out.AddState();
  if (m.Start() != kNoState) out.SetStart(m.Start());
  for (StateId s = 0; s < m.NumStates(); ++s) {
    Weight fw = Zero(kind);
    // Merge parallel arcs produced through different closure states.
    std::map<std::tuple<Label, Label, StateId>, Weight> merged;
    std::vector<std::tuple<Label, Label, StateId>> order;
    for (const auto &[p, d] : EpsilonClosure(m, s, One(kind))) {
      if (m.IsFinal(p)) fw = PlusFast(kind, fw, TimesFast(kind, d, m.Final(p)));
      for (const Arc &a : m.Arcs(p)) {
        if (a.ilabel == kEpsilon && a.olabel == kEpsilon) continue;
        auto key = std::make_tuple(a.ilabel, a.olabel, a.nextstate);
        const Weight w = TimesFast(kind, d, a.weight);
        auto [it, inserted] = merged.emplace(key, w);
        if (inserted) {
          order.push_back(key);
        } else {
          it->second = PlusFast(kind, it->second, w);
        }
      }
    }
    out.SetFinal(s, fw);
    for (const auto &key : order) {
      out.AddArc(s, std::get<0>(key), std::get<1>(key), merged[key], std::get<2>(key));
    }
  }
  return Connect(out);
}

}  // namespace wfst
