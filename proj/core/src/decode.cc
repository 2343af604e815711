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

#include "wfst/decode.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <string>
#include <tuple>

#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/lazy.h"
#include "wfst/rational.h"

namespace wfst {
namespace {

void RequireTropical(SemiringKind kind, const char *op) {
  if (kind != SemiringKind::kTropical) {
    throw UnsupportedError(std::string(op) + " requires the tropical semiring, got " +
                           std::string(KindName(kind)));
  }
}

bool SameCost(Weight a, Weight b) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Shortest-path tree over an Fsm with deterministic tie-breaking.
class PathTree {
 public:
  explicit PathTree(Fsm &m) : m_(m) {}

  void Ensure(StateId s) {
    if (static_cast<size_t>(s) >= d_.size()) {
      d_.resize(s + 1, kInfinity);
      pred_.resize(s + 1, kNoState);
      pred_arc_.resize(s + 1);
      arcs_.resize(s + 1);
      seen_.resize(s + 1, false);
    }
  }

  const std::vector<Arc> &ArcsOf(StateId s) {
    Ensure(s);
    if (!arcs_[s]) arcs_[s] = m_.Arcs(s);
    return *arcs_[s];
  }

  void Discover(StateId s) {
    Ensure(s);
    if (!seen_[s]) {
      seen_[s] = true;
      ++discovered_;
    }
  }

  // Returns true when d[next] strictly improved.
  bool Relax(StateId p, const Arc &a) {
    Discover(a.nextstate);
    const StateId s = a.nextstate;
    const Weight cand = d_[p] + a.weight;
    if (!SameCost(cand, d_[s]) && cand < d_[s]) {
      d_[s] = cand;
      pred_[s] = p;
      pred_arc_[s] = a;
      return true;
    }
    if (SameCost(cand, d_[s]) && s != start_ && p != s && Prefer(p, a, s) && !Reaches(p, s)) {
      pred_[s] = p;
      pred_arc_[s] = a;
    }
    return false;
  }

  void Init(StateId start) {
    start_ = start;
    Discover(start);
    d_[start] = 0.0;
  }

  size_t Discovered() const { return discovered_; }
  DistanceMap &Distances() { return d_; }

  std::optional<Path> Extract() {
    StateId best = kNoState;
    Weight best_cost = kInfinity;
    for (StateId s = 0; s < static_cast<StateId>(d_.size()); ++s) {
      if (!seen_[s] || std::isinf(d_[s])) continue;
      const Weight f = m_.Final(s);
      if (std::isinf(f)) continue;
      const Weight c = d_[s] + f;
      if (best == kNoState || (!SameCost(c, best_cost) && c < best_cost)) {
        best = s;
        best_cost = c;
      }
    }
    if (best == kNoState) return std::nullopt;
    return Trace(best, best_cost);
  }

  Path Trace(StateId last, Weight cost) const {
    Path p;
    p.weight = cost;
    std::vector<Arc> arcs;
    StateId s = last;
    p.states.push_back(s);
    for (size_t steps = 0; s != start_; ++steps) {
      if (steps > d_.size()) throw ContractError("best path: predecessor cycle");
      arcs.push_back(pred_arc_[s]);
      s = pred_[s];
      p.states.push_back(s);
    }
    std::reverse(arcs.begin(), arcs.end());
    std::reverse(p.states.begin(), p.states.end());
    for (const Arc &a : arcs) {
      if (a.ilabel != kEpsilon) p.input.push_back(a.ilabel);
      if (a.olabel != kEpsilon) p.output.push_back(a.olabel);
    }
    return p;
  }

 private:
  bool Prefer(StateId p, const Arc &a, StateId s) const {
    const Arc &cur = pred_arc_[s];
    return std::make_tuple(p, a.ilabel, a.olabel) <
           std::make_tuple(pred_[s], cur.ilabel, cur.olabel);
  }

  // Whether s lies on the predecessor chain of p.
  bool Reaches(StateId p, StateId s) const {
    for (size_t steps = 0; p != kNoState && steps <= d_.size(); ++steps) {
      if (p == s) return true;
      if (p == start_) return false;
      p = pred_[p];
    }
    return true;
  }

  Fsm &m_;
  StateId start_ = kNoState;
  DistanceMap d_;
  std::vector<StateId> pred_;
  std::vector<Arc> pred_arc_;
  std::vector<std::optional<std::vector<Arc>>> arcs_;
  std::vector<bool> seen_;
  size_t discovered_ = 0;
};

void RunAcyclic(Fsm &m, PathTree &t) {
  // Iterative DFS for a reverse postorder; gray nodes on the stack mark a
  // cycle.
  const StateId start = m.Start();
  std::vector<uint8_t> color;
  auto color_of = [&](StateId s) -> uint8_t & {
    if (static_cast<size_t>(s) >= color.size()) color.resize(s + 1, 0);
    return color[s];
  };
  std::vector<StateId> post;
  std::vector<std::pair<StateId, size_t>> stack{{start, 0}};
  color_of(start) = 1;
  while (!stack.empty()) {
    auto &[s, i] = stack.back();
    const auto &arcs = t.ArcsOf(s);
    if (i < arcs.size()) {
      const StateId n = arcs[i++].nextstate;
      uint8_t &c = color_of(n);
      if (c == 1) throw ContractError("shortest distance: acyclic algorithm given a cycle");
      if (c == 0) {
        c = 1;
        stack.emplace_back(n, 0);
      }
    } else {
      color_of(s) = 2;
      post.push_back(s);
      stack.pop_back();
    }
  }
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    for (const Arc &a : t.ArcsOf(*it)) t.Relax(*it, a);
  }
}

void RunDijkstra(Fsm &m, PathTree &t) {
  using Item = std::pair<Weight, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<bool> done;
  heap.emplace(0.0, m.Start());
  while (!heap.empty()) {
    const auto [c, s] = heap.top();
    heap.pop();
    if (static_cast<size_t>(s) >= done.size()) done.resize(s + 1, false);
    if (done[s]) continue;
    done[s] = true;
    for (const Arc &a : t.ArcsOf(s)) {
      if (a.weight < 0) {
        throw ContractError("shortest distance: Dijkstra given a negative weight");
      }
      if (t.Relax(s, a)) heap.emplace(t.Distances()[a.nextstate], a.nextstate);
    }
  }
}

void RunBellmanFord(Fsm &m, PathTree &t) {
  std::deque<StateId> queue{m.Start()};
  std::vector<bool> queued;
  std::vector<size_t> pops;
  auto grow = [&](StateId s) {
    if (static_cast<size_t>(s) >= queued.size()) {
      queued.resize(s + 1, false);
      pops.resize(s + 1, 0);
    }
  };
  grow(m.Start());
  queued[m.Start()] = true;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    queued[s] = false;
    if (++pops[s] > t.Discovered() + 1) {
      throw ContractError("shortest distance: negative cycle");
    }
    for (const Arc &a : t.ArcsOf(s)) {
      grow(a.nextstate);
      if (t.Relax(s, a) && !queued[a.nextstate]) {
        queued[a.nextstate] = true;
        queue.push_back(a.nextstate);
      }
    }
  }
}

void Run(Fsm &m, PathTree &t, ShortestDistanceAlgo algo) {
  switch (algo) {
    case ShortestDistanceAlgo::kAcyclic:
      RunAcyclic(m, t);
      break;
    case ShortestDistanceAlgo::kDijkstra:
      RunDijkstra(m, t);
      break;
    case ShortestDistanceAlgo::kBellmanFord:
      RunBellmanFord(m, t);
      break;
  }
}

ShortestDistanceAlgo PickAlgo(const Machine &m) {
  if (m.IsAcyclic()) return ShortestDistanceAlgo::kAcyclic;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) {
      if (a.weight < 0) return ShortestDistanceAlgo::kBellmanFord;
    }
  }
  return ShortestDistanceAlgo::kDijkstra;
}

}  // namespace

DistanceMap ShortestDistance(Fsm &m, ShortestDistanceAlgo algo) {
  RequireTropical(m.Kind(), "shortest distance");
  if (m.Start() == kNoState) return {};
  PathTree t(m);
  t.Init(m.Start());
  Run(m, t, algo);
  return std::move(t.Distances());
}

DistanceMap ShortestDistance(const Machine &m, ShortestDistanceAlgo algo) {
  MachineFsm f(m);
  DistanceMap d = ShortestDistance(f, algo);
  d.resize(m.NumStates(), kInfinity);
  return d;
}

DistanceMap ShortestDistanceToFinal(const Machine &m) {
  const SemiringKind kind = m.Kind();
  if (!IsPathSemiring(kind)) {
    throw UnsupportedError("distance to final requires boolean or tropical weights");
  }
  std::vector<std::vector<std::pair<StateId, Weight>>> rev(m.NumStates());
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) rev[a.nextstate].emplace_back(s, a.weight);
  }
  DistanceMap d(m.NumStates(), Zero(kind));
  std::deque<StateId> queue;
  std::vector<bool> queued(m.NumStates(), false);
  std::vector<size_t> pops(m.NumStates(), 0);
  for (StateId s = 0; s < m.NumStates(); ++s) {
    if (m.IsFinal(s)) {
      d[s] = m.Final(s);
      queue.push_back(s);
      queued[s] = true;
    }
  }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    queued[s] = false;
    if (++pops[s] > static_cast<size_t>(m.NumStates()) + 1) {
      throw ContractError("distance to final: negative cycle");
    }
    for (auto [p, w] : rev[s]) {
      const Weight upd = PlusFast(kind, d[p], TimesFast(kind, w, d[s]));
      if (upd != d[p]) {
        d[p] = upd;
        if (!queued[p]) {
          queued[p] = true;
          queue.push_back(p);
        }
      }
    }
  }
  return d;
}

std::optional<Path> BestPath(Fsm &m) {
  RequireTropical(m.Kind(), "best path");
  if (m.Start() == kNoState) return std::nullopt;
  PathTree t(m);
  t.Init(m.Start());
  RunBellmanFord(m, t);
  return t.Extract();
}

std::optional<Path> BestPath(const Machine &m) {
  RequireTropical(m.Kind(), "best path");
  if (m.Start() == kNoState) return std::nullopt;
  MachineFsm f(m);
  PathTree t(f);
  t.Init(m.Start());
  Run(f, t, PickAlgo(m));
  return t.Extract();
}

DecodeResult BeamDecode(Fsm &m, Weight beam) {
  RequireTropical(m.Kind(), "beam decode");
  if (std::isnan(beam) || beam < 0) throw DomainError("beam must be a non-negative cost");
  DecodeResult result;
  const StateId start = m.Start();
  if (start == kNoState) return result;

  struct Info {
    Weight cost = kInfinity;
    StateId pred = kNoState;
    Arc arc{};
    bool closed = false;
  };
  std::vector<Info> info;
  auto at = [&](StateId s) -> Info & {
    if (static_cast<size_t>(s) >= info.size()) info.resize(s + 1);
    return info[s];
  };
  using Item = std::pair<Weight, StateId>;
  using Heap = std::priority_queue<Item, std::vector<Item>, std::greater<>>;
  std::vector<Heap> frames(1);
  at(start).cost = 0.0;
  frames[0].emplace(0.0, start);

  StateId best_final = kNoState;
  Weight best_cost = kInfinity;
  for (size_t f = 0; f < frames.size(); ++f) {
    std::optional<Weight> frame_best;
    while (!frames[f].empty()) {
      const auto [c, s] = frames[f].top();
      frames[f].pop();
      Info &self = at(s);
      if (self.closed || c > self.cost) continue;
      self.closed = true;
      if (!frame_best) {
        frame_best = c;
      } else if (c > *frame_best + beam) {
        ++result.stats.pruned_states;
        continue;
      }
      ++result.stats.expanded_states;
      const Weight fw = m.Final(s);
      if (!std::isinf(fw)) {
        const Weight total = c + fw;
        if (best_final == kNoState || total < best_cost ||
            (SameCost(total, best_cost) && s < best_final)) {
          best_final = s;
          best_cost = total;
        }
      }
      for (const Arc &a : m.Arcs(s)) {
        if (a.weight < 0) throw ContractError("beam decode: negative arc weight");
        const Weight nc = c + a.weight;
        Info &next = at(a.nextstate);
        if (next.closed) continue;
        const bool better = nc < next.cost && !SameCost(nc, next.cost);
        const bool tie = SameCost(nc, next.cost) &&
                         std::make_tuple(s, a.ilabel, a.olabel) <
                             std::make_tuple(next.pred, next.arc.ilabel, next.arc.olabel);
        if (!better && !tie) continue;
        if (better) next.cost = nc;
        next.pred = s;
        next.arc = a;
        const size_t nf = a.ilabel == kEpsilon ? f : f + 1;
        if (nf >= frames.size()) frames.resize(nf + 1);
        if (better) frames[nf].emplace(next.cost, a.nextstate);
      }
    }
    ++result.stats.frames;
  }
  if (best_final == kNoState) return result;

  Path p;
  p.weight = best_cost;
  std::vector<Arc> arcs;
  for (StateId s = best_final;; s = info[s].pred) {
    p.states.push_back(s);
    if (s == start) break;
    arcs.push_back(info[s].arc);
  }
  std::reverse(arcs.begin(), arcs.end());
  std::reverse(p.states.begin(), p.states.end());
  for (const Arc &a : arcs) {
    if (a.ilabel != kEpsilon) p.input.push_back(a.ilabel);
    if (a.olabel != kEpsilon) p.output.push_back(a.olabel);
  }
  result.best = std::move(p);
  return result;
}

DecodeResult BeamDecode(const CascadeSpec &c, Weight beam) {
  if (c.stages.empty()) throw ContractError("beam decode: empty cascade");
  for (const auto &stage : c.stages) RequireTropical(stage->Kind(), "beam decode");
  if (!c.stages[0]->IsAcyclic()) {
    throw ContractError("beam decode: the observation stage must be acyclic");
  }
  std::shared_ptr<Fsm> cur = std::make_shared<MachineFsm>(c.stages[0]);
  for (size_t i = 1; i < c.stages.size(); ++i) {
    CheckComposable(*c.stages[i - 1], *c.stages[i]);
    cur = std::make_shared<LazyCompose>(cur, std::make_shared<MachineFsm>(c.stages[i]));
  }
  return BeamDecode(*cur, beam);
}

Machine LatticePrune(const Machine &l, Weight threshold) {
  RequireTropical(l.Kind(), "lattice prune");
  if (std::isnan(threshold) || threshold < 0) {
    throw DomainError("prune threshold must be a non-negative cost");
  }
  if (l.Start() == kNoState) return l;
  if (!l.IsAcyclic()) throw ContractError("lattice prune: lattice must be acyclic");
  const DistanceMap fwd = ShortestDistance(l, ShortestDistanceAlgo::kAcyclic);
  const DistanceMap bwd = ShortestDistanceToFinal(l);
  const Weight best = bwd[l.Start()];
  if (std::isinf(best)) return EmptyMachine(l.Kind());
  const Weight bound = best + threshold;
  auto within = [&](Weight c) { return !std::isinf(c) && (c <= bound || SameCost(c, bound)); };

  Machine out(l.Kind());
  out.CopySymbols(l);
  for (StateId s = 0; s < l.NumStates(); ++s) out.AddState();
  out.SetStart(l.Start());
  for (StateId s = 0; s < l.NumStates(); ++s) {
    if (l.IsFinal(s) && within(fwd[s] + l.Final(s))) out.SetFinal(s, l.Final(s));
    for (const Arc &a : l.Arcs(s)) {
      if (within(fwd[s] + a.weight + bwd[a.nextstate])) out.AddArc(s, a);
    }
  }
  return Connect(out);
}

std::optional<Path> Rescore(const Machine &l, const Machine &full) {
  return BestPath(Compose(l, full));
}

}  // namespace wfst
