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
// Random machine generators, string enumeration and brute-force oracles
// shared by the unit tests and the acceptance runner.

#ifndef WFST_TESTS_ORACLES_H_
#define WFST_TESTS_ORACLES_H_

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "wfst/fsm_ops.h"
#include "wfst/machine.h"

namespace wfst::testing {


using Rng = std::mt19937_64;
using Str = std::vector<Label>;

struct RandomSpec {
  SemiringKind kind = SemiringKind::kTropical;
  int states = 4;
  int labels = 2;  // Labels are 1..labels.
  int arcs = 6;
  bool acceptor = true;
  bool acyclic = false;
  double eps_in = 0.0;   // Probability of an epsilon input label.
  double eps_out = 0.0;  // Probability of an epsilon output label.
  double final_prob = 0.4;
  int wmax = 5;
};

inline Weight RandomWeight(Rng &rng, SemiringKind kind, int wmax) {
  switch (kind) {
    case SemiringKind::kBoolean:
      return 1.0;
    case SemiringKind::kTropical:
      return static_cast<Weight>(std::uniform_int_distribution<int>(0, wmax)(rng));
    case SemiringKind::kReal:
      return 0.25 * std::uniform_int_distribution<int>(1, 4)(rng);
  }
  return 0.0;
}

inline Machine RandomMachine(Rng &rng, const RandomSpec &spec) {
  Machine m(spec.kind);
  for (int i = 0; i < spec.states; ++i) m.AddState();
  m.SetStart(0);
  std::uniform_int_distribution<int> state(0, spec.states - 1);
  std::uniform_int_distribution<int> label(1, spec.labels);
  std::bernoulli_distribution eps_in(spec.eps_in), eps_out(spec.eps_out),
      final(spec.final_prob);
  for (int i = 0; i < spec.arcs; ++i) {
    StateId s = state(rng), t = state(rng);
    if (spec.acyclic) {
      if (spec.states < 2) break;
      if (s == t) t = (t + 1) % spec.states;
      if (s > t) std::swap(s, t);
    }
    Label il = eps_in(rng) ? kEpsilon : label(rng);
    Label ol = spec.acceptor ? il : (eps_out(rng) ? kEpsilon : label(rng));
    m.AddArc(s, il, ol, RandomWeight(rng, spec.kind, spec.wmax), t);
  }
  for (int i = 0; i < spec.states; ++i) {
    if (final(rng)) m.SetFinal(i, RandomWeight(rng, spec.kind, spec.wmax));
  }
  return m;
}

// All strings over labels 1..nlabels of length <= maxlen, shortest first.
inline std::vector<Str> AllStrings(int nlabels, int maxlen) {
  std::vector<Str> out{{}};
  size_t begin = 0;
  for (int len = 1; len <= maxlen; ++len) {
    const size_t end = out.size();
    for (size_t i = begin; i < end; ++i) {
      for (Label l = 1; l <= nlabels; ++l) {
        Str s = out[i];
        s.push_back(l);
        out.push_back(std::move(s));
      }
    }
    begin = end;
  }
  return out;
}

inline bool WeightEq(SemiringKind kind, Weight a, Weight b, double tol = 1e-9) {
  if (a == b) return true;
  if (IsZero(kind, a) || IsZero(kind, b)) return false;
  return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

inline std::string Show(const Str &s) {
  std::string out;
  for (Label l : s) out += std::to_string(l) + " ";
  return out;
}

// Every output string (length <= max_out) produced by some accepting path of
// m reading `input`. Reachability only, no weights; used to bound which
// output strings a weight comparison has to visit.
inline std::set<Str> OutputsOf(const Machine &m, const Str &input, size_t max_out) {
  std::set<Str> result;
  if (m.Start() == kNoState) return result;
  using Config = std::tuple<StateId, size_t, Str>;
  std::set<Config> seen;
  std::vector<Config> stack{{m.Start(), 0, {}}};
  seen.insert(stack.back());
  while (!stack.empty()) {
    auto [s, i, out] = stack.back();
    stack.pop_back();
    if (i == input.size() && m.IsFinal(s)) result.insert(out);
    for (const Arc &a : m.Arcs(s)) {
      if (a.ilabel != kEpsilon && (i == input.size() || input[i] != a.ilabel)) continue;
      Config next{a.nextstate, a.ilabel == kEpsilon ? i : i + 1, out};
      if (a.olabel != kEpsilon) {
        if (out.size() == max_out) continue;
        std::get<2>(next).push_back(a.olabel);
      }
      if (seen.insert(next).second) stack.push_back(std::move(next));
    }
  }
  return result;
}

// Random operands for the composition law. The left machine only has
// epsilon inputs on epsilon:epsilon arcs, so intermediate strings are never
// longer than the input; the right machine may insert symbols freely.
inline std::pair<Machine, Machine> RandomComposePair(Rng &rng, SemiringKind kind,
                                                     int nlabels, bool acyclic) {
  std::uniform_int_distribution<int> nstates(1, 5);
  auto build = [&](bool left) {
    RandomSpec spec;
    spec.kind = kind;
    spec.states = nstates(rng);
    spec.labels = nlabels;
    spec.arcs = std::uniform_int_distribution<int>(1, 2 * spec.states + 2)(rng);
    spec.acceptor = false;
    spec.acyclic = acyclic;
    spec.eps_in = left ? 0.0 : 0.25;
    spec.eps_out = 0.3;
    spec.final_prob = 0.5;
    Machine m = RandomMachine(rng, spec);
    if (left) {
      std::bernoulli_distribution epsilon_pair(0.15);
      for (StateId s = 0; s < m.NumStates(); ++s) {
        for (Arc &a : m.MutableArcs(s)) {
          if (epsilon_pair(rng)) a.ilabel = a.olabel = kEpsilon;
        }
      }
    }
    return m;
  };
  Machine a = build(true);
  Machine b = build(false);
  return {std::move(a), std::move(b)};
}

// Random deterministic acceptor: every (state, label) gets an arc with
// probability arc_prob.
inline Machine RandomDfa(Rng &rng, SemiringKind kind, int states, int nlabels,
                         double arc_prob = 0.6, int wmax = 3) {
  Machine m(kind);
  for (int i = 0; i < states; ++i) m.AddState();
  m.SetStart(0);
  std::bernoulli_distribution has_arc(arc_prob), final(0.4);
  std::uniform_int_distribution<int> target(0, states - 1);
  for (StateId s = 0; s < states; ++s) {
    for (Label l = 1; l <= nlabels; ++l) {
      if (has_arc(rng)) m.AddArc(s, l, l, RandomWeight(rng, kind, wmax), target(rng));
    }
    if (final(rng)) m.SetFinal(s, RandomWeight(rng, kind, wmax));
  }
  return m;
}

// Random functional transducer: a random acyclic acceptor composed with a
// random input-deterministic transducer whose arcs emit zero or one symbol.
inline std::pair<Machine, Machine> RandomFunctionalParts(Rng &rng, int nlabels) {
  RandomSpec spec;
  spec.states = 4;
  spec.arcs = 7;
  spec.labels = nlabels;
  spec.acyclic = true;
  spec.final_prob = 0.5;
  Machine a = RandomMachine(rng, spec);
  Machine t(SemiringKind::kTropical);
  const int n = 3;
  for (int i = 0; i < n; ++i) t.AddState();
  t.SetStart(0);
  std::bernoulli_distribution has_arc(0.7), eps(0.3), final(0.6);
  std::uniform_int_distribution<int> target(0, n - 1), label(1, nlabels);
  for (StateId s = 0; s < n; ++s) {
    for (Label l = 1; l <= nlabels; ++l) {
      if (has_arc(rng)) {
        t.AddArc(s, l, eps(rng) ? kEpsilon : label(rng),
                 RandomWeight(rng, SemiringKind::kTropical, 3), target(rng));
      }
    }
    if (final(rng)) t.SetFinal(s, RandomWeight(rng, SemiringKind::kTropical, 3));
  }
  return {std::move(a), std::move(t)};
}

// Number of Myhill-Nerode classes of a deterministic machine whose arcs are
// read as opaque (ilabel, olabel, weight) symbols: states are grouped by the
// set of (label string, final weight) pairs they accept, enumerated along
// existing transitions up to NumStates() symbols.
inline size_t MyhillNerodeClasses(const Machine &m) {
  using Symbol = std::tuple<Label, Label, long long>;
  auto key = [](Weight w) { return std::isinf(w) ? LLONG_MAX : std::llround(w * 1e6); };
  std::set<std::vector<std::pair<std::vector<Symbol>, long long>>> classes;
  const size_t depth = static_cast<size_t>(m.NumStates());
  for (StateId p = 0; p < m.NumStates(); ++p) {
    std::vector<std::pair<std::vector<Symbol>, long long>> sig;
    std::vector<std::pair<StateId, std::vector<Symbol>>> frontier{{p, {}}};
    while (!frontier.empty()) {
      auto [s, x] = frontier.back();
      frontier.pop_back();
      if (m.IsFinal(s)) sig.emplace_back(x, key(m.Final(s)));
      if (x.size() == depth) continue;
      for (const Arc &a : m.Arcs(s)) {
        auto y = x;
        y.emplace_back(a.ilabel, a.olabel, key(a.weight));
        frontier.emplace_back(a.nextstate, std::move(y));
      }
    }
    std::sort(sig.begin(), sig.end());
    classes.insert(std::move(sig));
  }
  return classes.size();
}

// Textbook table-filling minimization count for a boolean DFA (trimmed
// first, then completed with a dead state that is not counted).
inline size_t TableFillingClasses(const Machine &trimmed, int nlabels) {
  const int n = trimmed.NumStates() + 1;
  const int dead = n - 1;
  std::vector<std::vector<int>> delta(n, std::vector<int>(nlabels + 1, dead));
  std::vector<bool> final(n, false);
  for (StateId s = 0; s < trimmed.NumStates(); ++s) {
    final[s] = trimmed.IsFinal(s);
    for (const Arc &a : trimmed.Arcs(s)) delta[s][a.ilabel] = a.nextstate;
  }
  std::vector<std::vector<bool>> marked(n, std::vector<bool>(n, false));
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) marked[p][q] = final[p] != final[q];
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        if (marked[p][q]) continue;
        for (int l = 1; l <= nlabels; ++l) {
          if (marked[delta[p][l]][delta[q][l]]) {
            marked[p][q] = marked[q][p] = true;
            changed = true;
            break;
          }
        }
      }
    }
  }
  size_t classes = 0;
  for (int p = 0; p < n; ++p) {
    bool first = true;
    for (int q = 0; q < p; ++q) first = first && marked[p][q];
    if (p != dead && first && marked[p][dead]) ++classes;
  }
  return classes;
}

// Structural isomorphism found by walking both machines from their starts
// and pairing arcs position by position; fails on any label, weight, final
// weight or target disagreement.
inline bool Isomorphic(const Machine &a, const Machine &b, double tol = 1e-9) {
  if (a.NumStates() != b.NumStates() || a.NumArcs() != b.NumArcs()) return false;
  if (a.Start() == kNoState || b.Start() == kNoState) return a.Start() == b.Start();
  std::vector<StateId> map(a.NumStates(), kNoState), inv(b.NumStates(), kNoState);
  std::vector<StateId> stack{a.Start()};
  map[a.Start()] = b.Start();
  inv[b.Start()] = a.Start();
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    const StateId t = map[s];
    if (!WeightEq(a.Kind(), a.Final(s), b.Final(t), tol)) return false;
    const auto &x = a.Arcs(s);
    const auto &y = b.Arcs(t);
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i].ilabel != y[i].ilabel || x[i].olabel != y[i].olabel ||
          !WeightEq(a.Kind(), x[i].weight, y[i].weight, tol)) {
        return false;
      }
      const StateId n = x[i].nextstate, m = y[i].nextstate;
      if (map[n] == kNoState && inv[m] == kNoState) {
        map[n] = m;
        inv[m] = n;
        stack.push_back(n);
      } else if (map[n] != m || inv[m] != n) {
        return false;
      }
    }
  }
  return true;
}

struct EnumeratedPath {
  Str input, output;
  Weight weight;
  bool operator<(const EnumeratedPath &o) const {
    return std::tie(input, output, weight) < std::tie(o.input, o.output, o.weight);
  }
  bool operator==(const EnumeratedPath &o) const = default;
};

// Every accepting path of an acyclic tropical machine, sorted.
inline std::vector<EnumeratedPath> AllPaths(const Machine &m) {
  std::vector<EnumeratedPath> out;
  if (m.Start() == kNoState) return out;
  struct Frame {
    StateId s;
    EnumeratedPath p;
  };
  std::vector<Frame> stack{{m.Start(), {{}, {}, 0.0}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (m.IsFinal(f.s)) {
      EnumeratedPath done = f.p;
      done.weight += m.Final(f.s);
      out.push_back(std::move(done));
    }
    for (const Arc &a : m.Arcs(f.s)) {
      Frame g{a.nextstate, f.p};
      if (a.ilabel != kEpsilon) g.p.input.push_back(a.ilabel);
      if (a.olabel != kEpsilon) g.p.output.push_back(a.olabel);
      g.p.weight += a.weight;
      stack.push_back(std::move(g));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Single-source distances of an acyclic machine by enumerating every path
// prefix from the start.
inline std::vector<Weight> EnumeratedDistances(const Machine &m) {
  std::vector<Weight> d(m.NumStates(), kInfinity);
  std::vector<std::pair<StateId, Weight>> stack{{m.Start(), 0.0}};
  while (!stack.empty()) {
    auto [s, w] = stack.back();
    stack.pop_back();
    d[s] = std::min(d[s], w);
    for (const Arc &a : m.Arcs(s)) stack.emplace_back(a.nextstate, w + a.weight);
  }
  return d;
}

// Random single-path observation acceptor plus three random model stages
// without epsilon inputs (so every composition stays acyclic). Labels are
// 1..nlabels on every tape.
inline std::vector<Machine> RandomCascade(Rng &rng, int nlabels = 3) {
  std::vector<Machine> stages;
  std::uniform_int_distribution<int> len(1, 4), label(1, nlabels);
  Str obs(len(rng));
  for (Label &l : obs) l = label(rng);
  stages.push_back(LinearAcceptor(obs, SemiringKind::kTropical));
  for (int k = 0; k < 3; ++k) {
    RandomSpec spec;
    spec.states = 2 + k % 2;
    spec.labels = nlabels;
    spec.arcs = 3 * spec.states + 2;
    spec.acceptor = k == 2;
    spec.eps_out = k == 1 ? 0.2 : 0.0;
    spec.final_prob = 0.6;
    spec.wmax = 4;
    stages.push_back(RandomMachine(rng, spec));
  }
  return stages;
}

// A recognition-style cascade (observations -> phones -> words -> grammar)
// with `words` vocabulary entries of which only one matches the
// observations: everything else is a dead branch for this input.
inline std::vector<Machine> DeadBranchCascade(int words = 20) {
  constexpr SemiringKind kT = SemiringKind::kTropical;
  const int phones = 8;
  // Word w is spelled by three phones.
  auto spell = [&](int w) {
    return Str{1 + w % phones, 1 + (w / phones + w) % phones, 1 + (w * 3 + 1) % phones};
  };
  std::vector<Machine> stages;
  stages.push_back(LinearAcceptor(spell(0), kT));
  // Acoustic stage: each observation maps to its own phone.
  Machine a(kT);
  a.AddState();
  a.SetStart(0);
  a.SetFinal(0, 0);
  for (Label p = 1; p <= phones; ++p) a.AddArc(0, p, p, 0.1 * p, 0);
  stages.push_back(std::move(a));
  // Dictionary: one chain per word; the word is emitted on the first phone.
  Machine d(kT);
  d.AddState();
  d.SetStart(0);
  d.SetFinal(0, 0);
  for (int w = 0; w < words; ++w) {
    const Str sp = spell(w);
    StateId prev = 0;
    for (size_t i = 0; i < sp.size(); ++i) {
      const StateId next = i + 1 == sp.size() ? 0 : d.AddState();
      d.AddArc(prev, sp[i], i == 0 ? 100 + w : kEpsilon, 0, next);
      prev = next;
    }
  }
  stages.push_back(std::move(d));
  // Grammar: unigram word loop.
  Machine g(kT);
  g.AddState();
  g.SetStart(0);
  g.SetFinal(0, 0);
  for (int w = 0; w < words; ++w) g.AddArc(0, 100 + w, 100 + w, 1.0 + 0.01 * w, 0);
  stages.push_back(std::move(g));
  return stages;
}

inline std::string Describe(const Str &u, const Str &v, Weight got, Weight want) {
  return "[" + Show(u) + "] -> [" + Show(v) + "]: got " + std::to_string(got) + ", want " +
         std::to_string(want);
}

// First input string (output wildcard) on which a and b disagree.
inline std::optional<std::string> InputWeightMismatch(const Machine &a, const Machine &b,
                                                      int nlabels, int maxlen,
                                                      double tol = 1e-9) {
  for (const Str &s : AllStrings(nlabels, maxlen)) {
    const Weight wa = WeightOf(a, s);
    const Weight wb = WeightOf(b, s);
    if (!WeightEq(a.Kind(), wa, wb, tol)) return Describe(s, {}, wa, wb);
  }
  return std::nullopt;
}

// First (input, output) pair on which a and b disagree. Outputs are taken
// from what either machine can produce, so the check is exhaustive up to the
// length bounds.
inline std::optional<std::string> PairWeightMismatch(const Machine &a, const Machine &b,
                                                     int nlabels, int max_in, int max_out,
                                                     double tol = 1e-9) {
  for (const Str &u : AllStrings(nlabels, max_in)) {
    std::set<Str> ws = OutputsOf(a, u, max_out);
    for (const Str &w : OutputsOf(b, u, max_out)) ws.insert(w);
    for (const Str &w : ws) {
      const Weight wa = WeightOf(a, u, w);
      const Weight wb = WeightOf(b, u, w);
      if (!WeightEq(a.Kind(), wa, wb, tol)) return Describe(u, w, wa, wb);
    }
  }
  return std::nullopt;
}

// Checks c(u, w) = (+)_v a(u, v) (x) b(v, w) for |u| <= max_in, |w| <= max_out,
// with intermediate strings v up to max_mid long.
inline std::optional<std::string> ComposeLawMismatch(const Machine &a, const Machine &b,
                                                     const Machine &c, int nlabels,
                                                     int max_in, int max_out, int max_mid,
                                                     double tol = 1e-9) {
  const SemiringKind kind = a.Kind();
  for (const Str &u : AllStrings(nlabels, max_in)) {
    std::map<Str, Weight> want;
    for (const Str &v : OutputsOf(a, u, max_mid)) {
      const Weight wa = WeightOf(a, u, v);
      for (const Str &w : OutputsOf(b, v, max_out)) {
        Weight &slot = want.try_emplace(w, Zero(kind)).first->second;
        slot = PlusFast(kind, slot, TimesFast(kind, wa, WeightOf(b, v, w)));
      }
    }
    std::set<Str> ws = OutputsOf(c, u, max_out);
    for (const auto &[w, _] : want) ws.insert(w);
    for (const Str &w : ws) {
      const Weight got = WeightOf(c, u, w);
      auto it = want.find(w);
      const Weight expect = it == want.end() ? Zero(kind) : it->second;
      if (!WeightEq(kind, got, expect, tol)) return Describe(u, w, got, expect);
    }
  }
  return std::nullopt;
}

}  // namespace wfst::testing

#endif  // WFST_TESTS_ORACLES_H_
