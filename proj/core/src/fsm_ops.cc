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

#include "wfst/fsm_ops.h"

#include <algorithm>
#include <charconv>
#include <deque>
#include <set>
#include <sstream>
#include <tuple>

#include "wfst/errors.h"

namespace wfst {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename Int>
bool ParseInt(std::string_view text, Int *out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), *out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

Label ParseLabel(std::string_view token, const std::shared_ptr<SymbolTable> &syms,
                 bool add, int lineno) {
  if (syms) {
    if (auto id = syms->Find(token)) return *id;
    if (add) return syms->AddSymbol(token);
    throw ResolutionError("line " + std::to_string(lineno) + ": unknown symbol '" +
                          std::string(token) + "'");
  }
  Label label = 0;
  if (!ParseInt(token, &label) || label < 0) {
    throw ParseError("bad label '" + std::string(token) + "'", lineno);
  }
  return label;
}

std::string LabelText(Label l, const std::shared_ptr<const SymbolTable> &syms) {
  if (syms) return syms->Symbol(l);
  return std::to_string(l);
}

}  // namespace

Machine ReadText(std::string_view text, SemiringKind kind, const TextOptions &opts) {
  Machine m(kind);
  m.SetInputSymbols(opts.isyms);
  m.SetOutputSymbols(opts.acceptor ? opts.isyms : opts.osyms);
  const auto &osyms = opts.acceptor ? opts.isyms : opts.osyms;
  int lineno = 0;
  size_t pos = 0;
  bool have_start = false;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    auto fields = SplitFields(line);
    if (fields.empty() || fields[0].front() == '#') continue;

    auto parse_state = [&](std::string_view tok) {
      StateId s = 0;
      if (!ParseInt(tok, &s) || s < 0) {
        throw ParseError("bad state id '" + std::string(tok) + "'", lineno);
      }
      m.EnsureState(s);
      return s;
    };
    auto parse_weight = [&](std::string_view tok) {
      auto w = ParseWeight(tok);
      if (!w) throw ParseError("bad weight '" + std::string(tok) + "'", lineno);
      if (!InCarrier(kind, *w)) {
        throw ParseError("weight '" + std::string(tok) + "' outside the " +
                             std::string(KindName(kind)) + " carrier",
                         lineno);
      }
      return *w;
    };

    const size_t arc_fields = opts.acceptor ? 3 : 4;
    const size_t n = fields.size();
    const StateId src = parse_state(fields[0]);
    if (!have_start) {
      m.SetStart(src);
      have_start = true;
    }
    if (n <= 2) {
      m.SetFinal(src, n == 2 ? parse_weight(fields[1]) : One(kind));
    } else if (n == arc_fields || n == arc_fields + 1) {
      const StateId dst = parse_state(fields[1]);
      const Label il = ParseLabel(fields[2], opts.isyms, opts.add_symbols, lineno);
      const Label ol = opts.acceptor
                           ? il
                           : ParseLabel(fields[3], osyms, opts.add_symbols, lineno);
      const Weight w = n == arc_fields + 1 ? parse_weight(fields[arc_fields]) : One(kind);
      m.AddArc(src, il, ol, w, dst);
    } else {
      throw ParseError("expected " + std::to_string(arc_fields) + " or " +
                           std::to_string(arc_fields + 1) + " fields, got " +
                           std::to_string(n),
                       lineno);
    }
  }
  return m;
}

std::string WriteText(const Machine &m, bool acceptor_format) {
  std::ostringstream out;
  if (m.Start() == kNoState) return "";
  std::vector<StateId> order;
  order.push_back(m.Start());
  for (StateId s = 0; s < m.NumStates(); ++s) {
    if (s != m.Start()) order.push_back(s);
  }
  const SemiringKind kind = m.Kind();
  for (StateId s : order) {
    for (const Arc &a : m.Arcs(s)) {
      out << s << '\t' << a.nextstate << '\t' << LabelText(a.ilabel, m.InputSymbols());
      if (!acceptor_format) out << '\t' << LabelText(a.olabel, m.OutputSymbols());
      if (!IsOne(kind, a.weight)) out << '\t' << FormatWeight(a.weight);
      out << '\n';
    }
    if (m.IsFinal(s)) {
      out << s;
      if (!IsOne(kind, m.Final(s))) out << '\t' << FormatWeight(m.Final(s));
      out << '\n';
    }
  }
  return out.str();
}

std::string WriteDot(const Machine &m) {
  std::ostringstream out;
  out << "digraph FST {\n  rankdir = LR;\n";
  for (StateId s = 0; s < m.NumStates(); ++s) {
    out << "  " << s << " [label = \"" << s;
    if (m.IsFinal(s)) out << "/" << FormatWeight(m.Final(s));
    out << "\", shape = " << (m.IsFinal(s) ? "doublecircle" : "circle");
    if (s == m.Start()) out << ", style = bold";
    out << "];\n";
    for (const Arc &a : m.Arcs(s)) {
      out << "  " << s << " -> " << a.nextstate << " [label = \""
          << LabelText(a.ilabel, m.InputSymbols()) << ":"
          << LabelText(a.olabel, m.OutputSymbols()) << "/" << FormatWeight(a.weight)
          << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::vector<bool> AccessibleStates(const Machine &m) {
  std::vector<bool> seen(m.NumStates(), false);
  if (m.Start() == kNoState) return seen;
  std::vector<StateId> stack{m.Start()};
  seen[m.Start()] = true;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const Arc &a : m.Arcs(s)) {
      if (!seen[a.nextstate]) {
        seen[a.nextstate] = true;
        stack.push_back(a.nextstate);
      }
    }
  }
  return seen;
}

std::vector<bool> CoaccessibleStates(const Machine &m) {
  std::vector<std::vector<StateId>> reverse(m.NumStates());
  std::vector<bool> seen(m.NumStates(), false);
  std::vector<StateId> stack;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) reverse[a.nextstate].push_back(s);
    if (m.IsFinal(s)) {
      seen[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId p : reverse[s]) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  return seen;
}

Machine Connect(const Machine &m) {
  auto acc = AccessibleStates(m);
  auto coacc = CoaccessibleStates(m);
  std::vector<bool> keep(m.NumStates());
  bool any = false;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    keep[s] = acc[s] && coacc[s];
    any = any || keep[s];
  }
  Machine out = m;
  out.KeepStates(keep);
  if (!any) {
    // Empty language: keep a lone non-final start so the machine stays usable.
    Machine empty = EmptyMachine(m.Kind());
    empty.CopySymbols(m);
    return empty;
  }
  return out;
}

bool IsDeterministic(const Machine &m) {
  for (StateId s = 0; s < m.NumStates(); ++s) {
    std::set<Label> seen;
    for (const Arc &a : m.Arcs(s)) {
      if (a.ilabel == kEpsilon) return false;
      if (!seen.insert(a.ilabel).second) return false;
    }
  }
  return true;
}

bool IsSubsequential(const Machine &m) {
  // An epsilon-input arc is either the sole arc of a non-final chain state,
  // or a flush arc leading through chain states to an arcless final state.
  auto is_flush_tail = [&](StateId t) {
    for (StateId steps = 0; steps <= m.NumStates(); ++steps) {
      const auto &arcs = m.Arcs(t);
      if (arcs.empty()) return m.IsFinal(t);
      if (arcs.size() != 1 || arcs[0].ilabel != kEpsilon || m.IsFinal(t)) return false;
      t = arcs[0].nextstate;
    }
    return false;
  };
  for (StateId s = 0; s < m.NumStates(); ++s) {
    const auto &arcs = m.Arcs(s);
    std::set<Label> seen;
    int epsilons = 0;
    for (const Arc &a : arcs) {
      if (a.ilabel == kEpsilon) {
        if (++epsilons > 1) return false;
        if ((arcs.size() != 1 || m.IsFinal(s)) && !is_flush_tail(a.nextstate)) return false;
        continue;
      }
      if (!seen.insert(a.ilabel).second) return false;
    }
  }
  return true;
}

Weight WeightOf(const Machine &m, std::span<const Label> input,
                std::optional<std::span<const Label>> output,
                std::optional<int> max_path_len) {
  const SemiringKind kind = m.Kind();
  const Weight zero = Zero(kind);
  if (m.Start() == kNoState) return zero;
  const size_t ni = input.size() + 1;
  const size_t no = output ? output->size() + 1 : 1;
  const size_t nstates = static_cast<size_t>(m.NumStates());
  const size_t nconfig = nstates * ni * no;
  auto index = [&](StateId s, size_t i, size_t j) { return (s * ni + i) * no + j; };

  // Any path longer than nconfig repeats a configuration, i.e. contains a
  // cycle that consumes nothing; dropping it never hurts under min/or.
  const long bound = max_path_len ? *max_path_len : static_cast<long>(nconfig) + 1;

  std::vector<Weight> layer(nconfig, zero), next(nconfig, zero), total(nconfig, zero);
  std::vector<size_t> active{index(m.Start(), 0, 0)}, next_active;
  layer[active[0]] = One(kind);

  Weight result = zero;
  for (long len = 0;; ++len) {
    bool improved = false;
    for (size_t c : active) {
      const Weight w = layer[c];
      const Weight t = PlusFast(kind, total[c], w);
      if (kind == SemiringKind::kReal || t != total[c] || IsZero(kind, total[c])) {
        improved = true;
      }
      total[c] = t;
    }
    if (!improved && IsPathSemiring(kind)) break;
    if (len == bound) {
      if (kind == SemiringKind::kReal && !active.empty()) {
        // Check whether any configuration can still be extended.
        for (size_t c : active) {
          const StateId s = static_cast<StateId>(c / (ni * no));
          const size_t i = (c / no) % ni;
          const size_t j = c % no;
          for (const Arc &a : m.Arcs(s)) {
            const bool in_ok = a.ilabel == kEpsilon ||
                               (i < input.size() && input[i] == a.ilabel);
            const bool out_ok = !output || a.olabel == kEpsilon ||
                                (j < output->size() && (*output)[j] == a.olabel);
            if (in_ok && out_ok && !IsZero(kind, a.weight)) {
              throw DivergenceError("path enumeration did not converge within " +
                                    std::to_string(bound) + " arcs");
            }
          }
        }
      }
      break;
    }
    next_active.clear();
    for (size_t c : active) {
      const Weight w = layer[c];
      layer[c] = zero;
      if (IsZero(kind, w)) continue;
      const StateId s = static_cast<StateId>(c / (ni * no));
      const size_t i = (c / no) % ni;
      const size_t j = c % no;
      for (const Arc &a : m.Arcs(s)) {
        size_t i2 = i, j2 = j;
        if (a.ilabel != kEpsilon) {
          if (i >= input.size() || input[i] != a.ilabel) continue;
          ++i2;
        }
        if (output && a.olabel != kEpsilon) {
          if (j >= output->size() || (*output)[j] != a.olabel) continue;
          ++j2;
        }
        const size_t c2 = index(a.nextstate, i2, j2);
        if (IsZero(kind, next[c2])) next_active.push_back(c2);
        next[c2] = PlusFast(kind, next[c2], TimesFast(kind, w, a.weight));
        if (IsZero(kind, next[c2])) {
          // Stays zero only when the arc weight is zero; drop duplicate entry.
          next_active.pop_back();
        }
      }
    }
    std::swap(layer, next);
    std::swap(active, next_active);
    if (active.empty()) break;
  }
  for (StateId s = 0; s < m.NumStates(); ++s) {
    const size_t c = index(s, input.size(), output ? output->size() : 0);
    if (!IsZero(kind, total[c])) {
      result = PlusFast(kind, result, TimesFast(kind, total[c], m.Final(s)));
    }
  }
  return result;
}

std::vector<StateId> TopologicalOrder(const Machine &m) {
  std::vector<int> indegree(m.NumStates(), 0);
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) ++indegree[a.nextstate];
  }
  std::deque<StateId> queue;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    if (indegree[s] == 0) queue.push_back(s);
  }
  std::vector<StateId> order;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    order.push_back(s);
    for (const Arc &a : m.Arcs(s)) {
      if (--indegree[a.nextstate] == 0) queue.push_back(a.nextstate);
    }
  }
  if (order.size() != static_cast<size_t>(m.NumStates())) {
    throw ContractError("machine has a cycle");
  }
  return order;
}

Machine LinearAcceptor(std::span<const Label> labels, SemiringKind kind) {
  return LinearTransducer(labels, labels, kind, One(kind));
}

Machine LinearTransducer(std::span<const Label> input, std::span<const Label> output,
                         SemiringKind kind, Weight w) {
  Machine m(kind);
  StateId s = m.AddState();
  m.SetStart(s);
  const size_t n = std::max(input.size(), output.size());
  for (size_t i = 0; i < n; ++i) {
    StateId t = m.AddState();
    const Label il = i < input.size() ? input[i] : kEpsilon;
    const Label ol = i < output.size() ? output[i] : kEpsilon;
    m.AddArc(s, il, ol, i == 0 ? w : One(kind), t);
    s = t;
  }
  m.SetFinal(s, n == 0 ? w : One(kind));
  return m;
}

Machine IdentityMachine(std::span<const Label> labels, SemiringKind kind) {
  Machine m(kind);
  m.SetStart(m.AddState());
  m.SetFinal(0, One(kind));
  for (Label l : labels) {
    if (l != kEpsilon) m.AddArc(0, l, l, One(kind), 0);
  }
  return m;
}

Machine EmptyMachine(SemiringKind kind) {
  Machine m(kind);
  m.SetStart(m.AddState());
  return m;
}

Machine ConvertKind(const Machine &m, SemiringKind kind) {
  const SemiringKind from = m.Kind();
  auto convert = [&](Weight w) {
    if (IsZero(from, w)) return Zero(kind);
    if (from == kind) return w;
    if (kind == SemiringKind::kBoolean || from == SemiringKind::kBoolean) return One(kind);
    if (IsOne(from, w)) return One(kind);
    throw UnsupportedError("cannot convert weight " + FormatWeight(w) + " from " +
                           std::string(KindName(from)) + " to " +
                           std::string(KindName(kind)));
  };
  Machine out(kind);
  out.CopySymbols(m);
  for (StateId s = 0; s < m.NumStates(); ++s) out.AddState();
  if (m.Start() != kNoState) out.SetStart(m.Start());
  for (StateId s = 0; s < m.NumStates(); ++s) {
    out.SetFinal(s, convert(m.Final(s)));
    for (const Arc &a : m.Arcs(s)) {
      out.AddArc(s, a.ilabel, a.olabel, convert(a.weight), a.nextstate);
    }
  }
  return out;
}

std::vector<Label> InputAlphabet(const Machine &m) {
  std::set<Label> labels;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) {
      if (a.ilabel != kEpsilon) labels.insert(a.ilabel);
    }
  }
  return {labels.begin(), labels.end()};
}

std::vector<Label> OutputAlphabet(const Machine &m) {
  std::set<Label> labels;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    for (const Arc &a : m.Arcs(s)) {
      if (a.olabel != kEpsilon) labels.insert(a.olabel);
    }
  }
  return {labels.begin(), labels.end()};
}

void ArcSortInput(Machine &m) {
  for (StateId s = 0; s < m.NumStates(); ++s) {
    auto &arcs = m.MutableArcs(s);
    std::stable_sort(arcs.begin(), arcs.end(), [](const Arc &a, const Arc &b) {
      return std::tie(a.ilabel, a.olabel, a.nextstate, a.weight) <
             std::tie(b.ilabel, b.olabel, b.nextstate, b.weight);
    });
  }
}

}  // namespace wfst
