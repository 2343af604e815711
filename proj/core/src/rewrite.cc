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

#include "wfst/rewrite.h"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "wfst/decode.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/optimize.h"
#include "wfst/rational.h"

namespace wfst {
namespace {

constexpr SemiringKind kB = SemiringKind::kBoolean;
constexpr SemiringKind kT = SemiringKind::kTropical;

std::vector<Label> Sorted(std::span<const Label> labels) {
  std::set<Label> s(labels.begin(), labels.end());
  s.erase(kEpsilon);
  return {s.begin(), s.end()};
}

std::vector<Label> Plus(std::vector<Label> a, std::initializer_list<Label> extra) {
  a.insert(a.end(), extra);
  return Sorted(a);
}

bool IsEmptyLanguage(const Machine &m) {
  const Machine c = Connect(m);
  for (StateId s = 0; s < c.NumStates(); ++s) {
    if (c.IsFinal(s)) return false;
  }
  return true;
}

std::string Trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Position of the first top-level occurrence of `token` at or after `from`,
// skipping escapes and {names}; npos when absent.
size_t FindTopLevel(std::string_view s, std::string_view token, size_t from = 0,
                    bool outside_groups = false) {
  int depth = 0;
  for (size_t i = from; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\') {
      ++i;
    } else if (c == '{') {
      const size_t close = s.find('}', i);
      if (close == std::string_view::npos) return std::string_view::npos;
      i = close;
    } else if (c == '(' || c == '[') {
      ++depth;
    } else if (c == ')' || c == ']') {
      --depth;
    } else if ((!outside_groups || depth == 0) && s.substr(i, token.size()) == token) {
      return i;
    }
  }
  return std::string_view::npos;
}

// Labels named inside "[ ... ]", registered in ctx.
std::vector<Label> BracketSymbols(const std::string &text, RegexContext &ctx, int line) {
  const std::string t = Trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ParseError("expected a symbol list in brackets", line);
  }
  RegexContext scratch = ctx;
  scratch.add_symbols = true;
  const Machine m = CompileRegex(t, scratch);
  ctx.syms = scratch.syms;
  ctx.alphabet = scratch.alphabet;
  return InputAlphabet(m);
}

std::vector<WeightedAlternative> ParseAlternatives(const std::string &psi, int line) {
  std::vector<WeightedAlternative> out;
  size_t begin = 0;
  for (;;) {
    const size_t bar = FindTopLevel(psi, "|", begin, true);
    std::string alt = Trim(std::string_view(psi).substr(begin, bar == std::string::npos
                                                                     ? std::string::npos
                                                                     : bar - begin));
    WeightedAlternative w;
    if (!alt.empty() && alt.front() == '<') {
      const size_t close = alt.find('>');
      if (close == std::string::npos) throw ParseError("unterminated weight", line);
      const auto weight = ParseWeight(Trim(alt.substr(1, close - 1)));
      if (!weight || !InCarrier(SemiringKind::kTropical, *weight)) {
        throw ParseError("bad weight '" + alt.substr(1, close - 1) + "'", line);
      }
      w.weight = *weight;
      alt = Trim(alt.substr(close + 1));
    }
    w.expr = alt;
    out.push_back(std::move(w));
    if (bar == std::string::npos) return out;
    begin = bar + 1;
  }
}

Machine Symbol(Label l) { return LinearAcceptor(std::vector<Label>{l}, kB); }

// Deterministic boolean acceptor with the tables dropped, so that machines
// built over marker labels compose without symbol checks.
Machine Dfa(const Machine &m) {
  Machine d = Determinize(ConvertKind(m, kB));
  if (d.Start() == kNoState) d = EmptyMachine(kB);
  d.SetInputSymbols(nullptr);
  d.SetOutputSymbols(nullptr);
  return d;
}

bool AcceptsEmpty(const Machine &dfa) {
  return dfa.Start() != kNoState && dfa.IsFinal(dfa.Start());
}

// Transition table of a deterministic acceptor completed over sigma; the
// extra last row is the sink.
struct Table {
  std::vector<std::map<Label, StateId>> next;
  std::vector<bool> final;
  StateId start = 0;
};

Table Complete(const Machine &alpha, std::span<const Label> sigma) {
  if (!IsDeterministic(alpha) || !alpha.IsAcceptor()) {
    throw ContractError("marker: alpha must be a deterministic acceptor");
  }
  Machine a = alpha.Start() == kNoState ? EmptyMachine(alpha.Kind()) : alpha;
  Table t;
  const StateId sink = a.NumStates();
  t.next.resize(sink + 1);
  t.final.resize(sink + 1, false);
  t.start = a.Start();
  for (StateId s = 0; s < a.NumStates(); ++s) {
    t.final[s] = a.IsFinal(s);
    for (const Arc &x : a.Arcs(s)) t.next[s][x.ilabel] = x.nextstate;
  }
  for (auto &row : t.next) {
    for (Label l : sigma) row.emplace(l, sink);
  }
  return t;
}

// The body phi of a rewrite site may contain a single > between two of its
// symbols (a rho occurrence starting inside phi), and, for the replace step,
// a <1 or <2 after that. phase: 0 right after a phi symbol, 1 after an
// inner >, 2 after an inner marker (or at the start of the body).
struct BodyState {
  StateId q;
  int phase;
  auto operator<=>(const BodyState &) const = default;
};

// phi with a single > allowed between consecutive symbols, as an acceptor.
Machine PhiWithGaps(const Machine &phi, Label gt) {
  Machine out(kB);
  std::map<std::pair<StateId, int>, StateId> ids;
  std::vector<std::pair<StateId, int>> queue;
  auto id = [&](StateId q, int after_symbol) {
    auto [it, fresh] = ids.emplace(std::make_pair(q, after_symbol), out.NumStates());
    if (fresh) {
      out.AddState();
      queue.emplace_back(q, after_symbol);
    }
    return it->second;
  };
  out.SetStart(id(phi.Start(), 0));
  for (size_t i = 0; i < queue.size(); ++i) {
    const auto [q, after_symbol] = queue[i];
    const StateId s = ids[queue[i]];
    if (after_symbol && phi.IsFinal(q)) out.SetFinal(s, One(kB));
    for (const Arc &x : phi.Arcs(q)) out.AddArc(s, x.ilabel, x.ilabel, One(kB), id(x.nextstate, 1));
    if (after_symbol) out.AddArc(s, gt, gt, One(kB), id(q, 0));
  }
  return out;
}

// <1 phi > -> <1 psi over sigma plus markers; > elsewhere is deleted and <2
// is copied.
Machine Replace(const Machine &phi, const Machine &psi, std::span<const Label> sigma, Label gt,
                Label lt1, Label lt2) {
  Machine out(kT);
  const StateId outside = out.AddState();
  out.SetStart(outside);
  out.SetFinal(outside, One(kT));
  for (Label x : sigma) out.AddArc(outside, x, x, One(kT), outside);
  out.AddArc(outside, gt, kEpsilon, One(kT), outside);
  out.AddArc(outside, lt2, lt2, One(kT), outside);

  // psi is emitted on epsilon input once the closing > is read.
  const StateId psi_base = out.NumStates();
  for (StateId s = 0; s < psi.NumStates(); ++s) out.AddState();
  for (StateId s = 0; s < psi.NumStates(); ++s) {
    for (const Arc &x : psi.Arcs(s)) {
      out.AddArc(psi_base + s, kEpsilon, x.olabel, x.weight, psi_base + x.nextstate);
    }
    if (psi.IsFinal(s)) out.AddArc(psi_base + s, kEpsilon, kEpsilon, psi.Final(s), outside);
  }

  std::map<BodyState, StateId> ids;
  std::vector<BodyState> queue;
  auto id = [&](BodyState b) {
    auto [it, fresh] = ids.emplace(b, out.NumStates());
    if (fresh) {
      out.AddState();
      queue.push_back(b);
    }
    return it->second;
  };
  out.AddArc(outside, lt1, lt1, One(kT), id({phi.Start(), 2}));
  for (size_t i = 0; i < queue.size(); ++i) {
    const BodyState b = queue[i];
    const StateId s = ids[b];
    for (const Arc &x : phi.Arcs(b.q)) {
      out.AddArc(s, x.ilabel, kEpsilon, One(kT), id({x.nextstate, 0}));
    }
    if (b.phase == 0) {
      if (phi.IsFinal(b.q) && psi.Start() != kNoState) {
        out.AddArc(s, gt, kEpsilon, One(kT), psi_base + psi.Start());
      }
      out.AddArc(s, gt, kEpsilon, One(kT), id({b.q, 1}));
    }
    if (b.phase < 2) {
      out.AddArc(s, lt1, kEpsilon, One(kT), id({b.q, 2}));
      out.AddArc(s, lt2, kEpsilon, One(kT), id({b.q, 2}));
    }
  }
  return out;
}

Machine Psi(const std::vector<WeightedAlternative> &alternatives, RegexContext &ctx) {
  if (alternatives.empty()) throw ContractError("rule: empty replacement");
  std::optional<Machine> out;
  for (const WeightedAlternative &alt : alternatives) {
    if (!InCarrier(kT, alt.weight)) throw DomainError("rule: bad replacement weight");
    Machine m = ConvertKind(CompileRegex(alt.expr, ctx), kT);
    for (StateId s = 0; s < m.NumStates(); ++s) {
      if (m.IsFinal(s)) m.SetFinal(s, Extend(kT, m.Final(s), alt.weight));
    }
    out = out ? Union(*out, m) : m;
  }
  Machine psi = Connect(*out);
  psi.SetInputSymbols(nullptr);
  psi.SetOutputSymbols(nullptr);
  return psi;
}

Machine CompileRuleImpl(const Rule &rule, RegexContext &ctx) {
  if (!ctx.syms) ctx.syms = std::make_shared<SymbolTable>();
  const Machine phi = Dfa(CompileRegex(rule.phi, ctx));
  if (AcceptsEmpty(phi)) throw UnsupportedError("rule: phi accepts the empty string");
  const Machine psi = Psi(rule.psi, ctx);
  const Machine lambda = Dfa(CompileRegex(rule.lambda, ctx));
  const Machine rho = Dfa(CompileRegex(rule.rho, ctx));

  const std::vector<Label> sigma = Sorted(ctx.alphabet);
  Label top = ctx.syms->MaxLabel();
  if (!sigma.empty()) top = std::max(top, sigma.back());
  const Label gt = top + 1, lt1 = top + 2, lt2 = top + 3;
  const Machine sigma_star = SigmaStar(sigma, kB);
  const std::vector<Label> sigma_gt = Plus(sigma, {gt});

  // r: > before every suffix in rho sigma*, found by scanning the reversed
  // input for prefixes in sigma* reverse(rho).
  const Machine r = Reverse(
      Marker(Dfa(Concat(sigma_star, Reverse(rho))), MarkerType::kInsert, sigma, {}, {&gt, 1}));
  // f: <1 or <2 before every phi (with inner >) followed by >.
  const std::vector<Label> brackets{lt1, lt2};
  const Machine f_pattern =
      Dfa(Concat(SigmaStar(sigma_gt, kB), Concat(Symbol(gt), Reverse(PhiWithGaps(phi, gt)))));
  const Machine f = Reverse(Marker(f_pattern, MarkerType::kInsert, sigma_gt, {}, brackets));
  const Machine replace = Replace(phi, psi, sigma, gt, lt1, lt2);
  const Machine left = Dfa(Concat(sigma_star, lambda));
  const Machine l1 = Marker(left, MarkerType::kCheck, sigma, {&lt2, 1}, {&lt1, 1});
  const Machine l2 = Marker(left, MarkerType::kCheckAbsent, sigma, {}, {&lt2, 1});

  Machine out = ConvertKind(r, kT);
  for (const Machine *m : {&f, &replace, &l1, &l2}) out = Compose(out, ConvertKind(*m, kT));
  out = RemoveEpsilon(out);
  out.SetInputSymbols(ctx.syms);
  out.SetOutputSymbols(ctx.syms);
  return out;
}

}  // namespace

Machine Marker(const Machine &alpha, MarkerType type, std::span<const Label> sigma,
               std::span<const Label> pass, std::span<const Label> markers) {
  const Table t = Complete(alpha, sigma);
  const SemiringKind kind = alpha.Kind();
  const Weight one = One(kind);
  const StateId n = static_cast<StateId>(t.next.size());
  Machine out(kind);
  for (StateId s = 0; s < n; ++s) out.AddState();
  if (type == MarkerType::kInsert) {
    // State n + s waits to emit the marker owed on entering final state s.
    for (StateId s = 0; s < n; ++s) out.AddState();
    auto enter = [&](StateId s) { return t.final[s] ? n + s : s; };
    out.SetStart(enter(t.start));
    for (StateId s = 0; s < n; ++s) {
      out.SetFinal(s, one);
      for (const auto &[label, next] : t.next[s]) out.AddArc(s, label, label, one, enter(next));
      for (Label p : pass) out.AddArc(s, p, p, one, s);
      if (t.final[s]) {
        for (Label m : markers) out.AddArc(n + s, kEpsilon, m, one, s);
      }
    }
    return out;
  }
  const bool want_final = type == MarkerType::kCheck;
  out.SetStart(t.start);
  for (StateId s = 0; s < n; ++s) {
    out.SetFinal(s, one);
    for (const auto &[label, next] : t.next[s]) out.AddArc(s, label, label, one, next);
    for (Label p : pass) out.AddArc(s, p, p, one, s);
    if (t.final[s] == want_final) {
      for (Label m : markers) out.AddArc(s, m, kEpsilon, one, s);
    }
  }
  return out;
}

Machine CompileRule(const Rule &rule, RegexContext &ctx) {
  for (const WeightedAlternative &alt : rule.psi) {
    if (alt.weight != 0.0) throw ContractError("rule has weights; compile it as a weighted rule");
  }
  return CompileRuleImpl(rule, ctx);
}

Machine CompileWeightedRule(const Rule &rule, RegexContext &ctx) {
  return CompileRuleImpl(rule, ctx);
}

std::vector<Rewriting> ApplyRewrite(const Machine &rule, std::span<const Label> input,
                                    ApplyMode mode) {
  Machine in = LinearAcceptor(input, rule.Kind());
  in.SetInputSymbols(rule.InputSymbols());
  in.SetOutputSymbols(rule.InputSymbols());
  const Machine c = Compose(in, rule);
  if (c.Start() == kNoState) return {};
  if (mode == ApplyMode::kBest) {
    auto p = BestPath(c);
    if (!p) return {};
    return {{p->output, p->weight}};
  }
  if (!c.IsAcyclic()) throw ContractError("rewrite: infinitely many outputs");
  const Machine d = Determinize(Project(c, ProjectSide::kOutput));
  std::vector<Rewriting> out;
  struct Frame {
    StateId s;
    Rewriting r;
  };
  std::vector<Frame> stack{{d.Start(), {{}, One(d.Kind())}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (d.IsFinal(f.s)) out.push_back({f.r.output, Extend(d.Kind(), f.r.weight, d.Final(f.s))});
    for (const Arc &a : d.Arcs(f.s)) {
      Frame g{a.nextstate, f.r};
      if (a.olabel != kEpsilon) g.r.output.push_back(a.olabel);
      g.r.weight = Extend(d.Kind(), g.r.weight, a.weight);
      stack.push_back(std::move(g));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Rewriting &a, const Rewriting &b) { return a.output < b.output; });
  return out;
}

}  // namespace wfst

namespace wfst {

RuleGrammar ParseRules(std::string_view text) {
  RuleGrammar g;
  g.ctx.syms = std::make_shared<SymbolTable>();
  bool explicit_alphabet = false;
  // Statements end at ';'; a line whose first visible character is '#' is a
  // comment.
  std::string statement;
  int statement_line = 0, line = 0;
  std::vector<std::pair<std::string, int>> statements;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view l = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line;
    if (Trim(l).empty() || Trim(l).front() == '#') continue;
    size_t start = 0;
    for (;;) {
      const size_t semi = FindTopLevel(l, ";", start);
      const std::string_view piece =
          l.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start);
      if (Trim(statement).empty() && !Trim(piece).empty()) statement_line = line;
      statement += std::string(piece) + " ";
      if (semi == std::string_view::npos) break;
      if (!Trim(statement).empty()) statements.emplace_back(Trim(statement), statement_line);
      statement.clear();
      start = semi + 1;
    }
  }
  if (!Trim(statement).empty()) throw ParseError("missing ';'", statement_line);

  std::vector<int> rule_lines;
  for (const auto &[st, at] : statements) {
    auto keyword = [&](std::string_view k) {
      return st.rfind(k, 0) == 0 && st.size() > k.size() &&
             (st[k.size()] == ' ' || st[k.size()] == '=');
    };
    if (keyword("Alphabet")) {
      const size_t eq = st.find('=');
      if (eq == std::string::npos) throw ParseError("expected '='", at);
      const std::vector<Label> labels = BracketSymbols(st.substr(eq + 1), g.ctx, at);
      g.ctx.alphabet.insert(g.ctx.alphabet.end(), labels.begin(), labels.end());
      explicit_alphabet = true;
    } else if (keyword("Class")) {
      const size_t eq = st.find('=');
      if (eq == std::string::npos) throw ParseError("expected '='", at);
      const std::string name = Trim(st.substr(5, eq - 5));
      if (name.empty() || name.find_first_of(" \t{}") != std::string::npos) {
        throw ParseError("bad class name '" + name + "'", at);
      }
      g.ctx.classes[name] = BracketSymbols(st.substr(eq + 1), g.ctx, at);
    } else {
      const size_t arrow = FindTopLevel(st, "->");
      if (arrow == std::string::npos) throw ParseError("expected '->'", at);
      Rule r;
      r.phi = Trim(st.substr(0, arrow));
      const size_t slash = FindTopLevel(st, "/", arrow + 2);
      r.psi = ParseAlternatives(st.substr(arrow + 2, slash == std::string::npos
                                                         ? std::string::npos
                                                         : slash - arrow - 2),
                                at);
      if (slash != std::string::npos) {
        const size_t under = FindTopLevel(st, "_", slash + 1);
        if (under == std::string::npos) throw ParseError("expected '_' in context", at);
        r.lambda = Trim(st.substr(slash + 1, under - slash - 1));
        r.rho = Trim(st.substr(under + 1));
      }
      g.rules.push_back(std::move(r));
      rule_lines.push_back(at);
    }
  }

  // Register every symbol before anything is compiled, so that `.` and
  // complements see the whole alphabet.
  for (size_t i = 0; i < g.rules.size(); ++i) {
    const Rule &r = g.rules[i];
    std::vector<std::string> parts{r.phi, r.lambda, r.rho};
    for (const auto &alt : r.psi) parts.push_back(alt.expr);
    RegexContext scratch = g.ctx;
    scratch.add_symbols = !explicit_alphabet;
    try {
      for (const std::string &part : parts) CompileRegex(part, scratch);
    } catch (const ParseError &e) {
      throw ParseError(e.what(), rule_lines[i]);
    } catch (const ResolutionError &e) {
      throw ResolutionError(std::string(e.what()) + " (not in the declared alphabet)");
    }
    g.ctx = scratch;
  }
  g.ctx.add_symbols = false;
  g.ctx.alphabet = Sorted(g.ctx.alphabet);
  return g;
}

Machine CompileGrammar(RuleGrammar &grammar) {
  std::optional<Machine> out;
  for (const Rule &r : grammar.rules) {
    Machine m = CompileWeightedRule(r, grammar.ctx);
    out = out ? Compose(*out, m) : m;
  }
  if (!out) {
    out = IdentityMachine(grammar.ctx.alphabet, kT);
    out->SetInputSymbols(grammar.ctx.syms);
    out->SetOutputSymbols(grammar.ctx.syms);
  }
  return *out;
}

Machine IntersectSameLength(const Machine &a, const Machine &b) {
  if (a.Kind() != b.Kind()) throw KindError("intersect_samelength: semirings differ");
  std::map<std::pair<Label, Label>, Label> code;
  std::vector<std::pair<Label, Label>> decode{{kEpsilon, kEpsilon}};
  auto encode = [&](const Machine &m) {
    Machine out = m;
    out.SetInputSymbols(nullptr);
    out.SetOutputSymbols(nullptr);
    for (StateId s = 0; s < out.NumStates(); ++s) {
      for (Arc &x : out.MutableArcs(s)) {
        if (x.ilabel == kEpsilon || x.olabel == kEpsilon) {
          throw ContractError("intersect_samelength: epsilon arc");
        }
        auto [it, fresh] = code.emplace(std::make_pair(x.ilabel, x.olabel),
                                        static_cast<Label>(decode.size()));
        if (fresh) decode.push_back(it->first);
        x.ilabel = x.olabel = it->second;
      }
    }
    return out;
  };
  const Machine ea = encode(a);
  const Machine eb = encode(b);
  Machine out = Intersect(ea, eb);
  for (StateId s = 0; s < out.NumStates(); ++s) {
    for (Arc &x : out.MutableArcs(s)) std::tie(x.ilabel, x.olabel) = decode[x.ilabel];
  }
  out.SetInputSymbols(a.InputSymbols());
  out.SetOutputSymbols(a.OutputSymbols());
  return out;
}

namespace {

// Allowed (input, output) pairs of a forest: each tree's input symbol may
// become any output of its leaves; everything else maps to itself.
using Feasible = std::map<Label, std::set<Label>>;

Feasible FeasiblePairs(const std::vector<const DecisionTree *> &trees,
                       const std::vector<Label> &sigma) {
  Feasible f;
  for (Label x : sigma) f[x].insert(x);
  std::set<Label> inputs;
  for (const DecisionTree *t : trees) inputs.insert(t->input);
  for (Label x : inputs) f[x].clear();
  for (const DecisionTree *t : trees) {
    for (const TreeLeaf &leaf : t->leaves) {
      for (const auto &[y, w] : leaf.outputs) f[t->input].insert(y);
    }
  }
  return f;
}

struct LeafLanguages {
  Machine left;   // input prefixes before the symbol
  Machine right;  // input suffixes after it
};

LeafLanguages Contexts(const TreeLeaf &leaf, RegexContext &ctx,
                       const std::vector<Label> &sigma) {
  const Machine sigma_star = SigmaStar(sigma, kB);
  Machine left = sigma_star, right = sigma_star;
  for (const ContextConstraint &c : leaf.constraints) {
    const Machine r = Dfa(CompileRegex(c.regex, ctx));
    Machine lang = c.side == ContextSide::kLeft ? Dfa(Concat(sigma_star, r))
                                                : Dfa(Concat(r, sigma_star));
    if (c.negated) lang = Dfa(Complement(lang, sigma));
    Machine &side = c.side == ContextSide::kLeft ? left : right;
    side = Dfa(Intersect(side, lang));
  }
  return {left, right};
}

// Checks that the leaves' (left, right) context products partition every
// context. A product is encoded as left . sep . right.
void CheckPartition(const std::vector<LeafLanguages> &leaves, const std::vector<Label> &sigma,
                    Label sep) {
  std::vector<Machine> products;
  for (const LeafLanguages &l : leaves) {
    products.push_back(Dfa(Concat(l.left, Concat(Symbol(sep), l.right))));
  }
  for (size_t i = 0; i < products.size(); ++i) {
    for (size_t j = i + 1; j < products.size(); ++j) {
      if (!IsEmptyLanguage(Intersect(products[i], products[j]))) {
        throw ContractError("decision tree: leaf contexts overlap");
      }
    }
  }
  const Machine sigma_star = SigmaStar(sigma, kB);
  const Machine all = Concat(sigma_star, Concat(Symbol(sep), sigma_star));
  Machine covered = EmptyMachine(kB);
  for (const Machine &p : products) covered = Union(covered, p);
  if (!IsEmptyLanguage(Difference(all, Dfa(covered), Plus(sigma, {sep})))) {
    throw ContractError("decision tree: leaf contexts do not cover every context");
  }
}

// Coercion rule of one leaf: in the leaf's context the tree's input symbol
// must become one of the leaf's outputs; anywhere else any feasible pair is
// allowed. Built as (insert > where the right context holds) composed with a
// scanner that tracks the left context and checks the > after the symbol.
Machine LeafRule(Label input, const TreeLeaf &leaf, const LeafLanguages &lang,
                 const std::vector<Label> &sigma, const Feasible &feasible, Label gt) {
  const Machine r = Reverse(Marker(Dfa(Reverse(lang.right)), MarkerType::kInsert, sigma, {},
                                   {&gt, 1}));
  const Table left = Complete(lang.left, sigma);
  // mode 0: free; 1: a > must follow; 2: a > must not follow.
  Machine c(kT);
  std::map<std::pair<StateId, int>, StateId> ids;
  std::vector<std::pair<StateId, int>> queue;
  auto id = [&](StateId q, int mode) {
    auto [it, fresh] = ids.emplace(std::make_pair(q, mode), c.NumStates());
    if (fresh) {
      c.AddState();
      queue.emplace_back(q, mode);
    }
    return it->second;
  };
  c.SetStart(id(left.start, 0));
  for (size_t i = 0; i < queue.size(); ++i) {
    const auto [q, mode] = queue[i];
    const StateId s = ids[queue[i]];
    if (mode == 1) {
      c.AddArc(s, gt, kEpsilon, One(kT), id(q, 0));
      continue;
    }
    c.SetFinal(s, One(kT));
    if (mode == 0) c.AddArc(s, gt, kEpsilon, One(kT), s);
    for (Label x : sigma) {
      const StateId q2 = left.next[q].at(x);
      auto it = feasible.find(x);
      const std::set<Label> &outs = it->second;
      if (x == input && left.final[q]) {
        for (const auto &[y, w] : leaf.outputs) c.AddArc(s, x, y, w, id(q2, 1));
        for (Label y : outs) c.AddArc(s, x, y, One(kT), id(q2, 2));
      } else {
        for (Label y : outs) c.AddArc(s, x, y, One(kT), id(q2, 0));
      }
    }
  }
  return RemoveEpsilon(Compose(ConvertKind(r, kT), c));
}

Machine CompileTreeWith(const DecisionTree &tree, RegexContext &ctx, const Feasible &feasible) {
  if (tree.leaves.empty()) throw ContractError("decision tree without leaves");
  const std::vector<Label> sigma = Sorted(ctx.alphabet);
  if (!std::binary_search(sigma.begin(), sigma.end(), tree.input)) {
    throw ContractError("decision tree input is not in the alphabet");
  }
  Label top = ctx.syms->MaxLabel();
  if (!sigma.empty()) top = std::max(top, sigma.back());
  const Label gt = top + 1;
  std::vector<LeafLanguages> langs;
  for (const TreeLeaf &leaf : tree.leaves) {
    if (leaf.outputs.empty()) throw ContractError("decision tree leaf without outputs");
    for (const auto &[y, w] : leaf.outputs) {
      if (y == kEpsilon) throw ContractError("decision tree outputs must be symbols");
      if (!InCarrier(kT, w)) throw DomainError("decision tree: bad weight");
    }
    langs.push_back(Contexts(leaf, ctx, sigma));
  }
  CheckPartition(langs, sigma, gt);
  std::optional<Machine> out;
  for (size_t i = 0; i < tree.leaves.size(); ++i) {
    Machine rule = LeafRule(tree.input, tree.leaves[i], langs[i], sigma, feasible, gt);
    out = out ? IntersectSameLength(*out, rule) : rule;
  }
  Machine result = Connect(*out);
  result.SetInputSymbols(ctx.syms);
  result.SetOutputSymbols(ctx.syms);
  return result;
}

}  // namespace

Machine CompileTree(const DecisionTree &tree, RegexContext &ctx) {
  if (!ctx.syms) ctx.syms = std::make_shared<SymbolTable>();
  return CompileTreeWith(tree, ctx, FeasiblePairs({&tree}, Sorted(ctx.alphabet)));
}

Machine CompileForest(DecisionForest &forest) {
  if (forest.trees.empty()) throw ContractError("empty decision forest");
  std::vector<const DecisionTree *> trees;
  for (const DecisionTree &t : forest.trees) trees.push_back(&t);
  const Feasible feasible = FeasiblePairs(trees, Sorted(forest.ctx.alphabet));
  std::optional<Machine> out;
  for (const DecisionTree &t : forest.trees) {
    Machine m = CompileTreeWith(t, forest.ctx, feasible);
    out = out ? IntersectSameLength(*out, m) : m;
  }
  Machine result = Connect(*out);
  result.SetInputSymbols(forest.ctx.syms);
  result.SetOutputSymbols(forest.ctx.syms);
  return result;
}

namespace {

struct TreeLine {
  std::vector<std::string> words;
  std::string rest;  // text after the second word (split regexes)
  int line;
};

class TreeParser {
 public:
  TreeParser(std::vector<TreeLine> lines, DecisionForest &forest)
      : lines_(std::move(lines)), forest_(forest) {}

  void Parse() {
    while (pos_ < lines_.size()) {
      const TreeLine &l = lines_[pos_];
      if (l.words[0] == "alphabet") {
        for (size_t i = 1; i < l.words.size(); ++i) AddSymbol(l.words[i]);
        ++pos_;
      } else if (l.words[0] == "class") {
        if (l.words.size() < 2) throw ParseError("class needs a name", l.line);
        std::vector<Label> members;
        for (size_t i = 2; i < l.words.size(); ++i) members.push_back(AddSymbol(l.words[i]));
        forest_.ctx.classes[l.words[1]] = members;
        ++pos_;
      } else {
        tree_ = DecisionTree{};
        Node({});
        forest_.trees.push_back(tree_);
      }
    }
  }

 private:
  Label AddSymbol(const std::string &name) {
    if (auto l = forest_.ctx.syms->Find(name)) return *l;
    const Label l = forest_.ctx.syms->AddSymbol(name);
    forest_.ctx.alphabet.push_back(l);
    return l;
  }

  void Node(std::vector<ContextConstraint> path) {
    if (pos_ >= lines_.size()) {
      throw ParseError("decision tree ends early", lines_.empty() ? 0 : lines_.back().line);
    }
    const TreeLine &l = lines_[pos_++];
    if (l.words[0] == "split") {
      if (l.words.size() < 3 || (l.words[1] != "left" && l.words[1] != "right")) {
        throw ParseError("expected 'split left|right <regex>'", l.line);
      }
      ContextConstraint c{l.words[1] == "left" ? ContextSide::kLeft : ContextSide::kRight,
                          l.rest, false};
      path.push_back(c);
      Node(path);
      path.back().negated = true;
      Node(path);
      return;
    }
    if (l.words[0] != "leaf") throw ParseError("expected 'split' or 'leaf'", l.line);
    if (l.words.size() < 4 || l.words[2] != "->") {
      throw ParseError("expected 'leaf <symbol> -> <outputs>'", l.line);
    }
    const Label input = AddSymbol(l.words[1]);
    if (tree_.input != kNoLabel && tree_.input != input) {
      throw ParseError("leaves of one tree must share their input symbol", l.line);
    }
    tree_.input = input;
    TreeLeaf leaf;
    leaf.constraints = std::move(path);
    Weight w = 0.0;
    bool expect_symbol = true;
    for (size_t i = 3; i < l.words.size(); ++i) {
      const std::string &tok = l.words[i];
      if (tok == "|") {
        if (expect_symbol) throw ParseError("missing output before '|'", l.line);
        expect_symbol = true;
      } else if (tok.front() == '<' && tok.back() == '>' && tok.size() > 2) {
        const auto parsed = ParseWeight(tok.substr(1, tok.size() - 2));
        if (!parsed || !InCarrier(kT, *parsed)) throw ParseError("bad weight " + tok, l.line);
        w = *parsed;
      } else {
        if (!expect_symbol) throw ParseError("expected '|' between outputs", l.line);
        leaf.outputs.emplace_back(AddSymbol(tok), w);
        w = 0.0;
        expect_symbol = false;
      }
    }
    if (expect_symbol) throw ParseError("leaf without output", l.line);
    tree_.leaves.push_back(std::move(leaf));
  }

  std::vector<TreeLine> lines_;
  DecisionForest &forest_;
  DecisionTree tree_;
  size_t pos_ = 0;
};

}  // namespace

DecisionForest ParseTrees(std::string_view text) {
  DecisionForest forest;
  forest.ctx.syms = std::make_shared<SymbolTable>();
  std::vector<TreeLine> lines;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string l = Trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++number;
    if (l.empty() || l.front() == '#') continue;
    TreeLine tl{{}, "", number};
    std::istringstream words(l);
    for (std::string w; words >> w;) tl.words.push_back(w);
    if (tl.words[0] == "split" && tl.words.size() >= 2) {
      const size_t at = l.find(tl.words[1], 5) + tl.words[1].size();
      tl.rest = Trim(l.substr(at));
    }
    lines.push_back(std::move(tl));
  }
  TreeParser(std::move(lines), forest).Parse();
  // Split regexes may name symbols not listed elsewhere.
  RegexContext scratch = forest.ctx;
  scratch.add_symbols = true;
  for (const DecisionTree &t : forest.trees) {
    for (const TreeLeaf &leaf : t.leaves) {
      for (const ContextConstraint &c : leaf.constraints) CompileRegex(c.regex, scratch);
    }
  }
  forest.ctx = scratch;
  forest.ctx.add_symbols = false;
  forest.ctx.alphabet = Sorted(forest.ctx.alphabet);
  return forest;
}

}  // namespace wfst
