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

#include "wfst/regex.h"

#include <algorithm>
#include <set>

#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/optimize.h"
#include "wfst/rational.h"

namespace wfst {
namespace {

constexpr SemiringKind kB = SemiringKind::kBoolean;
constexpr std::string_view kSpecial = "()|&*+?[]{}.~^\\";

Machine SymbolSet(const std::vector<Label> &labels) {
  Machine m(kB);
  m.AddState();
  m.AddState();
  m.SetStart(0);
  m.SetFinal(1, One(kB));
  for (Label l : std::set<Label>(labels.begin(), labels.end())) m.AddArc(0, l, l, One(kB), 1);
  return m;
}

Machine EpsilonMachine() {
  Machine m(kB);
  m.SetStart(m.AddState());
  m.SetFinal(0, One(kB));
  return m;
}

class Parser {
 public:
  Parser(std::string_view text, RegexContext &ctx) : text_(text), ctx_(ctx) {}

  Machine Parse() {
    Machine m = Alternation();
    Skip();
    if (pos_ < text_.size()) Fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return m;
  }

 private:
  [[noreturn]] void Fail(const std::string &msg) const {
    throw ParseError("regex \"" + std::string(text_) + "\" at " + std::to_string(pos_) + ": " + msg,
                     0);
  }

  void Skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool Peek(char c) {
    Skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool Eat(char c) {
    if (!Peek(c)) return false;
    ++pos_;
    return true;
  }

  Machine Alternation() {
    Machine m = Conjunction();
    while (Eat('|')) m = Union(m, Conjunction());
    return m;
  }

  Machine Conjunction() {
    Machine m = Concatenation();
    while (Eat('&')) m = Determinize(Intersect(m, Concatenation()));
    return m;
  }

  bool AtomStarts() {
    Skip();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    return c == '(' || c == '[' || c == '{' || c == '.' || c == '~' || c == '\\' ||
           kSpecial.find(c) == std::string_view::npos;
  }

  Machine Concatenation() {
    Machine m = EpsilonMachine();
    bool first = true;
    while (AtomStarts()) {
      Machine next = Unary();
      m = first ? std::move(next) : Concat(m, next);
      first = false;
    }
    return m;
  }

  Machine Unary() {
    if (Eat('~')) return Complement(Unary(), ctx_.alphabet);
    Machine m = Atom();
    for (;;) {
      if (Eat('*')) {
        m = Closure(m);
      } else if (Eat('+')) {
        m = Concat(m, Closure(m));
      } else if (Eat('?')) {
        m = Union(m, EpsilonMachine());
      } else {
        return m;
      }
    }
  }

  Machine Atom() {
    Skip();
    if (Eat('(')) {
      Machine m = Alternation();
      if (!Eat(')')) Fail("missing ')'");
      return m;
    }
    if (Eat('.')) return SymbolSet(ctx_.alphabet);
    if (Eat('[')) {
      const bool negate = Eat('^');
      std::vector<Label> members;
      while (!Eat(']')) {
        if (pos_ >= text_.size()) Fail("missing ']'");
        for (Label l : Symbols()) members.push_back(l);
      }
      if (!negate) return SymbolSet(members);
      std::vector<Label> rest;
      for (Label l : ctx_.alphabet) {
        if (std::find(members.begin(), members.end(), l) == members.end()) rest.push_back(l);
      }
      return SymbolSet(rest);
    }
    return SymbolSet(Symbols());
  }

  // One literal, escaped character or {name}; classes expand to several
  // labels.
  std::vector<Label> Symbols() {
    Skip();
    if (pos_ >= text_.size()) Fail("expected a symbol");
    std::string name;
    if (text_[pos_] == '{') {
      const size_t close = text_.find('}', pos_);
      if (close == std::string_view::npos) Fail("missing '}'");
      name = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      if (auto it = ctx_.classes.find(name); it != ctx_.classes.end()) return it->second;
    } else {
      if (text_[pos_] == '\\') {
        if (++pos_ >= text_.size()) Fail("dangling escape");
      } else if (kSpecial.find(text_[pos_]) != std::string_view::npos) {
        Fail("unexpected '" + std::string(1, text_[pos_]) + "'");
      }
      // A UTF-8 character is one symbol.
      size_t len = 1;
      while (pos_ + len < text_.size() && (text_[pos_ + len] & 0xC0) == 0x80) ++len;
      name = std::string(text_.substr(pos_, len));
      pos_ += len;
    }
    return {Resolve(name)};
  }

  Label Resolve(const std::string &name) {
    if (auto l = ctx_.syms->Find(name)) return *l;
    if (!ctx_.add_symbols) throw ResolutionError("unknown symbol '" + name + "'");
    const Label l = ctx_.syms->AddSymbol(name);
    ctx_.alphabet.push_back(l);
    return l;
  }

  std::string_view text_;
  RegexContext &ctx_;
  size_t pos_ = 0;
};

}  // namespace

Machine CompileRegex(std::string_view expr, RegexContext &ctx) {
  if (!ctx.syms) ctx.syms = std::make_shared<SymbolTable>();
  Machine m = Determinize(Parser(expr, ctx).Parse());
  if (m.Start() == kNoState) m = EmptyMachine(kB);
  m.SetInputSymbols(ctx.syms);
  m.SetOutputSymbols(ctx.syms);
  return m;
}

Machine SigmaStar(const std::vector<Label> &alphabet, SemiringKind kind) {
  Machine m(kind);
  m.SetStart(m.AddState());
  m.SetFinal(0, One(kind));
  for (Label l : std::set<Label>(alphabet.begin(), alphabet.end())) m.AddArc(0, l, l, One(kind), 0);
  return m;
}

}  // namespace wfst
