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
// Context-dependent rewrite rules phi -> psi / lambda _ rho compiled into
// transducers by composing five marker-driven machines:
//
//   r        inserts > before every position where rho begins (input side)
//   f        inserts <1 or <2 before every phi that is followed by >
//   replace  rewrites <1 phi > as <1 psi and deletes the remaining >
//   l1       deletes <1 where the output so far ends in lambda, rejects it
//            elsewhere
//   l2       deletes <2 where the output so far does not end in lambda,
//            rejects it elsewhere
//
// Application is obligatory and left to right: lambda is matched against
// the already rewritten output and rho against the unrewritten input.
// Decision trees compile into same-length transducers whose leaves are
// intersected.

#ifndef WFST_REWRITE_H_
#define WFST_REWRITE_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfst/machine.h"
#include "wfst/regex.h"

namespace wfst {

enum class MarkerType {
  // Inserts one of `markers` after every prefix in L(alpha).
  kInsert = 1,
  // Deletes `markers` found after prefixes in L(alpha); rejects them
  // elsewhere.
  kCheck = 2,
  // Deletes `markers` found after prefixes not in L(alpha); rejects them
  // elsewhere.
  kCheckAbsent = 3,
};

// alpha must be a deterministic acceptor over sigma; it is completed with a
// sink state. Symbols in `pass` are copied without advancing alpha. Insertion
// happens as soon as alpha enters a final state, before any pass symbol.
Machine Marker(const Machine &alpha, MarkerType type, std::span<const Label> sigma,
               std::span<const Label> pass, std::span<const Label> markers);

struct WeightedAlternative {
  std::string expr;
  Weight weight = 0.0;
};

struct Rule {
  std::string phi;
  std::vector<WeightedAlternative> psi;
  // Empty contexts are unconstrained.
  std::string lambda;
  std::string rho;
};

// Tropical transducer over ctx.alphabet. CompileRule rejects weighted
// alternatives (ContractError); CompileWeightedRule carries them as tropical
// costs. Throws UnsupportedError when phi accepts the empty string.
Machine CompileRule(const Rule &rule, RegexContext &ctx);
Machine CompileWeightedRule(const Rule &rule, RegexContext &ctx);

// Rule file:
//   # comment line
//   Alphabet = [a b c {ng}] ;
//   Class V = [a e i o u] ;
//   a -> b / c _ b ;
//   c -> <0.9> c | <0.1> t / a _ t ;
// Classes are referenced as {V}. Without an Alphabet statement the alphabet
// is every symbol mentioned in the file.
struct RuleGrammar {
  RegexContext ctx;
  std::vector<Rule> rules;
};
RuleGrammar ParseRules(std::string_view text);
// Composition of the compiled rules, applied in file order.
Machine CompileGrammar(RuleGrammar &grammar);

enum class ApplyMode { kAll, kBest };

struct Rewriting {
  std::vector<Label> output;
  Weight weight;
  friend bool operator==(const Rewriting &, const Rewriting &) = default;
};

// Outputs of the rule machine on `input` (sorted by output, one entry per
// distinct output carrying its best weight), or only the cheapest. Empty when
// the input has no rewriting. ContractError if there are infinitely many.
std::vector<Rewriting> ApplyRewrite(const Machine &rule, std::span<const Label> input,
                                    ApplyMode mode);

// Intersection of two epsilon-free same-length transducers, computed on
// (ilabel, olabel) pairs encoded as single labels.
Machine IntersectSameLength(const Machine &a, const Machine &b);

enum class ContextSide { kLeft, kRight };

// Left: the input before the symbol ends in L(regex). Right: the input after
// it begins with L(regex). Negated constraints require the opposite.
struct ContextConstraint {
  ContextSide side = ContextSide::kLeft;
  std::string regex;
  bool negated = false;
};

struct TreeLeaf {
  std::vector<ContextConstraint> constraints;
  std::vector<std::pair<Label, Weight>> outputs;
};

// The leaves' contexts must partition all contexts of `input` (checked at
// compile time, ContractError otherwise).
struct DecisionTree {
  Label input = kNoLabel;
  std::vector<TreeLeaf> leaves;
};

// Tree file, one tree after another, each in preorder:
//   alphabet a e t d
//   class V a e
//   split left {V}        the next subtree holds, the one after it does not
//     leaf t -> <0.2> d | <1.6> t
//     leaf t -> t
struct DecisionForest {
  RegexContext ctx;
  std::vector<DecisionTree> trees;
};
DecisionForest ParseTrees(std::string_view text);

// Same-length tropical transducer: each occurrence of a tree's input symbol
// maps to the alternatives of the leaf whose context matches; other symbols
// map to themselves. Trees are intersected, so trees sharing an input symbol
// conjoin.
Machine CompileTree(const DecisionTree &tree, RegexContext &ctx);
Machine CompileForest(DecisionForest &forest);

}  // namespace wfst

#endif  // WFST_REWRITE_H_
