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
// N-gram counting, maximum-likelihood and Good-Turing/Katz back-off
// estimation, and compilation of back-off models into tropical acceptors
// with costs -ln P.

#ifndef WFST_NGRAM_H_
#define WFST_NGRAM_H_

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

inline constexpr std::string_view kBeginSentence = "<s>";
inline constexpr std::string_view kEndSentence = "</s>";
inline constexpr int kDefaultKatzThreshold = 5;

using Corpus = std::vector<std::vector<std::string>>;

// One sentence per line, whitespace separated; blank lines are skipped.
Corpus ReadCorpus(std::istream &in);

struct CountOptions {
  // Pad every sentence with <s> ... </s>.
  bool boundaries = true;
};

struct CountTable {
  int order = 0;
  bool boundaries = true;
  std::shared_ptr<SymbolTable> syms;
  // Every k-gram, 1 <= k <= order, including those with boundary symbols.
  std::map<std::vector<Label>, int64_t> counts;
  // Unigram tokens, <s> excluded.
  int64_t tokens = 0;

  int64_t Count(std::span<const Label> gram) const;
  Label Bos() const;
  Label Eos() const;
};

// Symbols are added to syms (a fresh table when null).
CountTable CountNgrams(const Corpus &corpus, int order, const CountOptions &opts = {},
                       std::shared_ptr<SymbolTable> syms = nullptr);

// Text form: "order N", "boundaries 0|1", then "w1 w2 ...<TAB>count" lines.
void WriteCounts(const CountTable &ct, std::ostream &out);
CountTable ReadCounts(std::istream &in);

// c(gram) / tokens.
double MleJoint(const CountTable &ct, std::span<const Label> gram);
// c(gram) / c(gram without its last word); unseen grams get 0. Throws
// ContractError when the history was never seen.
double MleConditional(const CountTable &ct, std::span<const Label> gram);

// r -> number of grams seen exactly r times.
using FrequencyOfFrequencies = std::map<int64_t, int64_t>;
FrequencyOfFrequencies FrequencyOf(const CountTable &ct, int k);

// c* = (c + 1) n_{c+1} / n_c for c <= k_threshold; c itself when c exceeds
// the threshold or either frequency is zero.
double GoodTuring(const FrequencyOfFrequencies &ff, int64_t c,
                  int k_threshold = kDefaultKatzThreshold);

struct BackoffModel {
  struct Context {
    // Discounted probabilities of the words seen after the context.
    std::map<Label, double> prob;
    double alpha = 0.0;
  };

  int order = 0;
  bool boundaries = true;
  std::shared_ptr<SymbolTable> syms;
  // Predictable words: every unigram except <s>.
  std::vector<Label> vocab;
  // Histories of length 0 .. order-1; the empty history holds the unigrams.
  std::map<std::vector<Label>, Context> contexts;

  // P(y | history) with back-off; the history is cut to order-1 words.
  double Prob(std::span<const Label> history, Label y) const;
  // -ln P(sentence), including </s> when the model has boundaries.
  double Cost(std::span<const Label> sentence) const;
  Label Bos() const;
  Label Eos() const;
};

// Katz back-off over Good-Turing discounts. Counts whose Good-Turing
// estimate is not strictly between 0 and c are left undiscounted. The
// unigram level spreads its freed mass uniformly over the vocabulary.
// Throws DegeneracyError when freed mass has nowhere to go.
BackoffModel KatzModel(const CountTable &ct, int k_threshold = kDefaultKatzThreshold);

// ARPA text: \data\ header, one \k-grams: section per order with
// "log10P<TAB>w1 ... wk[<TAB>log10alpha]" lines, and \end\.
void WriteArpa(const BackoffModel &m, std::ostream &out);
BackoffModel ReadArpa(std::istream &in);

// Tropical acceptor with one state per history: word arcs cost
// -ln P*(y|h), an epsilon back-off arc costs -ln alpha(h), and </s> is a
// final weight. A sentence's best path can be cheaper than the model's own
// back-off route when the back-off arc undercuts an explicit n-gram.
Machine BuildLmFsa(const BackoffModel &m);

}  // namespace wfst

#endif  // WFST_NGRAM_H_
