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
// Random corpora and a direct walk over back-off acceptors.

#ifndef WFST_TESTS_LM_ORACLE_H_
#define WFST_TESTS_LM_ORACLE_H_

#include <algorithm>
#include <string>
#include <vector>

#include "oracles.h"
#include "wfst/ngram.h"

namespace wfst::testing {

inline Corpus RandomCorpus(Rng &rng, int sentences, int vocab, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len), word(0, vocab - 1);
  // Zipf-like skew so that counts repeat.
  Corpus c;
  for (int s = 0; s < sentences; ++s) {
    std::vector<std::string> words;
    for (int i = len(rng); i > 0; --i) {
      const int w = std::min(word(rng), word(rng));
      words.push_back("w" + std::to_string(w));
    }
    c.push_back(words);
  }
  return c;
}

// Cost of the path the model itself takes: the word arc when present,
// otherwise the back-off arc.
inline double ExplicitPathCost(const Machine &fsa, const Str &sentence) {
  StateId s = fsa.Start();
  double cost = 0;
  for (Label y : sentence) {
    for (;;) {
      const Arc *word = nullptr, *back = nullptr;
      for (const Arc &a : fsa.Arcs(s)) {
        if (a.ilabel == y) word = &a;
        if (a.ilabel == kEpsilon) back = &a;
      }
      if (word) {
        cost += word->weight;
        s = word->nextstate;
        break;
      }
      if (!back) return kInfinity;
      cost += back->weight;
      s = back->nextstate;
    }
  }
  while (!fsa.IsFinal(s)) {
    const Arc *back = nullptr;
    for (const Arc &a : fsa.Arcs(s)) {
      if (a.ilabel == kEpsilon) back = &a;
    }
    if (!back) return kInfinity;
    cost += back->weight;
    s = back->nextstate;
  }
  return cost + fsa.Final(s);
}

}  // namespace wfst::testing

#endif  // WFST_TESTS_LM_ORACLE_H_
