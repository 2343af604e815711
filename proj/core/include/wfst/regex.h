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
// Regular expressions over symbol-table labels, compiled to boolean
// acceptors.
//
// Syntax (whitespace between tokens is ignored):
//   x          a single character symbol; \x escapes a special character
//   {name}     a multi-character symbol, or a declared class
//   ()         the empty string
//   .          any alphabet symbol
//   [x y {z}]  one symbol from the set; [^ ...] its complement in the alphabet
//   r s        concatenation
//   r | s      union
//   r & s      intersection
//   ~r         complement relative to alphabet*
//   r* r+ r?   repetition
// Precedence from loosest to tightest: |, &, concatenation, ~, postfix.

#ifndef WFST_REGEX_H_
#define WFST_REGEX_H_

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

struct RegexContext {
  std::shared_ptr<SymbolTable> syms;
  // Unknown literals are added to syms (and to the alphabet) instead of
  // raising ResolutionError.
  bool add_symbols = false;
  // Interpretation of `.`, `[^...]` and `~`.
  std::vector<Label> alphabet;
  std::map<std::string, std::vector<Label>> classes;
};

// Deterministic, epsilon-free boolean acceptor for the expression. Throws
// ParseError on malformed input and ResolutionError on unknown symbols.
Machine CompileRegex(std::string_view expr, RegexContext &ctx);

// Acceptor for alphabet*.
Machine SigmaStar(const std::vector<Label> &alphabet, SemiringKind kind);

}  // namespace wfst

#endif  // WFST_REGEX_H_
