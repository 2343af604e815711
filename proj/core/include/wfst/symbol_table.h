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

#ifndef WFST_SYMBOL_TABLE_H_
#define WFST_SYMBOL_TABLE_H_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wfst {

using Label = int32_t;

inline constexpr Label kEpsilon = 0;
inline constexpr Label kNoLabel = -1;
inline constexpr std::string_view kEpsilonSymbol = "<eps>";

// Bijection between text symbols and labels. Label 0 is always <eps>.
// Tables only grow; ids are never reused.
class SymbolTable {
 public:
  SymbolTable();

  // Returns the existing id or assigns the next free one.
  Label AddSymbol(std::string_view symbol);
  // Binds symbol to a specific id. Throws ResolutionError if either side is
  // already bound differently.
  void AddSymbol(std::string_view symbol, Label id);

  std::optional<Label> Find(std::string_view symbol) const;
  // Throws ResolutionError when missing.
  Label Resolve(std::string_view symbol) const;
  const std::string &Symbol(Label id) const;
  bool HasLabel(Label id) const;

  // Labels in ascending order, epsilon included.
  std::vector<Label> Labels() const;
  Label MaxLabel() const { return max_label_; }
  size_t Size() const { return id_to_symbol_.size(); }

  // One "symbol<TAB>id" per line.
  static std::shared_ptr<SymbolTable> ReadText(std::istream &in);
  void WriteText(std::ostream &out) const;

  bool operator==(const SymbolTable &other) const;

 private:
  std::unordered_map<std::string, Label> symbol_to_id_;
  std::unordered_map<Label, std::string> id_to_symbol_;
  Label max_label_ = 0;
};

// True when every symbol present in both tables maps to the same label.
bool Compatible(const SymbolTable &a, const SymbolTable &b);

}  // namespace wfst

#endif  // WFST_SYMBOL_TABLE_H_
