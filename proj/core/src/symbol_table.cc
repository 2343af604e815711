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

#include "wfst/symbol_table.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "wfst/errors.h"

namespace wfst {

SymbolTable::SymbolTable() { AddSymbol(kEpsilonSymbol, kEpsilon); }

Label SymbolTable::AddSymbol(std::string_view symbol) {
  auto it = symbol_to_id_.find(std::string(symbol));
  if (it != symbol_to_id_.end()) return it->second;
  const Label id = Size() == 0 ? 0 : max_label_ + 1;
  AddSymbol(symbol, id);
  return id;
}

void SymbolTable::AddSymbol(std::string_view symbol, Label id) {
  if (id < 0) throw ResolutionError("negative label for symbol " + std::string(symbol));
  std::string key(symbol);
  auto sit = symbol_to_id_.find(key);
  auto iit = id_to_symbol_.find(id);
  if (sit != symbol_to_id_.end() && sit->second == id) return;
  if (sit != symbol_to_id_.end()) {
    throw ResolutionError("symbol '" + key + "' already bound to " +
                          std::to_string(sit->second));
  }
  if (iit != id_to_symbol_.end()) {
    throw ResolutionError("label " + std::to_string(id) + " already bound to '" +
                          iit->second + "'");
  }
  symbol_to_id_.emplace(key, id);
  id_to_symbol_.emplace(id, std::move(key));
  max_label_ = std::max(max_label_, id);
}

std::optional<Label> SymbolTable::Find(std::string_view symbol) const {
  auto it = symbol_to_id_.find(std::string(symbol));
  if (it == symbol_to_id_.end()) return std::nullopt;
  return it->second;
}

Label SymbolTable::Resolve(std::string_view symbol) const {
  auto id = Find(symbol);
  if (!id) throw ResolutionError("unknown symbol '" + std::string(symbol) + "'");
  return *id;
}

const std::string &SymbolTable::Symbol(Label id) const {
  auto it = id_to_symbol_.find(id);
  if (it == id_to_symbol_.end()) {
    throw ResolutionError("unknown label " + std::to_string(id));
  }
  return it->second;
}

bool SymbolTable::HasLabel(Label id) const { return id_to_symbol_.count(id) > 0; }

std::vector<Label> SymbolTable::Labels() const {
  std::vector<Label> labels;
  labels.reserve(id_to_symbol_.size());
  for (const auto &[id, _] : id_to_symbol_) labels.push_back(id);
  std::sort(labels.begin(), labels.end());
  return labels;
}

std::shared_ptr<SymbolTable> SymbolTable::ReadText(std::istream &in) {
  auto table = std::make_shared<SymbolTable>();
  std::string line;
  int lineno = 0;
  bool saw_eps = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string symbol, id_text, extra;
    if (!(fields >> symbol)) continue;
    if (!(fields >> id_text) || (fields >> extra)) {
      throw ParseError("expected 'symbol<TAB>id'", lineno);
    }
    Label id = 0;
    auto res = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (res.ec != std::errc() || res.ptr != id_text.data() + id_text.size()) {
      throw ParseError("bad label '" + id_text + "'", lineno);
    }
    if (id == kEpsilon) {
      if (symbol != kEpsilonSymbol) {
        throw ParseError("label 0 must be " + std::string(kEpsilonSymbol), lineno);
      }
      saw_eps = true;
      continue;
    }
    try {
      table->AddSymbol(symbol, id);
    } catch (const ResolutionError &e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!saw_eps) throw ParseError("symbol table lacks '<eps> 0'", 0);
  return table;
}

void SymbolTable::WriteText(std::ostream &out) const {
  for (Label id : Labels()) out << Symbol(id) << '\t' << id << '\n';
}

bool SymbolTable::operator==(const SymbolTable &other) const {
  return id_to_symbol_ == other.id_to_symbol_;
}

bool Compatible(const SymbolTable &a, const SymbolTable &b) {
  for (Label id : a.Labels()) {
    auto other = b.Find(a.Symbol(id));
    if (other && *other != id) return false;
    if (b.HasLabel(id) && b.Symbol(id) != a.Symbol(id)) return false;
  }
  return true;
}

}  // namespace wfst
