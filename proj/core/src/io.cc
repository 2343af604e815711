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

#include "wfst/io.h"

#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/semiring.h"
#include "wfst/symbol_table.h"

namespace wfst {
namespace {

constexpr std::string_view kMagic = "wfst-machine";

void WriteTable(std::string_view name, const SymbolTable *table, std::ostream &out) {
  if (!table) {
    out << name << " 0\n";
    return;
  }
  out << name << ' ' << table->Labels().size() << '\n';
  table->WriteText(out);
}

std::shared_ptr<const SymbolTable> ReadTable(std::string_view name, std::istream &in,
                                             int &line) {
  std::string header;
  ++line;
  if (!std::getline(in, header)) throw ParseError("missing " + std::string(name), line);
  std::istringstream fields(header);
  std::string word;
  long n = -1;
  if (!(fields >> word >> n) || word != name || n < 0) {
    throw ParseError("expected '" + std::string(name) + " <count>'", line);
  }
  if (n == 0) return nullptr;
  std::string text;
  for (long i = 0; i < n; ++i) {
    std::string entry;
    ++line;
    if (!std::getline(in, entry)) throw ParseError("truncated symbol table", line);
    text += entry + '\n';
  }
  std::istringstream body(text);
  return SymbolTable::ReadText(body);
}

}  // namespace

void WriteMachine(const Machine &m, std::ostream &out) {
  out << kMagic << ' ' << KindName(m.Kind()) << '\n';
  WriteTable("isymbols", m.InputSymbols().get(), out);
  WriteTable("osymbols", m.OutputSymbols().get(), out);
  Machine bare = m;
  bare.SetInputSymbols(nullptr);
  bare.SetOutputSymbols(nullptr);
  out << WriteText(bare);
}

std::string WriteMachine(const Machine &m) {
  std::ostringstream out;
  WriteMachine(m, out);
  return out.str();
}

Machine ReadMachine(std::istream &in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty machine file", 1);
  std::istringstream fields(header);
  std::string magic, kind_name;
  fields >> magic >> kind_name;
  const auto kind = ParseKind(kind_name);
  if (magic != kMagic || !kind) throw ParseError("expected '" + std::string(kMagic) + " <semiring>'", 1);
  int line = 1;
  auto isyms = ReadTable("isymbols", in, line);
  auto osyms = ReadTable("osymbols", in, line);
  std::ostringstream body;
  body << in.rdbuf();
  Machine m = [&] {
    try {
      return ReadText(body.str(), *kind);
    } catch (const ParseError &e) {
      throw ParseError(e.detail(), e.line() > 0 ? line + e.line() : 0);
    }
  }();
  m.SetInputSymbols(std::move(isyms));
  m.SetOutputSymbols(std::move(osyms));
  return m;
}

}  // namespace wfst
