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
// wfst: command-line front end. Subcommand groups fst, rule, lm and decode.
// Exit status 0 on success, 1 on a domain error, 2 on a usage or format
// error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wfst/decode.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/io.h"
#include "wfst/ngram.h"
#include "wfst/optimize.h"
#include "wfst/rational.h"
#include "wfst/rewrite.h"
#include "wfst/semiring.h"
#include "wfst/symbol_table.h"

namespace wfst {
namespace {

// ------------------------------------------------------------------ files

std::string Slurp(const std::string &path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void Emit(const std::string &path, const std::string &text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

Machine LoadMachine(const std::string &path) {
  std::istringstream in(Slurp(path));
  return ReadMachine(in);
}

std::shared_ptr<SymbolTable> LoadSymbols(const std::string &path) {
  std::istringstream in(Slurp(path));
  return SymbolTable::ReadText(in);
}

std::string Join(std::span<const Label> labels, const SymbolTable *syms) {
  std::string out;
  for (Label l : labels) {
    if (!out.empty()) out += ' ';
    out += syms ? syms->Symbol(l) : std::to_string(l);
  }
  return out;
}

std::string PathLine(const Machine &m, const Path &p) {
  return Join(p.input, m.InputSymbols().get()) + "\t" + Join(p.output, m.OutputSymbols().get()) +
         "\t" + FormatWeight(p.weight) + "\n";
}

void CheckSameKind(const Machine &a, const Machine &b) {
  if (a.Kind() != b.Kind()) {
    throw KindError("semirings differ: " + std::string(KindName(a.Kind())) + " vs " +
                    std::string(KindName(b.Kind())));
  }
  auto check = [](const auto &x, const auto &y) {
    if (x && y && !Compatible(*x, *y)) throw ResolutionError("symbol tables disagree");
  };
  check(a.InputSymbols(), b.InputSymbols());
  check(a.OutputSymbols(), b.OutputSymbols());
}

// --------------------------------------------------------------- commands

struct Cli {
  CLI::App app{"Weighted finite-state toolkit", "wfst"};
  std::function<int()> action;
  std::string output = "-";

  void Run(CLI::App *sub, std::function<int()> f) {
    sub->callback([this, f] { action = f; });
  }

  CLI::App *Leaf(CLI::App *group, const std::string &name, const std::string &help,
                 bool with_output = true) {
    CLI::App *sub = group->add_subcommand(name, help);
    if (with_output) sub->add_option("-o,--output", output, "output path ('-' for stdout)");
    return sub;
  }

  void AddFst();
  void AddRule();
  void AddLm();
  void AddDecode();

  // Per-command arguments; only one leaf runs per invocation.
  std::string in1 = "-", in2, isyms, osyms, semiring = "tropical", algo = "bellman-ford";
  bool acceptor = false, dot = false, flag = false;
  int cap = kDefaultExpansionCap, k = 1, order = 3, katz = kDefaultKatzThreshold;
  double tol = 1e-9, beam = kInfinity;
  std::vector<std::string> inputs;
};

void Cli::AddFst() {
  CLI::App *fst = app.add_subcommand("fst", "machine operations");
  fst->require_subcommand(1);

  CLI::App *compile = Leaf(fst, "compile", "text machine -> machine file");
  compile->add_option("input", in1, "text machine ('-' for stdin)");
  compile->add_option("--semiring", semiring, "boolean, tropical or real")
      ->check(CLI::IsMember({"boolean", "tropical", "real"}));
  compile->add_option("--isyms", isyms, "input symbol table");
  compile->add_option("--osyms", osyms, "output symbol table");
  compile->add_flag("--acceptor", acceptor, "acceptor text format");
  Run(compile, [this] {
    TextOptions opts;
    opts.acceptor = acceptor;
    if (!isyms.empty()) opts.isyms = LoadSymbols(isyms);
    if (!osyms.empty()) opts.osyms = LoadSymbols(osyms);
    if (acceptor && !opts.osyms) opts.osyms = opts.isyms;
    Machine m = ReadText(Slurp(in1), *ParseKind(semiring), opts);
    Emit(output, WriteMachine(m));
    return 0;
  });

  CLI::App *print = Leaf(fst, "print", "machine file -> text (or dot)");
  print->add_option("input", in1, "machine file");
  print->add_option("--isyms", isyms, "input symbol table to print with");
  print->add_option("--osyms", osyms, "output symbol table to print with");
  print->add_flag("--acceptor", acceptor, "acceptor text format");
  print->add_flag("--dot", dot, "Graphviz output");
  Run(print, [this] {
    Machine m = LoadMachine(in1);
    if (!isyms.empty()) m.SetInputSymbols(LoadSymbols(isyms));
    if (!osyms.empty()) m.SetOutputSymbols(LoadSymbols(osyms));
    Emit(output, dot ? WriteDot(m) : WriteText(m, acceptor));
    return 0;
  });

  auto binary = [&](const std::string &name, const std::string &help,
                    std::function<Machine(const Machine &, const Machine &)> op) {
    CLI::App *sub = Leaf(fst, name, help);
    sub->add_option("a", in1, "first machine")->required();
    sub->add_option("b", in2, "second machine")->required();
    Run(sub, [this, op] {
      if (in1 == "-" && in2 == "-") throw UsageError("only one operand may be stdin");
      const Machine a = LoadMachine(in1), b = LoadMachine(in2);
      Emit(output, WriteMachine(op(a, b)));
      return 0;
    });
  };
  binary("compose", "relational composition", [](const Machine &a, const Machine &b) {
    CheckComposable(a, b);
    return Compose(a, b);
  });
  binary("intersect", "acceptor intersection", [](const Machine &a, const Machine &b) {
    CheckSameKind(a, b);
    return Intersect(a, b);
  });
  binary("union", "sum", [](const Machine &a, const Machine &b) {
    CheckSameKind(a, b);
    return Union(a, b);
  });
  binary("concat", "product", [](const Machine &a, const Machine &b) {
    CheckSameKind(a, b);
    return Concat(a, b);
  });
  binary("difference", "boolean acceptor difference", [](const Machine &a, const Machine &b) {
    CheckSameKind(a, b);
    return Difference(a, b);
  });

  auto unary = [&](const std::string &name, const std::string &help,
                   std::function<Machine(const Machine &)> op) {
    CLI::App *sub = Leaf(fst, name, help);
    sub->add_option("input", in1, "machine file");
    Run(sub, [this, op] {
      Emit(output, WriteMachine(op(LoadMachine(in1))));
      return 0;
    });
    return sub;
  };
  unary("closure", "Kleene star", [](const Machine &m) { return Closure(m); });
  unary("reverse", "reversal", [](const Machine &m) { return Reverse(m); });
  unary("connect", "trim", [](const Machine &m) { return Connect(m); });
  unary("complement", "boolean acceptor complement", [](const Machine &m) {
    return Complement(m);
  });
  unary("minimize", "minimal deterministic machine", [](const Machine &m) {
    return Minimize(m);
  });
  unary("project", "projection onto one side", [this](const Machine &m) {
    return Project(m, flag ? ProjectSide::kOutput : ProjectSide::kInput);
  })->add_flag("--output-side", flag, "keep the output side (default: input)");
  unary("push", "weight or output-string pushing", [this](const Machine &m) {
    return Push(m, flag ? PushMode::kStrings : PushMode::kWeights);
  })->add_flag("--strings", flag, "push output strings instead of weights");
  unary("determinize", "weighted subset construction", [this](const Machine &m) {
    return Determinize(m, cap);
  })->add_option("--cap", cap, "maximum number of subsets");
  unary("localdet", "determinize states with more than k arcs", [this](const Machine &m) {
    return LocalDeterminize(m, k);
  })->add_option("-k", k, "arc threshold")->required();

  CLI::App *eq = Leaf(fst, "equivalent", "exit 0 iff the machines are equivalent", false);
  eq->add_option("a", in1, "first machine")->required();
  eq->add_option("b", in2, "second machine")->required();
  eq->add_option("--tol", tol, "relative weight tolerance");
  Run(eq, [this] {
    const Machine a = LoadMachine(in1), b = LoadMachine(in2);
    CheckSameKind(a, b);
    const bool same = Equivalent(a, b, tol);
    std::cout << (same ? "equivalent\n" : "not equivalent\n");
    return same ? 0 : 1;
  });

  CLI::App *shortest = Leaf(fst, "shortest", "single-source shortest distances");
  shortest->add_option("input", in1, "machine file");
  shortest->add_option("--algo", algo, "acyclic, dijkstra or bellman-ford")
      ->check(CLI::IsMember({"acyclic", "dijkstra", "bellman-ford"}));
  Run(shortest, [this] {
    const Machine m = LoadMachine(in1);
    const auto a = algo == "acyclic"    ? ShortestDistanceAlgo::kAcyclic
                   : algo == "dijkstra" ? ShortestDistanceAlgo::kDijkstra
                                        : ShortestDistanceAlgo::kBellmanFord;
    const DistanceMap d = ShortestDistance(m, a);
    std::string text;
    for (size_t s = 0; s < d.size(); ++s) text += std::to_string(s) + "\t" + FormatWeight(d[s]) + "\n";
    Emit(output, text);
    return 0;
  });

  CLI::App *best = Leaf(fst, "bestpath", "lowest-cost accepting path");
  best->add_option("input", in1, "machine file");
  Run(best, [this] {
    const Machine m = LoadMachine(in1);
    const auto p = BestPath(m);
    if (!p) throw DomainError("no accepting path");
    Emit(output, PathLine(m, *p));
    return 0;
  });
}

void Cli::AddRule() {
  CLI::App *rule = app.add_subcommand("rule", "rewrite rules and decision trees");
  rule->require_subcommand(1);

  CLI::App *compile = Leaf(rule, "compile", "rule file -> transducer");
  compile->add_option("input", in1, "rule file");
  Run(compile, [this] {
    RuleGrammar g = ParseRules(Slurp(in1));
    Emit(output, WriteMachine(CompileGrammar(g)));
    return 0;
  });

  CLI::App *tree = Leaf(rule, "tree", "decision-tree file -> transducer");
  tree->add_option("input", in1, "tree file");
  Run(tree, [this] {
    DecisionForest f = ParseTrees(Slurp(in1));
    Emit(output, WriteMachine(CompileForest(f)));
    return 0;
  });

  CLI::App *apply = Leaf(rule, "apply", "rewrite space-separated symbol strings");
  apply->add_option("rule", in1, "compiled rule")->required();
  apply->add_option("strings", inputs, "inputs (default: one per stdin line)");
  apply->add_flag("--best", flag, "only the lowest-cost rewriting");
  Run(apply, [this] {
    const Machine m = LoadMachine(in1);
    if (!m.InputSymbols()) throw UsageError("rule machine has no symbol table");
    if (inputs.empty()) {
      std::istringstream in(Slurp("-"));
      for (std::string line; std::getline(in, line);) inputs.push_back(line);
    }
    std::string text;
    for (const std::string &s : inputs) {
      std::istringstream words(s);
      std::vector<Label> input;
      for (std::string w; words >> w;) input.push_back(m.InputSymbols()->Resolve(w));
      for (const Rewriting &r : ApplyRewrite(m, input, flag ? ApplyMode::kBest : ApplyMode::kAll)) {
        text += Join(r.output, m.OutputSymbols().get());
        if (!IsOne(m.Kind(), r.weight)) text += "\t" + FormatWeight(r.weight);
        text += "\n";
      }
    }
    Emit(output, text);
    return 0;
  });
}

void Cli::AddLm() {
  CLI::App *lm = app.add_subcommand("lm", "n-gram language models");
  lm->require_subcommand(1);

  CLI::App *count = Leaf(lm, "count", "corpus -> n-gram counts");
  count->add_option("corpus", in1, "one sentence per line");
  count->add_option("-n,--order", order, "n-gram order")->check(CLI::PositiveNumber);
  count->add_flag("--no-boundaries", flag, "do not pad sentences with <s> </s>");
  Run(count, [this] {
    std::istringstream in(Slurp(in1));
    std::ostringstream out;
    WriteCounts(CountNgrams(ReadCorpus(in), order, CountOptions{.boundaries = !flag}), out);
    Emit(output, out.str());
    return 0;
  });

  CLI::App *build = Leaf(lm, "build", "counts -> Katz back-off model (ARPA)");
  build->add_option("counts", in1, "count file");
  build->add_option("-k", katz, "Good-Turing threshold");
  Run(build, [this] {
    std::istringstream in(Slurp(in1));
    std::ostringstream out;
    WriteArpa(KatzModel(ReadCounts(in), katz), out);
    Emit(output, out.str());
    return 0;
  });

  CLI::App *fsa = Leaf(lm, "fsa", "ARPA model -> tropical acceptor");
  fsa->add_option("model", in1, "ARPA file");
  Run(fsa, [this] {
    std::istringstream in(Slurp(in1));
    Emit(output, WriteMachine(BuildLmFsa(ReadArpa(in))));
    return 0;
  });

  CLI::App *score = Leaf(lm, "score", "negative natural-log probability per sentence");
  score->add_option("model", in1, "ARPA file")->required();
  score->add_option("corpus", in2, "one sentence per line")->required();
  Run(score, [this] {
    if (in1 == "-" && in2 == "-") throw UsageError("only one operand may be stdin");
    std::istringstream model_in(Slurp(in1));
    const BackoffModel m = ReadArpa(model_in);
    std::istringstream corpus_in(Slurp(in2));
    std::string text;
    for (const auto &sentence : ReadCorpus(corpus_in)) {
      std::vector<Label> ids;
      for (const auto &w : sentence) ids.push_back(m.syms->Resolve(w));
      text += FormatWeight(m.Cost(ids)) + "\n";
    }
    Emit(output, text);
    return 0;
  });
}

void Cli::AddDecode() {
  CLI::App *decode = Leaf(&app, "decode", "beam search over a cascade of machines");
  decode->add_option("--cascade", in1, "manifest: one machine path per line, observation first")
      ->required();
  decode->add_option("--beam", beam, "beam width (default: exact)");
  decode->add_flag("--stats", flag, "report search statistics on stderr");
  Run(decode, [this] {
    const std::filesystem::path base = std::filesystem::path(in1).parent_path();
    std::istringstream manifest(Slurp(in1));
    CascadeSpec spec;
    for (std::string line; std::getline(manifest, line);) {
      const auto begin = line.find_first_not_of(" \t\r");
      if (begin == std::string::npos || line[begin] == '#') continue;
      std::string path = line.substr(begin, line.find_last_not_of(" \t\r") + 1 - begin);
      if (std::filesystem::path(path).is_relative() && in1 != "-") path = (base / path).string();
      spec.stages.push_back(std::make_shared<const Machine>(LoadMachine(path)));
    }
    if (spec.stages.empty()) throw UsageError("empty cascade manifest");
    const DecodeResult r = BeamDecode(spec, beam);
    if (flag) {
      std::cerr << "expanded " << r.stats.expanded_states << "\npruned " << r.stats.pruned_states
                << "\nframes " << r.stats.frames << "\n";
    }
    if (!r.best) throw DomainError("no path survived the beam");
    Machine ends = *spec.stages.front();
    ends.SetOutputSymbols(spec.stages.back()->OutputSymbols());
    Emit(output, PathLine(ends, *r.best));
    return 0;
  });
}

}  // namespace
}  // namespace wfst

int main(int argc, char **argv) {
  wfst::Cli cli;
  cli.app.require_subcommand(1);
  cli.AddFst();
  cli.AddRule();
  cli.AddLm();
  cli.AddDecode();
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = cli.app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return cli.action ? cli.action() : 2;
  } catch (const wfst::ParseError &e) {
    std::cerr << "wfst: format error: " << e.what() << "\n";
    return 2;
  } catch (const wfst::UsageError &e) {
    std::cerr << "wfst: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "wfst: " << e.what() << "\n";
    return 1;
  }
}
