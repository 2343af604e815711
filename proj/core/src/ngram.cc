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

#include "wfst/ngram.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "wfst/errors.h"

namespace wfst {
namespace {

using Gram = std::vector<Label>;

constexpr double kTiny = 1e-12;

std::string Words(const SymbolTable &syms, std::span<const Label> gram) {
  std::string out;
  for (Label l : gram) out += (out.empty() ? "" : " ") + syms.Symbol(l);
  return out;
}

Label FindOr(const std::shared_ptr<SymbolTable> &syms, std::string_view s) {
  if (!syms) return kNoLabel;
  return syms->Find(s).value_or(kNoLabel);
}

std::vector<std::string> Split(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

Corpus ReadCorpus(std::istream &in) {
  Corpus corpus;
  for (std::string line; std::getline(in, line);) {
    auto words = Split(line);
    if (!words.empty()) corpus.push_back(std::move(words));
  }
  return corpus;
}

int64_t CountTable::Count(std::span<const Label> gram) const {
  auto it = counts.find(Gram(gram.begin(), gram.end()));
  return it == counts.end() ? 0 : it->second;
}

Label CountTable::Bos() const { return FindOr(syms, kBeginSentence); }
Label CountTable::Eos() const { return FindOr(syms, kEndSentence); }

CountTable CountNgrams(const Corpus &corpus, int order, const CountOptions &opts,
                       std::shared_ptr<SymbolTable> syms) {
  if (order < 1) throw ContractError("n-gram order must be at least 1");
  CountTable ct;
  ct.order = order;
  ct.boundaries = opts.boundaries;
  ct.syms = syms ? std::move(syms) : std::make_shared<SymbolTable>();
  Label bos = kNoLabel;
  if (opts.boundaries) {
    bos = ct.syms->AddSymbol(kBeginSentence);
    ct.syms->AddSymbol(kEndSentence);
  }
  for (const auto &sentence : corpus) {
    Gram seq;
    if (opts.boundaries) seq.push_back(bos);
    for (const std::string &w : sentence) {
      if (opts.boundaries && (w == kBeginSentence || w == kEndSentence)) {
        throw ContractError("corpus contains the reserved symbol " + w);
      }
      seq.push_back(ct.syms->AddSymbol(w));
    }
    if (opts.boundaries) seq.push_back(ct.syms->Resolve(kEndSentence));
    for (size_t i = 0; i < seq.size(); ++i) {
      for (int k = 1; k <= order && i + k <= seq.size(); ++k) {
        ++ct.counts[Gram(seq.begin() + i, seq.begin() + i + k)];
      }
      if (seq[i] != bos) ++ct.tokens;
    }
  }
  return ct;
}

void WriteCounts(const CountTable &ct, std::ostream &out) {
  out << "order " << ct.order << "\nboundaries " << (ct.boundaries ? 1 : 0) << "\n";
  for (const auto &[gram, c] : ct.counts) out << Words(*ct.syms, gram) << "\t" << c << "\n";
}

CountTable ReadCounts(std::istream &in) {
  CountTable ct;
  ct.syms = std::make_shared<SymbolTable>();
  std::string line;
  int number = 0;
  auto header = [&](const std::string &key) {
    ++number;
    if (!std::getline(in, line)) throw ParseError("missing '" + key + "' line", number);
    auto words = Split(line);
    if (words.size() != 2 || words[0] != key) throw ParseError("expected '" + key + " N'", number);
    try {
      return std::stoi(words[1]);
    } catch (const std::exception &) {
      throw ParseError("bad number '" + words[1] + "'", number);
    }
  };
  ct.order = header("order");
  if (ct.order < 1) throw ParseError("order must be positive", 1);
  ct.boundaries = header("boundaries") != 0;
  const Label bos = ct.boundaries ? ct.syms->AddSymbol(kBeginSentence) : kNoLabel;
  if (ct.boundaries) ct.syms->AddSymbol(kEndSentence);
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("expected 'words<TAB>count'", number);
    Gram gram;
    for (const std::string &w : Split(line.substr(0, tab))) gram.push_back(ct.syms->AddSymbol(w));
    if (gram.empty() || static_cast<int>(gram.size()) > ct.order) {
      throw ParseError("gram length outside 1.." + std::to_string(ct.order), number);
    }
    int64_t c = 0;
    try {
      size_t used = 0;
      c = std::stoll(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      throw ParseError("bad count", number);
    }
    if (c <= 0) throw ParseError("counts must be positive", number);
    if (!ct.counts.emplace(gram, c).second) throw ParseError("duplicate gram", number);
    if (gram.size() == 1 && gram[0] != bos) ct.tokens += c;
  }
  return ct;
}

double MleJoint(const CountTable &ct, std::span<const Label> gram) {
  if (ct.tokens == 0) throw ContractError("mle: empty count table");
  return static_cast<double>(ct.Count(gram)) / static_cast<double>(ct.tokens);
}

double MleConditional(const CountTable &ct, std::span<const Label> gram) {
  if (gram.empty()) throw ContractError("mle: empty gram");
  if (gram.size() == 1) return MleJoint(ct, gram);
  const int64_t history = ct.Count(gram.first(gram.size() - 1));
  if (history == 0) {
    throw ContractError("mle: conditional on an unseen history '" +
                        Words(*ct.syms, gram.first(gram.size() - 1)) + "'");
  }
  return static_cast<double>(ct.Count(gram)) / static_cast<double>(history);
}

FrequencyOfFrequencies FrequencyOf(const CountTable &ct, int k) {
  FrequencyOfFrequencies ff;
  const Label bos = ct.Bos();
  for (const auto &[gram, c] : ct.counts) {
    // <s> alone is never predicted.
    if (static_cast<int>(gram.size()) == k && !(k == 1 && gram[0] == bos)) ++ff[c];
  }
  return ff;
}

double GoodTuring(const FrequencyOfFrequencies &ff, int64_t c, int k_threshold) {
  if (c < 1) throw ContractError("good-turing: count must be positive");
  if (c > k_threshold) return static_cast<double>(c);
  auto n = [&](int64_t r) {
    auto it = ff.find(r);
    return it == ff.end() ? 0 : it->second;
  };
  if (n(c) == 0 || n(c + 1) == 0) return static_cast<double>(c);
  return static_cast<double>(c + 1) * static_cast<double>(n(c + 1)) / static_cast<double>(n(c));
}

Label BackoffModel::Bos() const { return FindOr(syms, kBeginSentence); }
Label BackoffModel::Eos() const { return FindOr(syms, kEndSentence); }

double BackoffModel::Prob(std::span<const Label> history, Label y) const {
  if (static_cast<int>(history.size()) > order - 1) {
    history = history.last(std::max(order - 1, 0));
  }
  double scale = 1.0;
  for (;;) {
    auto it = contexts.find(Gram(history.begin(), history.end()));
    if (it != contexts.end()) {
      auto p = it->second.prob.find(y);
      if (p != it->second.prob.end()) return scale * p->second;
      if (history.empty()) return 0.0;
      scale *= it->second.alpha;
    } else if (history.empty()) {
      return 0.0;
    }
    history = history.subspan(1);
  }
}

double BackoffModel::Cost(std::span<const Label> sentence) const {
  Gram history;
  if (boundaries) history.push_back(Bos());
  double cost = 0.0;
  auto add = [&](Label y) {
    const double p = Prob(history, y);
    cost += p > 0 ? -std::log(p) : kInfinity;
    history.push_back(y);
  };
  for (Label y : sentence) add(y);
  if (boundaries) add(Eos());
  return cost;
}

BackoffModel KatzModel(const CountTable &ct, int k_threshold) {
  BackoffModel m;
  m.order = ct.order;
  m.boundaries = ct.boundaries;
  m.syms = ct.syms;
  const Label bos = ct.Bos();
  for (const auto &[gram, c] : ct.counts) {
    if (gram.size() == 1 && gram[0] != bos) m.vocab.push_back(gram[0]);
  }
  if (m.vocab.empty()) return m;

  std::vector<FrequencyOfFrequencies> ff(ct.order + 1);
  for (int k = 1; k <= ct.order; ++k) ff[k] = FrequencyOf(ct, k);
  auto discounted = [&](int k, int64_t c) {
    const double d = GoodTuring(ff[k], c, k_threshold);
    return d > 0 && d < static_cast<double>(c) ? d : static_cast<double>(c);
  };

  // Unigrams: discounted, freed mass spread uniformly.
  BackoffModel::Context &uni = m.contexts[{}];
  double seen = 0.0;
  for (Label y : m.vocab) {
    uni.prob[y] = discounted(1, ct.Count(Gram{y})) / static_cast<double>(ct.tokens);
    seen += uni.prob[y];
  }
  const double floor = (1.0 - seen) / static_cast<double>(m.vocab.size());
  for (auto &[y, p] : uni.prob) p += floor;

  for (int k = 2; k <= ct.order; ++k) {
    // History -> continuation words and their total count.
    std::map<Gram, std::vector<std::pair<Label, int64_t>>> next;
    for (const auto &[gram, c] : ct.counts) {
      if (static_cast<int>(gram.size()) == k) {
        next[Gram(gram.begin(), gram.end() - 1)].emplace_back(gram.back(), c);
      }
    }
    for (const auto &[h, words] : next) {
      int64_t total = 0;
      for (const auto &[y, c] : words) total += c;
      BackoffModel::Context ctx;
      double kept = 0.0, lower = 0.0;
      const std::span<const Label> shorter = std::span<const Label>(h).subspan(1);
      for (const auto &[y, c] : words) {
        ctx.prob[y] = discounted(k, c) / static_cast<double>(total);
        kept += ctx.prob[y];
        lower += m.Prob(shorter, y);
      }
      const double freed = 1.0 - kept;
      const double room = 1.0 - lower;
      if (freed <= kTiny) {
        ctx.alpha = 0.0;
      } else if (room <= kTiny) {
        if (words.size() < m.vocab.size()) {
          throw DegeneracyError("katz: no back-off mass left for context '" +
                                Words(*ct.syms, h) + "'");
        }
        // Every word was seen: nothing to back off to.
        for (auto &[y, p] : ctx.prob) p /= kept;
        ctx.alpha = 0.0;
      } else {
        ctx.alpha = freed / room;
      }
      m.contexts[h] = std::move(ctx);
    }
  }
  return m;
}

void WriteArpa(const BackoffModel &m, std::ostream &out) {
  std::vector<std::vector<std::pair<Gram, double>>> sections(m.order + 1);
  const Label bos = m.Bos();
  for (const auto &[h, ctx] : m.contexts) {
    if (static_cast<int>(h.size()) >= m.order) continue;
    for (const auto &[y, p] : ctx.prob) {
      Gram g = h;
      g.push_back(y);
      sections[g.size()].emplace_back(g, p);
    }
  }
  if (m.boundaries && m.order >= 1) sections[1].emplace_back(Gram{bos}, 0.0);
  // Sorted by word text so the file does not depend on label numbering.
  auto text = [&](const Gram &g) {
    std::vector<std::string_view> words;
    for (Label l : g) words.push_back(m.syms->Symbol(l));
    return words;
  };
  for (auto &s : sections) {
    std::sort(s.begin(), s.end(), [&](const auto &a, const auto &b) { return text(a.first) < text(b.first); });
  }
  out << "\\data\\\n";
  for (int k = 1; k <= m.order; ++k) out << "ngram " << k << "=" << sections[k].size() << "\n";
  for (int k = 1; k <= m.order; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto &[g, p] : sections[k]) {
      const bool start = m.boundaries && k == 1 && g[0] == bos;
      out << (start ? "-99" : FormatWeight(std::log10(p))) << "\t" << Words(*m.syms, g);
      auto it = m.contexts.find(g);
      if (k < m.order && it != m.contexts.end()) {
        const double a = it->second.alpha;
        out << "\t" << (a > 0 ? FormatWeight(std::log10(a)) : "-99");
      }
      out << "\n";
    }
  }
  out << "\n\\end\\\n";
}

BackoffModel ReadArpa(std::istream &in) {
  BackoffModel m;
  m.syms = std::make_shared<SymbolTable>();
  std::string line;
  int number = 0;
  int section = 0;
  bool data = false, end = false;
  std::map<int, int64_t> declared, seen;
  auto power = [](const std::string &text, int at) {
    const auto v = ParseWeight(text);
    if (!v) throw ParseError("bad log10 value '" + text + "'", at);
    return *v <= -99 ? 0.0 : std::pow(10.0, *v);
  };
  std::map<Gram, double> alphas;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line == "\\data\\") {
      data = true;
    } else if (line == "\\end\\") {
      end = true;
      break;
    } else if (!data) {
      throw ParseError("expected \\data\\", number);
    } else if (line.rfind("ngram ", 0) == 0) {
      const size_t eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("expected 'ngram k=N'", number);
      try {
        declared[std::stoi(line.substr(6, eq - 6))] = std::stoll(line.substr(eq + 1));
      } catch (const std::exception &) {
        throw ParseError("expected 'ngram k=N'", number);
      }
    } else if (line.front() == '\\') {
      if (std::sscanf(line.c_str(), "\\%d-grams:", &section) != 1 || section < 1) {
        throw ParseError("bad section header", number);
      }
      m.order = std::max(m.order, section);
    } else {
      if (section == 0) throw ParseError("n-gram line outside a section", number);
      std::vector<std::string> fields;
      std::istringstream ls(line);
      for (std::string f; std::getline(ls, f, '\t');) fields.push_back(f);
      if (fields.size() < 2 || fields.size() > 3) {
        throw ParseError("expected 'log10P<TAB>words[<TAB>log10alpha]'", number);
      }
      Gram g;
      for (const std::string &w : Split(fields[1])) g.push_back(m.syms->AddSymbol(w));
      if (static_cast<int>(g.size()) != section) throw ParseError("wrong gram length", number);
      ++seen[section];
      if (fields.size() == 3) alphas[g] = power(fields[2], number);
      if (section == 1 && fields[1] == kBeginSentence) {
        m.boundaries = true;
        continue;
      }
      m.contexts[Gram(g.begin(), g.end() - 1)].prob[g.back()] = power(fields[0], number);
      if (section == 1) m.vocab.push_back(g[0]);
    }
  }
  if (!end) throw ParseError("missing \\end\\", number);
  for (const auto &[k, n] : declared) {
    if (seen[k] != n) {
      throw ParseError("section " + std::to_string(k) + " declares " + std::to_string(n) +
                           " grams but lists " + std::to_string(seen[k]),
                       0);
    }
  }
  for (const auto &[g, a] : alphas) m.contexts[g].alpha = a;
  std::sort(m.vocab.begin(), m.vocab.end());
  return m;
}

Machine BuildLmFsa(const BackoffModel &m) {
  constexpr SemiringKind kT = SemiringKind::kTropical;
  Machine out(kT);
  out.SetInputSymbols(m.syms);
  out.SetOutputSymbols(m.syms);
  std::map<Gram, StateId> state;
  for (const auto &[h, ctx] : m.contexts) state[h] = out.AddState();
  if (state.empty()) state[{}] = out.AddState();
  // Longest suffix of g (cut to order-1 words) that has a state.
  auto target = [&](Gram g) {
    if (static_cast<int>(g.size()) > m.order - 1) g.erase(g.begin(), g.end() - (m.order - 1));
    while (!state.count(g)) g.erase(g.begin());
    return state.at(g);
  };
  const Label eos = m.Eos();
  out.SetStart(m.boundaries ? target(Gram{m.Bos()}) : state.at({}));
  for (const auto &[h, ctx] : m.contexts) {
    const StateId s = state.at(h);
    if (!m.boundaries) out.SetFinal(s, 0.0);
    for (const auto &[y, p] : ctx.prob) {
      if (p <= 0) continue;
      if (m.boundaries && y == eos) {
        out.SetFinal(s, -std::log(p));
        continue;
      }
      Gram g = h;
      g.push_back(y);
      out.AddArc(s, y, y, -std::log(p), target(g));
    }
    if (!h.empty() && ctx.alpha > 0) {
      out.AddArc(s, kEpsilon, kEpsilon, -std::log(ctx.alpha), target(Gram(h.begin() + 1, h.end())));
    }
  }
  return out;
}

}  // namespace wfst
