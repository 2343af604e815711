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

#include "wfst/rational.h"

#include <gtest/gtest.h>

#include "test_util.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"

namespace wfst {
namespace {

using testing::AllStrings;
using testing::RandomMachine;
using testing::RandomSpec;
using testing::Rng;
using testing::Str;

constexpr SemiringKind kB = SemiringKind::kBoolean;
constexpr SemiringKind kT = SemiringKind::kTropical;
constexpr SemiringKind kR = SemiringKind::kReal;

Machine Acceptor(const char *text, SemiringKind kind = kT) {
  TextOptions opts;
  opts.acceptor = true;
  return ReadText(text, kind, opts);
}

// Every arc points at a real state and the start is set.
bool WellFormed(const Machine &m) {
  if (m.Start() == kNoState || m.Start() >= m.NumStates()) return false;
  for (StateId s = 0; s < m.NumStates(); ++s) {
    if (!InCarrier(m.Kind(), m.Final(s))) return false;
    for (const Arc &a : m.Arcs(s)) {
      if (a.nextstate < 0 || a.nextstate >= m.NumStates()) return false;
      if (!InCarrier(m.Kind(), a.weight)) return false;
    }
  }
  return true;
}

TEST(Compose, IdentityOnTheRightIsNeutral) {
  Rng rng(1);
  const std::vector<Label> sigma{1, 2};
  for (int trial = 0; trial < 30; ++trial) {
    RandomSpec spec;
    spec.acceptor = false;
    spec.eps_in = 0.2;
    spec.eps_out = 0.2;
    Machine a = RandomMachine(rng, spec);
    Machine c = Compose(a, IdentityMachine(sigma, kT));
    EXPECT_TRUE(WellFormed(c));
    EXPECT_TRUE(testing::SamePairWeights(a, c, 2, 5));
  }
}

TEST(Compose, TropicalLawWithEpsilons) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto [a, b] = testing::RandomComposePair(rng, kT, 2 + trial % 2, false);
    Machine c = Compose(a, b);
    ASSERT_TRUE(WellFormed(c));
    ASSERT_TRUE(testing::NoMismatch(testing::ComposeLawMismatch(a, b, c, 2 + trial % 2, 5, 6, 5)))
        << "trial " << trial << "\nA:\n" << WriteText(a) << "B:\n" << WriteText(b);
  }
}

TEST(Compose, RealLawOnAcyclicMachines) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto [a, b] = testing::RandomComposePair(rng, kR, 2, true);
    Machine c = Compose(a, b);
    ASSERT_TRUE(testing::NoMismatch(testing::ComposeLawMismatch(a, b, c, 2, 5, 6, 5)))
        << "trial " << trial << "\nA:\n" << WriteText(a) << "B:\n" << WriteText(b);
  }
}

TEST(Compose, HandSummedRealProducts) {
  // A: a -> x (0.5) or a -> y (0.25); B: x -> z (0.5), y -> z (0.5).
  Machine a = ReadText("0 1 1 3 0.5\n0 1 1 4 0.25\n1\n", kR);
  Machine b = ReadText("0 1 3 5 0.5\n0 1 4 5 0.5\n1\n", kR);
  Machine c = Compose(a, b);
  EXPECT_DOUBLE_EQ(WeightOf(c, Str{1}, Str{5}), 0.5 * 0.5 + 0.25 * 0.5);
}

TEST(Compose, FilterRemovesRedundantEpsilonPaths) {
  // a:eps on the left and eps:b on the right can interleave three ways.
  Machine a = ReadText("0 1 1 0\n1\n", kR);
  Machine b = ReadText("0 1 0 2\n1\n", kR);
  ComposeOptions raw;
  raw.unfiltered = true;
  EXPECT_DOUBLE_EQ(WeightOf(Compose(a, b), Str{1}, Str{2}), 1.0);
  EXPECT_GT(WeightOf(Compose(a, b, raw), Str{1}, Str{2}), 1.0);
}

TEST(Compose, KindAndSymbolMismatchesAreRejected) {
  Machine t = ReadText("0 1 1 1\n1\n", kT);
  Machine r = ReadText("0 1 1 1\n1\n", kR);
  EXPECT_THROW(Compose(t, r), KindError);

  auto s1 = std::make_shared<SymbolTable>();
  s1->AddSymbol("x");
  auto s2 = std::make_shared<SymbolTable>();
  s2->AddSymbol("y");
  Machine left = t, right = t;
  left.SetOutputSymbols(s1);
  right.SetInputSymbols(s2);
  EXPECT_THROW(Compose(left, right), ResolutionError);
}

TEST(Intersect, UniversalAcceptorIsNeutral) {
  Machine a = Acceptor("0 1 1 2\n1 1 2 1\n1 3\n");
  Machine sigma_star = Acceptor("0 0 1\n0 0 2\n0\n");
  EXPECT_TRUE(testing::SameInputWeights(a, Intersect(a, sigma_star), 2, 6));
}

TEST(Intersect, BooleanMatchesSetIntersection) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSpec spec;
    spec.kind = kB;
    Machine a = RandomMachine(rng, spec);
    Machine b = RandomMachine(rng, spec);
    Machine c = Intersect(a, b);
    for (const Str &s : AllStrings(2, 6)) {
      const bool want = WeightOf(a, s) == 1.0 && WeightOf(b, s) == 1.0;
      ASSERT_EQ(WeightOf(c, s) == 1.0, want);
    }
  }
}

TEST(Intersect, TropicalWeightsAdd) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSpec spec;
    Machine a = RandomMachine(rng, spec);
    Machine b = RandomMachine(rng, spec);
    Machine c = Intersect(a, b);
    for (const Str &s : AllStrings(2, 6)) {
      ASSERT_EQ(WeightOf(c, s), TimesFast(kT, WeightOf(a, s), WeightOf(b, s)));
    }
  }
  EXPECT_THROW(Intersect(ReadText("0 1 1 2\n1\n", kT), Acceptor("0 1 1\n1\n")),
               ContractError);
}

TEST(Intersect, EqualsComposeOnAcceptors) {
  Rng rng(6);
  RandomSpec spec;
  Machine a = RandomMachine(rng, spec);
  Machine b = RandomMachine(rng, spec);
  EXPECT_TRUE(Intersect(a, b) == Compose(a, b));
}

Machine Term(Label l, Weight w) {
  Machine m(kT);
  m.AddState();
  m.AddState();
  m.SetStart(0);
  m.AddArc(0, l, l, w, 1);
  m.SetFinal(1, 0);
  return m;
}

TEST(Union, EmptyIsNeutralAndOverlapTakesMin) {
  Machine a = Acceptor("0 1 1 2\n1\n");
  EXPECT_TRUE(testing::SameInputWeights(a, Union(a, EmptyMachine(kT)), 2, 5));
  Machine u = Union(Term(1, 4), Term(1, 2.5));
  EXPECT_EQ(WeightOf(u, Str{1}), 2.5);
  EXPECT_TRUE(WellFormed(u));
}

TEST(Union, RandomMatchesCombine) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSpec spec;
    Machine a = RandomMachine(rng, spec);
    Machine b = RandomMachine(rng, spec);
    Machine u = Union(a, b);
    for (const Str &s : AllStrings(2, 6)) {
      ASSERT_EQ(WeightOf(u, s), PlusFast(kT, WeightOf(a, s), WeightOf(b, s)));
    }
  }
}

TEST(Concat, WeightsAddAcrossTheSeam) {
  EXPECT_EQ(WeightOf(Concat(Term(1, 2), Term(2, 3)), Str{1, 2}), 5.0);
  Machine a = Acceptor("0 1 1 2\n1 1 2 1\n1 3\n");
  Machine eps = Acceptor("0\n");
  EXPECT_TRUE(testing::SameInputWeights(a, Concat(a, eps), 2, 6));
}

TEST(Concat, MatchesEverySplit) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSpec spec;
    spec.states = 3;
    spec.final_prob = 0.6;
    Machine a = RandomMachine(rng, spec);
    Machine b = RandomMachine(rng, spec);
    Machine c = Concat(a, b);
    for (const Str &s : AllStrings(2, 6)) {
      Weight want = Zero(kT);
      for (size_t k = 0; k <= s.size(); ++k) {
        const Str u(s.begin(), s.begin() + k), v(s.begin() + k, s.end());
        want = PlusFast(kT, want, TimesFast(kT, WeightOf(a, u), WeightOf(b, v)));
      }
      ASSERT_EQ(WeightOf(c, s), want);
    }
  }
}

TEST(Closure, EmptyLanguageStarIsEpsilon) {
  Machine c = Closure(EmptyMachine(kT));
  EXPECT_EQ(WeightOf(c, Str{}), 0.0);
  EXPECT_EQ(WeightOf(c, Str{1}), kInfinity);
  EXPECT_THROW(Closure(EmptyMachine(kR)), UnsupportedError);
}

TEST(Closure, RepeatedTermCostsAccumulate) {
  Machine star = Closure(Term(2, 3));
  for (int k = 0; k < 6; ++k) EXPECT_EQ(WeightOf(star, Str(k, 2)), 3.0 * k);
}

TEST(Closure, IdempotentOnLanguage) {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    RandomSpec spec;
    spec.kind = kB;
    spec.states = 3;
    Machine a = RandomMachine(rng, spec);
    EXPECT_TRUE(testing::SameInputWeights(Closure(a), Closure(Closure(a)), 2, 6));
  }
}

TEST(Reverse, ReversesStrings) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    RandomSpec spec;
    spec.eps_in = 0.2;
    Machine a = RandomMachine(rng, spec);
    Machine r = Reverse(a);
    for (const Str &s : AllStrings(2, 6)) {
      const Str back(s.rbegin(), s.rend());
      ASSERT_EQ(WeightOf(r, s), WeightOf(a, back));
    }
    EXPECT_TRUE(testing::SameInputWeights(a, Reverse(r), 2, 6));
  }
  EXPECT_EQ(WeightOf(Reverse(Term(1, 0)), Str{1}), 0.0);
}

TEST(Project, KeepsChosenTapeAndWeights) {
  Machine t = ReadText("0 1 1 2 1.5\n1\n", kT);
  Machine out = Project(t, ProjectSide::kOutput);
  EXPECT_TRUE(out.IsAcceptor());
  EXPECT_EQ(WeightOf(out, Str{2}), 1.5);
  Machine a = Acceptor("0 1 1 2\n1 1 2 1\n1 3\n");
  const std::vector<Label> sigma{1, 2};
  EXPECT_TRUE(testing::SameInputWeights(
      a, Project(Compose(a, IdentityMachine(sigma, kT)), ProjectSide::kInput), 2, 6));
}

TEST(Complement, EmptyAndDoubleComplement) {
  const std::vector<Label> sigma{1, 2};
  Machine all = Complement(EmptyMachine(kB), sigma);
  for (const Str &s : AllStrings(2, 5)) EXPECT_EQ(WeightOf(all, s), 1.0);
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    RandomSpec spec;
    spec.kind = kB;
    spec.eps_in = 0.1;
    Machine a = RandomMachine(rng, spec);
    Machine cc = Complement(Complement(a, sigma), sigma);
    EXPECT_TRUE(testing::SameInputWeights(a, cc, 2, 6));
  }
  EXPECT_THROW(Complement(Term(1, 0)), UnsupportedError);
}

TEST(Difference, RemovesStringsWithForbiddenFactor) {
  // Sigma* minus Sigma* a b Sigma* over {a = 1, b = 2}.
  Machine all = Acceptor("0 0 1\n0 0 2\n0\n", kB);
  Machine bad = Acceptor("0 0 1\n0 0 2\n0 1 1\n1 2 2\n2 2 1\n2 2 2\n2\n", kB);
  Machine ok = Difference(all, bad);
  for (const Str &s : AllStrings(2, 7)) {
    bool has = false;
    for (size_t i = 0; i + 1 < s.size(); ++i) has = has || (s[i] == 1 && s[i + 1] == 2);
    ASSERT_EQ(WeightOf(ok, s) == 1.0, !has);
  }
}

}  // namespace
}  // namespace wfst
