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

#include "wfst/lazy.h"

#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/rational.h"

namespace wfst {
namespace {

using testing::Rng;

constexpr SemiringKind kT = SemiringKind::kTropical;

TEST(LazyCompose, ExpansionIsIsomorphicToStaticComposition) {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    auto [a, b] = testing::RandomComposePair(rng, kT, 3, false);
    auto lazy = MakeLazyCompose(a, b);
    Machine expanded = Connect(Expand(*lazy));
    Machine stat = Compose(a, b);
    ASSERT_TRUE(testing::Isomorphic(expanded, stat))
        << WriteText(expanded) << "---\n" << WriteText(stat);
  }
}

TEST(LazyCompose, ArcsAreReplayStable) {
  Rng rng(42);
  auto [a, b] = testing::RandomComposePair(rng, kT, 2, false);
  auto lazy = MakeLazyCompose(a, b);
  Expand(*lazy);
  for (StateId s = 0; s < static_cast<StateId>(lazy->NumRegistered()); ++s) {
    EXPECT_EQ(lazy->Arcs(s), lazy->Arcs(s));
  }
}

TEST(LazyCompose, ObservationStringVisitsNoMoreThanStatic) {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    testing::RandomSpec spec;
    spec.acceptor = false;
    spec.states = 5;
    spec.arcs = 12;
    spec.labels = 3;
    Machine model = RandomMachine(rng, spec);
    const std::vector<Label> obs{1, 2, 1};
    Machine o = LinearAcceptor(obs, kT);
    auto lazy = MakeLazyCompose(o, model);
    Expand(*lazy);
    ComposeOptions untrimmed;
    untrimmed.connect = false;
    EXPECT_LE(lazy->NumRegistered(),
              static_cast<size_t>(Compose(o, model, untrimmed).NumStates()));
  }
}

TEST(LazyCompose, KindMismatchIsRejected) {
  Machine t = ReadText("0 1 1 1\n1\n", kT);
  Machine r = ReadText("0 1 1 1\n1\n", SemiringKind::kReal);
  EXPECT_THROW(MakeLazyCompose(t, r), KindError);
}

// Chain 0 -> 1 -> ... -> n-1 with arc i labelled i + 1.
std::shared_ptr<Fsm> Chain(int n) {
  auto m = std::make_shared<Machine>(kT);
  for (int i = 0; i < n; ++i) m->AddState();
  m->SetStart(0);
  for (int i = 0; i + 1 < n; ++i) m->AddArc(i, i + 1, i + 1, 0.5 * i, i + 1);
  m->SetFinal(n - 1, 0);
  return std::make_shared<MachineFsm>(std::shared_ptr<const Machine>(m));
}

std::vector<std::vector<Arc>> Traverse(Fsm &f) {
  std::vector<std::vector<Arc>> out;
  for (StateId s = f.Start(); s != kNoState;) {
    out.push_back(f.Arcs(s));
    s = out.back().empty() ? kNoState : out.back()[0].nextstate;
  }
  return out;
}

TEST(CachedFsm, MemoizeExpandsEachStateOnce) {
  CachedFsm c(Chain(10), CacheDiscipline::Memoize());
  auto first = Traverse(c);
  auto second = Traverse(c);
  EXPECT_EQ(first, second);
  EXPECT_EQ(c.NumExpansions(), 10u);
}

TEST(CachedFsm, LruMatchesMemoize) {
  CachedFsm memo(Chain(10), CacheDiscipline::Memoize());
  CachedFsm lru(Chain(10), CacheDiscipline::Lru(2));
  auto want = Traverse(memo);
  EXPECT_EQ(Traverse(lru), want);
  EXPECT_EQ(Traverse(lru), want);
  EXPECT_LE(lru.NumCached(), 2u);
  EXPECT_EQ(lru.NumExpansions(), 20u);
  EXPECT_THROW(CachedFsm(Chain(3), CacheDiscipline::Lru(0)), ContractError);
}

TEST(CachedFsm, RefcountReleasesAndReexpands) {
  CachedFsm c(Chain(4), CacheDiscipline::Refcount());
  c.Acquire(1);
  c.Arcs(1);
  c.Arcs(1);
  EXPECT_EQ(c.NumExpansions(), 1u);
  c.Release(1);
  EXPECT_EQ(c.NumCached(), 0u);
  c.Arcs(1);
  EXPECT_EQ(c.NumExpansions(), 2u);
  // Unacquired states are not retained.
  c.Arcs(2);
  c.Arcs(2);
  EXPECT_EQ(c.NumExpansions(), 4u);
  EXPECT_THROW(c.Release(3), ContractError);
}

TEST(CachedFsm, DisciplinesAreObservationallyIdentical) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    auto [a, b] = testing::RandomComposePair(rng, kT, 2, false);
    auto reference = MakeLazyCompose(a, b);
    Machine want = Expand(*reference);
    for (CacheDiscipline d : {CacheDiscipline::Memoize(), CacheDiscipline::Lru(1),
                              CacheDiscipline::Lru(3), CacheDiscipline::Refcount()}) {
      CachedFsm c(MakeLazyCompose(a, b), d);
      // Visit states in a shuffled order, twice, after a warm-up expansion.
      Expand(c);
      std::vector<StateId> order(want.NumStates());
      for (StateId s = 0; s < want.NumStates(); ++s) order[s] = s;
      std::shuffle(order.begin(), order.end(), rng);
      for (int pass = 0; pass < 2; ++pass) {
        for (StateId s : order) {
          if (d.mode == CacheMode::kRefcount && pass == 0) c.Acquire(s);
          ASSERT_EQ(c.Arcs(s), want.Arcs(s));
          ASSERT_EQ(c.Final(s), want.Final(s));
          if (d.mode == CacheMode::kRefcount && pass == 1) c.Release(s);
        }
      }
    }
  }
}

}  // namespace
}  // namespace wfst
