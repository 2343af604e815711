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

#include "wfst/decode.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "test_util.h"
#include "wfst/errors.h"
#include "wfst/fsm_ops.h"
#include "wfst/lazy.h"
#include "wfst/rational.h"

namespace wfst {
namespace {

using testing::Rng;
using testing::Str;

constexpr SemiringKind kT = SemiringKind::kTropical;

Machine Acceptor(const char *text) {
  TextOptions opts;
  opts.acceptor = true;
  return ReadText(text, kT, opts);
}

Machine PowerSeries() {
  // (2a)(3b)(4b)(5b) + (5a)(3b)* written out directly.
  return Acceptor("0 1 1 2\n1 2 2 3\n2 3 2 4\n3 4 2 5\n4\n0 5 1 5\n5 5 2 3\n5\n");
}

CascadeSpec Spec(std::vector<Machine> stages) {
  CascadeSpec c;
  for (Machine &m : stages) c.stages.push_back(std::make_shared<const Machine>(std::move(m)));
  return c;
}

Machine StaticCascade(const std::vector<Machine> &stages) {
  Machine c = stages[0];
  for (size_t i = 1; i < stages.size(); ++i) c = Compose(c, stages[i]);
  return c;
}

TEST(ShortestDistance, SingleArc) {
  Machine m = Acceptor("0 1 1 2.5\n1\n");
  for (auto algo : {ShortestDistanceAlgo::kAcyclic, ShortestDistanceAlgo::kDijkstra,
                    ShortestDistanceAlgo::kBellmanFord}) {
    EXPECT_EQ(ShortestDistance(m, algo)[1], 2.5);
  }
}

TEST(ShortestDistance, PowerSeriesBestFinal) {
  Machine m = PowerSeries();
  auto d = ShortestDistance(m, ShortestDistanceAlgo::kDijkstra);
  EXPECT_EQ(d[5] + m.Final(5), 5.0);
  EXPECT_EQ(d[4] + m.Final(4), 14.0);
  auto p = BestPath(m);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->input, (Str{1}));
  EXPECT_EQ(p->weight, 5.0);
}

TEST(ShortestDistance, AlgorithmsAgreeWithEnumeration) {
  Rng rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    testing::RandomSpec spec;
    spec.states = 2 + trial % 6;
    spec.arcs = 2 * spec.states;
    spec.acyclic = true;
    spec.labels = 3;
    Machine m = RandomMachine(rng, spec);
    auto want = testing::EnumeratedDistances(m);
    auto a = ShortestDistance(m, ShortestDistanceAlgo::kAcyclic);
    auto d = ShortestDistance(m, ShortestDistanceAlgo::kDijkstra);
    auto b = ShortestDistance(m, ShortestDistanceAlgo::kBellmanFord);
    ASSERT_EQ(a, want);
    ASSERT_EQ(d, want);
    ASSERT_EQ(b, want);
  }
}

TEST(ShortestDistance, PreconditionsAreEnforced) {
  Machine cyclic = Acceptor("0 1 1 1\n1 0 1 1\n1\n");
  EXPECT_THROW(ShortestDistance(cyclic, ShortestDistanceAlgo::kAcyclic), ContractError);
  Machine negative = Acceptor("0 1 1 -1\n1\n");
  EXPECT_THROW(ShortestDistance(negative, ShortestDistanceAlgo::kDijkstra), ContractError);
  EXPECT_EQ(ShortestDistance(negative, ShortestDistanceAlgo::kBellmanFord)[1], -1.0);
  Machine negative_cycle = Acceptor("0 1 1 1\n1 0 1 -2\n1\n");
  EXPECT_THROW(ShortestDistance(negative_cycle, ShortestDistanceAlgo::kBellmanFord),
               ContractError);
  EXPECT_THROW(ShortestDistance(ReadText("0 1 1 1\n1\n", SemiringKind::kReal),
                                ShortestDistanceAlgo::kDijkstra),
               UnsupportedError);
}

TEST(BestPath, SinglePathAndEmptyLanguage) {
  Machine m = ReadText("0 1 1 4 1\n1 2 2 5 2\n2 0.5\n", kT);
  auto p = BestPath(m);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->input, (Str{1, 2}));
  EXPECT_EQ(p->output, (Str{4, 5}));
  EXPECT_EQ(p->weight, 3.5);
  EXPECT_FALSE(BestPath(Acceptor("0 1 1\n")).has_value());
}

TEST(BestPath, ConsistentWithDistancesAndTiesGoToSmallIds) {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    testing::RandomSpec spec;
    spec.states = 5;
    spec.arcs = 9;
    spec.wmax = 2;
    Machine m = RandomMachine(rng, spec);
    auto p = BestPath(m);
    auto d = ShortestDistance(m, ShortestDistanceAlgo::kBellmanFord);
    Weight best = kInfinity;
    StateId best_state = kNoState;
    for (StateId s = 0; s < m.NumStates(); ++s) {
      const Weight c = d[s] + m.Final(s);
      if (c < best) {
        best = c;
        best_state = s;
      }
    }
    if (std::isinf(best)) {
      ASSERT_FALSE(p.has_value());
      continue;
    }
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->weight, best);
    EXPECT_EQ(p->states.back(), best_state);
    EXPECT_EQ(WeightOf(m, p->input), best);
  }
}

TEST(BeamDecode, InfiniteBeamIsExact) {
  Rng rng(53);
  int found = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto stages = testing::RandomCascade(rng, 2);
    auto exact = BestPath(StaticCascade(stages));
    auto result = BeamDecode(Spec(stages), kInfinity);
    ASSERT_EQ(exact.has_value(), result.best.has_value());
    if (!exact) continue;
    ++found;
    ASSERT_TRUE(testing::WeightEq(kT, exact->weight, result.best->weight));
  }
  EXPECT_GT(found, 30);
}

TEST(BeamDecode, NarrowBeamCanLoseTheBestPath) {
  // Reading "a b": the path that is cheapest after "a" is expensive later.
  std::vector<Machine> stages{LinearAcceptor(Str{1, 2}, kT),
                              Acceptor("0 1 1 0\n1 3 2 10\n0 2 1 1\n2 3 2 0\n3\n")};
  auto wide = BeamDecode(Spec(stages), kInfinity);
  ASSERT_TRUE(wide.best.has_value());
  EXPECT_EQ(wide.best->weight, 1.0);
  auto narrow = BeamDecode(Spec(stages), 0.5);
  EXPECT_TRUE(!narrow.best.has_value() || narrow.best->weight > 1.0);
  EXPECT_GT(narrow.stats.pruned_states, 0u);
}

TEST(BeamDecode, BeamSweepIsCostMonotone) {
  Rng rng(54);
  const std::vector<Weight> beams{0, 0.5, 1, 2, 4, 8, kInfinity};
  for (int trial = 0; trial < 100; ++trial) {
    auto spec = Spec(testing::RandomCascade(rng));
    Weight previous = kInfinity;
    for (Weight beam : beams) {
      auto r = BeamDecode(spec, beam);
      const Weight cost = r.best ? r.best->weight : kInfinity;
      ASSERT_LE(cost, previous) << "trial " << trial << " beam " << beam;
      previous = cost;
    }
  }
}

TEST(BeamDecode, ViterbiReturnsSingleBestPathNotSum) {
  // Two paths with the same output: costs 1 and 1.5. A path sum in
  // probability space would give -log(e^-1 + e^-1.5) < 1.
  std::vector<Machine> stages{LinearAcceptor(Str{1}, kT),
                              ReadText("0 1 1 7 1\n0 1 1 7 1.5\n1\n", kT)};
  auto r = BeamDecode(Spec(stages), kInfinity);
  ASSERT_TRUE(r.best.has_value());
  EXPECT_EQ(r.best->weight, 1.0);
  EXPECT_EQ(r.best->output, (Str{7}));
  const double path_sum = -std::log(std::exp(-1.0) + std::exp(-1.5));
  EXPECT_LT(path_sum, r.best->weight);
}

TEST(BeamDecode, CascadeCompositionStaysAcyclic) {
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    auto stages = testing::RandomCascade(rng);
    auto spec = Spec(stages);
    std::shared_ptr<Fsm> cur = std::make_shared<MachineFsm>(spec.stages[0]);
    for (size_t i = 1; i < spec.stages.size(); ++i) {
      cur = std::make_shared<LazyCompose>(cur, std::make_shared<MachineFsm>(spec.stages[i]));
    }
    EXPECT_TRUE(Expand(*cur).IsAcyclic());
  }
}

TEST(BeamDecode, LazyCascadeSkipsDeadBranches) {
  auto stages = testing::DeadBranchCascade(20);
  std::vector<Machine> model(stages.begin() + 1, stages.end());
  const Machine network = StaticCascade(model);
  auto r = BeamDecode(Spec(stages), kInfinity);
  ASSERT_TRUE(r.best.has_value());
  EXPECT_EQ(r.best->output, (Str{100}));
  EXPECT_LT(r.stats.expanded_states, static_cast<size_t>(network.NumStates()));
  EXPECT_LT(2 * r.stats.expanded_states, static_cast<size_t>(network.NumStates()));
}

TEST(BeamDecode, EmptyCascadeAndBadBeam) {
  EXPECT_THROW(BeamDecode(CascadeSpec{}, 1.0), ContractError);
  std::vector<Machine> stages{LinearAcceptor(Str{1}, kT), Acceptor("0 1 1\n1\n")};
  EXPECT_THROW(BeamDecode(Spec(stages), -1.0), DomainError);
  std::vector<Machine> cyclic{Acceptor("0 0 1\n0\n"), Acceptor("0 1 1\n1\n")};
  EXPECT_THROW(BeamDecode(Spec(cyclic), 1.0), ContractError);
}

// Acyclic random lattice.
Machine RandomLattice(Rng &rng) {
  testing::RandomSpec spec;
  spec.states = 6;
  spec.arcs = 12;
  spec.acyclic = true;
  spec.labels = 3;
  spec.final_prob = 0.3;
  spec.wmax = 6;
  return Connect(RandomMachine(rng, spec));
}

TEST(LatticePrune, ZeroThresholdKeepsOnlyOptimalPaths) {
  Machine l = Acceptor("0 1 1 1\n0 1 2 2\n1 2 3 0\n1 2 1 1\n2\n");
  Machine p = LatticePrune(l, 0);
  auto paths = testing::AllPaths(p);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].input, (Str{1, 3}));
  EXPECT_TRUE(LatticePrune(l, kInfinity) == Connect(l));
}

// Arcs (state, index) lying on at least one path of cost <= best + threshold,
// found by enumerating every path.
std::set<std::pair<StateId, size_t>> ArcsOnGoodPaths(const Machine &l, Weight threshold) {
  struct Walk {
    std::vector<std::pair<StateId, size_t>> arcs;
    Weight cost;
    StateId s;
  };
  std::vector<Walk> done;
  std::vector<Walk> stack{{{}, 0.0, l.Start()}};
  while (!stack.empty()) {
    Walk w = std::move(stack.back());
    stack.pop_back();
    if (l.IsFinal(w.s)) done.push_back({w.arcs, w.cost + l.Final(w.s), w.s});
    for (size_t i = 0; i < l.Arcs(w.s).size(); ++i) {
      const Arc &a = l.Arcs(w.s)[i];
      Walk next = w;
      next.arcs.emplace_back(w.s, i);
      next.cost += a.weight;
      next.s = a.nextstate;
      stack.push_back(std::move(next));
    }
  }
  std::set<std::pair<StateId, size_t>> good;
  Weight best = kInfinity;
  for (const Walk &w : done) best = std::min(best, w.cost);
  for (const Walk &w : done) {
    if (w.cost <= best + threshold) good.insert(w.arcs.begin(), w.arcs.end());
  }
  return good;
}

TEST(LatticePrune, MatchesEnumerationFilter) {
  Rng rng(56);
  std::uniform_int_distribution<int> th(0, 6);
  int exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Machine l = RandomLattice(rng);
    const Weight threshold = th(rng);
    auto all = testing::AllPaths(l);
    std::vector<testing::EnumeratedPath> want;
    if (!all.empty()) {
      Weight best = kInfinity;
      for (const auto &p : all) best = std::min(best, p.weight);
      for (const auto &p : all) {
        if (p.weight <= best + threshold) want.push_back(p);
      }
    }
    const Machine pruned = LatticePrune(l, threshold);
    auto kept = testing::AllPaths(pruned);
    // Every good path survives and nothing outside the original appears.
    ASSERT_TRUE(std::includes(kept.begin(), kept.end(), want.begin(), want.end()))
        << WriteText(l);
    ASSERT_TRUE(std::includes(all.begin(), all.end(), kept.begin(), kept.end()));
    // Exactly the arcs on good paths remain.
    ASSERT_EQ(pruned.NumArcs(), ArcsOnGoodPaths(l, threshold).size());
    exact += kept == want;
  }
  // Arc-level pruning can recombine good prefixes with good suffixes into a
  // path above the threshold; that only happens occasionally here.
  EXPECT_GT(exact, 150);
}

TEST(Rescore, IdentityModelKeepsTheBestPath) {
  Machine l = Acceptor("0 1 1 1\n0 1 2 2\n1 2 3 0\n2\n");
  const std::vector<Label> sigma{1, 2, 3};
  auto r = Rescore(l, IdentityMachine(sigma, kT));
  auto b = BestPath(l);
  ASSERT_TRUE(r && b);
  EXPECT_EQ(r->output, b->output);
  EXPECT_EQ(r->weight, b->weight);
}

TEST(Rescore, FullModelFlipsTheWinner) {
  // Lattice: hypothesis A (word 1) costs 1, hypothesis B (word 2) costs 2.
  Machine lattice = Acceptor("0 1 1 1\n0 1 2 2\n1\n");
  // Full language model strongly prefers B.
  Machine full = Acceptor("0 1 1 5\n0 1 2 0.5\n1\n");
  auto first = BestPath(lattice);
  ASSERT_TRUE(first.has_value());
  EXPECT_EQ(first->output, (Str{1}));
  auto r = Rescore(lattice, full);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->output, (Str{2}));
  EXPECT_EQ(r->weight, 2.5);
  auto pruned = Rescore(LatticePrune(lattice, kInfinity), full);
  ASSERT_TRUE(pruned.has_value());
  EXPECT_EQ(pruned->weight, BestPath(Compose(lattice, full))->weight);
  EXPECT_FALSE(Rescore(lattice, Acceptor("0 1 3\n1\n")).has_value());
}

}  // namespace
}  // namespace wfst
