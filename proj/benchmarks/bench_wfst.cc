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

#include <benchmark/benchmark.h>

#include "lm_oracle.h"
#include "oracles.h"
#include "wfst/decode.h"
#include "wfst/fsm_ops.h"
#include "wfst/lazy.h"
#include "wfst/ngram.h"
#include "wfst/optimize.h"
#include "wfst/rational.h"
#include "wfst/rewrite.h"

namespace wfst {
namespace {

constexpr SemiringKind kT = SemiringKind::kTropical;

Machine RandomTransducer(testing::Rng &rng, int states) {
  testing::RandomSpec spec;
  spec.states = states;
  spec.arcs = 3 * states;
  spec.labels = 4;
  spec.acceptor = false;
  spec.eps_out = 0.1;
  return testing::RandomMachine(rng, spec);
}

void BM_Compose(benchmark::State &state) {
  testing::Rng rng(1);
  const Machine a = RandomTransducer(rng, state.range(0));
  const Machine b = RandomTransducer(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Compose(a, b));
}
BENCHMARK(BM_Compose)->Arg(16)->Arg(64)->Arg(256);

void BM_LazyComposeExpand(benchmark::State &state) {
  testing::Rng rng(1);
  const Machine a = RandomTransducer(rng, state.range(0));
  const Machine b = RandomTransducer(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Expand(*MakeLazyCompose(a, b)));
}
BENCHMARK(BM_LazyComposeExpand)->Arg(16)->Arg(64)->Arg(256);

void BM_DeterminizeAcyclic(benchmark::State &state) {
  testing::Rng rng(2);
  testing::RandomSpec spec;
  spec.states = state.range(0);
  spec.arcs = 3 * spec.states;
  spec.labels = 3;
  spec.acyclic = true;
  const Machine m = testing::RandomMachine(rng, spec);
  for (auto _ : state) benchmark::DoNotOptimize(Determinize(m, 1 << 20));
}
BENCHMARK(BM_DeterminizeAcyclic)->Arg(8)->Arg(16)->Arg(32);

void BM_Minimize(benchmark::State &state) {
  testing::Rng rng(3);
  const Machine m = testing::RandomDfa(rng, kT, state.range(0), 4, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(Minimize(m));
}
BENCHMARK(BM_Minimize)->Arg(64)->Arg(256)->Arg(1024);

void BM_ShortestDistance(benchmark::State &state) {
  testing::Rng rng(4);
  testing::RandomSpec spec;
  spec.states = state.range(0);
  spec.arcs = 4 * spec.states;
  spec.labels = 4;
  const Machine m = testing::RandomMachine(rng, spec);
  const auto algo = static_cast<ShortestDistanceAlgo>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ShortestDistance(m, algo));
}
BENCHMARK(BM_ShortestDistance)
    ->Args({1024, static_cast<int>(ShortestDistanceAlgo::kDijkstra)})
    ->Args({1024, static_cast<int>(ShortestDistanceAlgo::kBellmanFord)});

void BM_BeamDecodeDeadBranches(benchmark::State &state) {
  const auto stages = testing::DeadBranchCascade(state.range(0));
  CascadeSpec spec;
  for (const Machine &m : stages) spec.stages.push_back(std::make_shared<const Machine>(m));
  for (auto _ : state) benchmark::DoNotOptimize(BeamDecode(spec, kInfinity));
}
BENCHMARK(BM_BeamDecodeDeadBranches)->Arg(20)->Arg(200);

void BM_CompileRule(benchmark::State &state) {
  const std::string grammar =
      "Alphabet = [m i s z o $ \\# b d g] ;\nClass VStop = [m b d g] ;\n"
      "s -> z / _ ($ | \\#) {VStop} ;\n";
  for (auto _ : state) {
    RuleGrammar g = ParseRules(grammar);
    benchmark::DoNotOptimize(CompileGrammar(g));
  }
}
BENCHMARK(BM_CompileRule);

void BM_KatzAndAcceptor(benchmark::State &state) {
  testing::Rng rng(5);
  const Corpus corpus = testing::RandomCorpus(rng, state.range(0), 50, 12);
  const CountTable ct = CountNgrams(corpus, 2);
  for (auto _ : state) benchmark::DoNotOptimize(BuildLmFsa(KatzModel(ct)));
}
BENCHMARK(BM_KatzAndAcceptor)->Arg(100)->Arg(1000);

}  // namespace
}  // namespace wfst

BENCHMARK_MAIN();
