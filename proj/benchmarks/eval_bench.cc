// Copyright 2026 The Mnemos Authors.
//
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


#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "mnemos/eval.h"
#include "mnemos/random.h"
#include "mnemos/text.h"

namespace mnemos {
namespace {

std::string RandomText(Rng& rng, int words) {
  std::vector<std::string> out(words);
  for (auto& w : out) w = "w" + std::to_string(rng.Index(40));
  return Join(out, " ");
}

void BM_RougeN(benchmark::State& state) {
  Rng rng(1);
  const std::string cand = RandomText(rng, static_cast<int>(state.range(0)));
  const std::string ref = RandomText(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(RougeN(cand, ref, 2));
}
BENCHMARK(BM_RougeN)->Arg(20)->Arg(180);

void BM_RougeL(benchmark::State& state) {
  Rng rng(2);
  const std::string cand = RandomText(rng, static_cast<int>(state.range(0)));
  const std::string ref = RandomText(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(RougeL(cand, ref));
}
BENCHMARK(BM_RougeL)->Arg(20)->Arg(180);

}  // namespace
}  // namespace mnemos
