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


#include <benchmark/benchmark.h>

#include "mnemos/clustering.h"
#include "mnemos/random.h"

namespace mnemos {
namespace {

Eigen::MatrixXd ThreeBlobs(int n, int dims) {
  Rng rng(5);
  Eigen::MatrixXd rows(n, dims);
  for (int i = 0; i < n; ++i) {
    const int cluster = i % 3;
    for (int d = 0; d < dims; ++d) {
      rows(i, d) = rng.Normal() + (cluster > 0 && d == cluster - 1 ? 10.0 : 0.0);
    }
  }
  return rows;
}

void BM_FitGmm(benchmark::State& state) {
  const Eigen::MatrixXd rows = ThreeBlobs(static_cast<int>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(FitGmm(rows, 3, 1));
}
BENCHMARK(BM_FitGmm)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_FitGmmBic(benchmark::State& state) {
  const Eigen::MatrixXd rows = ThreeBlobs(300, 10);
  for (auto _ : state) benchmark::DoNotOptimize(FitGmmBic(rows, 6, 1));
}
BENCHMARK(BM_FitGmmBic)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mnemos
