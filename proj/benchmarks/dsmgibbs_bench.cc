/* Copyright 2026 The dsmgibbs Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <vector>

#include <benchmark/benchmark.h>

#include "dsmgibbs/evaluation.h"
#include "dsmgibbs/models.h"
#include "dsmgibbs/numgrad.h"
#include "dsmgibbs/posterior.h"
#include "dsmgibbs/sampler.h"

namespace dsmgibbs {
namespace {

numgrad::MlpParams ReferenceNet(int in = 2) {
  Rng rng = make_stream(0, 0);
  return numgrad::MlpParams::Random(std::vector<int>{in, 400, 400, 400, 1}, rng);
}

// One training step's worth of loss and parameter gradient.
void BM_DsmBatch(benchmark::State& state) {
  const numgrad::MlpParams p = ReferenceNet();
  const Eigen::Index batch = state.range(0);
  Rng rng = make_stream(1, 0);
  const Eigen::MatrixXd clean = Eigen::MatrixXd::Random(2, batch);
  const Eigen::MatrixXd noisy = clean + 0.2 * Eigen::MatrixXd::Random(2, batch);
  const Eigen::VectorXd sigmas = Eigen::VectorXd::Constant(batch, 0.2);
  const Eigen::VectorXd weights = Eigen::VectorXd::Ones(batch);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numgrad::dsm_batch(p, clean, noisy, sigmas, weights));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DsmBatch)->Arg(1)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_HessianInput(benchmark::State& state) {
  const numgrad::MlpParams p = ReferenceNet();
  const Eigen::Vector2d x(0.3, -0.4);
  for (auto _ : state) benchmark::DoNotOptimize(numgrad::hessian_input(p, x));
}
BENCHMARK(BM_HessianInput)->Unit(benchmark::kMicrosecond);

void GibbsStep(benchmark::State& state, const EnergyModel& model, Provenance kind) {
  PosteriorSpec spec;
  spec.kind = kind;
  spec.iso_variance = 0.02;
  Rng rng = make_stream(2, 0);
  Eigen::VectorXd x = Eigen::Vector2d(1.0, 1.0);
  for (auto _ : state) {
    x = gibbs_step(model, x, NoiseLevel::Single(0.2), spec, rng);
    benchmark::DoNotOptimize(x.data());
  }
}

void BM_GibbsStepNetwork(benchmark::State& state) {
  const MlpEnergyModel model(ReferenceNet(), false);
  GibbsStep(state, model, static_cast<Provenance>(state.range(0)));
}
BENCHMARK(BM_GibbsStepNetwork)
    ->Arg(int(Provenance::kMMFull))
    ->Arg(int(Provenance::kMMDiag))
    ->Arg(int(Provenance::kMMIso))
    ->Unit(benchmark::kMicrosecond);

void BM_GibbsStepAnalytic(benchmark::State& state) {
  const MixtureModel model(GaussianMixture::FourModes(0.2));
  GibbsStep(state, model, Provenance::kMMFull);
}
BENCHMARK(BM_GibbsStepAnalytic)->Unit(benchmark::kMicrosecond);

void BM_Mmd(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, 2);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mmd(a, b).mmd2);
  state.SetComplexityN(n);
}
BENCHMARK(BM_Mmd)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_GridPosteriorMoments(benchmark::State& state) {
  const GridOracle grid = GridOracle::Default(GaussianMixture::FourModes(0.2));
  const Eigen::Vector2d xt(0.8, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(grid_posterior_moments(grid, 0.2, xt));
}
BENCHMARK(BM_GridPosteriorMoments)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dsmgibbs

BENCHMARK_MAIN();
