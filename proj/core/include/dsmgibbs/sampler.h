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

#ifndef DSMGIBBS_SAMPLER_H_
#define DSMGIBBS_SAMPLER_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/datasets.h"
#include "dsmgibbs/models.h"
#include "dsmgibbs/posterior.h"
#include "dsmgibbs/random.h"

namespace dsmgibbs {

struct ChainConfig {
  int steps = 10000;
  double sigma = 0.2;
  PosteriorSpec posterior;
  // x0 ~ N(0, init_std^2 I); the default is variance 0.1.
  double init_std = std::sqrt(0.1);
  int thinning = 1;
  int burn_in = 0;
  std::uint64_t seed = 0;

  // Optional mode-occupancy log: fraction of states within `monitor_radius`
  // of each mean, per window of `monitor_window` steps.
  std::vector<Eigen::VectorXd> monitor_means;
  double monitor_radius = 0.3;
  int monitor_window = 1000;

  void validate() const;
};

struct OccupancyWindow {
  std::int64_t end_step = 0;
  std::vector<double> fractions;
};

// Strictly decreasing noise levels sigma_{K-1} > ... > sigma_0 > 0.
struct NoiseSchedule {
  std::vector<double> levels;
  int gibbs_steps = 3;
  int rademacher_samples = 3;

  // `count` levels spaced geometrically from sigma_max down to sigma_min.
  static NoiseSchedule Geometric(double sigma_max, double sigma_min, int count);
  void validate() const;
};

// One sweep: xt ~ N(x, sigma^2 I), then x' ~ q(x | xt).
Eigen::VectorXd gibbs_step(const EnergyModel& model, const Eigen::VectorXd& x, NoiseLevel level,
                           const PosteriorSpec& posterior, Rng& rng);

// One chain driven by make_stream(config.seed, chain_id). Records states
// after burn-in, every `thinning` steps; step numbers are 1-based sweep
// counts. Throws NumericError on a non-finite state.
SampleSet run_chain(const EnergyModel& model, const ChainConfig& config,
                    std::vector<OccupancyWindow>* occupancy = nullptr,
                    std::uint64_t chain_id = 0);

// Independent chains 0..n_chains-1, concatenated in chain order. Results do
// not depend on the number of worker threads.
SampleSet run_chains(const EnergyModel& model, const ChainConfig& config, int n_chains);

struct MultilevelOptions {
  Provenance posterior = Provenance::kMMDiag;
  double clamp = kDefaultClamp;
  // Replace the last posterior draw by the posterior mean.
  bool final_denoise = true;
};

// Annealed Gibbs over the schedule. Chains start at N(0, sigma_top^2 I).
// Level sigma_t runs gibbs_steps sweeps with relative noise
// sqrt(sigma_t^2 - sigma_below^2) against the model at sigma_t (sigma_below
// is the next level, 0 after the last), so the final level ends at the clean
// distribution; the final sweep returns the mean at sigma_0.
SampleSet multilevel_gibbs(const EnergyModel& model, const NoiseSchedule& schedule, int n_chains,
                           std::uint64_t seed, const MultilevelOptions& options = {});

// Worker threads allowed by the RUN_THREADS environment variable (default:
// hardware concurrency).
int thread_budget();

}  // namespace dsmgibbs

#endif  // DSMGIBBS_SAMPLER_H_
