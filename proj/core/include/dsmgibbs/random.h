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

#ifndef DSMGIBBS_RANDOM_H_
#define DSMGIBBS_RANDOM_H_

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace dsmgibbs {

using Rng = std::mt19937_64;

// Seeds an independent generator for (seed, stream). Streams for different
// ids never share state, so chain results do not depend on scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n);

// Entries uniformly in {-1, +1}.
Eigen::VectorXd rademacher(Rng& rng, Eigen::Index n);

double uniform01(Rng& rng);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_RANDOM_H_
