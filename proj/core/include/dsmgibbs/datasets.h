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

#ifndef DSMGIBBS_DATASETS_H_
#define DSMGIBBS_DATASETS_H_

#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsmgibbs/random.h"

namespace dsmgibbs {

// Labeled point cloud; one row per point. `chain_id` and `step` are either
// both empty or both of length size().
struct SampleSet {
  Eigen::MatrixXd points;
  std::vector<std::int64_t> chain_id;
  std::vector<std::int64_t> step;
  std::map<std::string, std::string> metadata;

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return int(points.cols()); }
  bool has_chain_columns() const { return !chain_id.empty(); }
};

enum class DatasetKind { kMoG4, kTwoRings, kSwissRoll };

std::string to_string(DatasetKind kind);
// Accepts "mog4", "rings", "roll" (and the long names "two_rings",
// "swiss_roll").
DatasetKind parse_dataset_kind(const std::string& name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kMoG4;
  std::int64_t n = 10000;
  std::uint64_t seed = 0;
  // MoG4: components at (+-1, +-1).
  double mog_std = 0.2;
  // TwoRings.
  double ring_inner = 0.5;
  double ring_outer = 1.0;
  double ring_jitter = 0.025;
  // SwissRoll: t ~ U[t_min, t_max], point = scale (t cos t, t sin t) / t_max.
  double roll_t_min = 1.5 * std::numbers::pi;
  double roll_t_max = 4.5 * std::numbers::pi;
  double roll_scale = 1.0;
  double roll_jitter = 0.025;

  void validate() const;
};

SampleSet generate(const DatasetSpec& spec);
SampleSet generate(const DatasetSpec& spec, Rng& rng);

// Header "x1,..,xd[,chain_id,step]"; values printed with 17 significant
// digits so doubles round-trip exactly.
void save_csv(const SampleSet& set, const std::string& path);
SampleSet load_csv(const std::string& path);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_DATASETS_H_
