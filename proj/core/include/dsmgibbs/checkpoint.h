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

#ifndef DSMGIBBS_CHECKPOINT_H_
#define DSMGIBBS_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "dsmgibbs/models.h"
#include "dsmgibbs/numgrad.h"

namespace dsmgibbs {

enum class NetworkKind { kEnergy, kScore, kPosterior };

std::string to_string(NetworkKind kind);

// Text checkpoint:
//
//   dsmgibbs-checkpoint 1
//   kind energy|score|posterior
//   activation swish
//   sigma_conditioned 0|1
//   widths 2 400 400 400 1
//   meta <name> <value>        (zero or more)
//   layer <index>
//   w <row values>             (one line per weight row)
//   b <bias values>
//   ...
//   checksum <fnv1a-64 of every preceding byte, hex>
struct Checkpoint {
  NetworkKind kind = NetworkKind::kEnergy;
  bool sigma_conditioned = false;
  numgrad::MlpParams params;
  std::map<std::string, double> meta;
};

std::uint64_t fnv1a64(std::string_view bytes);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Energy or score model backed by the checkpoint. Throws CapabilityError for
// posterior checkpoints.
std::unique_ptr<EnergyModel> make_energy_model(const Checkpoint& ckpt);

}  // namespace dsmgibbs

#endif  // DSMGIBBS_CHECKPOINT_H_
